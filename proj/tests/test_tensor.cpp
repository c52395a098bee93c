#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "triad/tensor.hpp"

using namespace triad;

TEST_CASE("prg determinism: equal seed and counter give identical streams") {
    RandomRange r{-1.0, 1.0, 0.0};
    PrgSeed a{42, 0}, b{42, 0};
    const Matrix m1 = prg_draw(a, 2, 2, r);
    const Matrix m2 = prg_draw(b, 2, 2, r);
    CHECK(bit_equal(m1, m2));
    CHECK(a.counter == 4);
    // drawing again continues the stream rather than repeating it
    const Matrix m3 = prg_draw(a, 2, 2, r);
    CHECK(!bit_equal(m1, m3));
}

TEST_CASE("prg seed separation") {
    RandomRange r{-1.0, 1.0, 0.0};
    PrgSeed a{42, 0}, b{43, 0};
    CHECK(!bit_equal(prg_draw(a, 10, 10, r), prg_draw(b, 10, 10, r)));
}

TEST_CASE("prg draws stay in range and honor the nonzero floor") {
    RandomRange r{-2.0, 2.0, 0.5};
    PrgSeed s{7, 0};
    const Matrix m = prg_draw(s, 1000, 1000, r, true);
    double min_abs = 1e300, lo = 1e300, hi = -1e300;
    for (double v : m.data()) {
        min_abs = std::min(min_abs, std::fabs(v));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(min_abs >= 0.5);
    CHECK(lo >= -2.0);
    CHECK(hi < 2.0);
}

TEST_CASE("mulshare draws are sign-balanced with magnitude in [0.5, 2)") {
    PrgSeed s{11, 0};
    const Matrix m = prg_draw_mulshare(s, 200, 200);
    int neg = 0;
    for (double v : m.data()) {
        CHECK(std::fabs(v) >= 0.5);
        CHECK(std::fabs(v) < 2.0);
        if (v < 0) ++neg;
    }
    CHECK(neg > 18000);
    CHECK(neg < 22000);
}

TEST_CASE("integer draws telescope to exact zero") {
    PrgSeed s0{5, 0}, s1{6, 0}, s2{9, 0};
    PrgSeed s0b{5, 0}, s1b{6, 0}, s2b{9, 0};
    const Matrix r0 = prg_draw_integer(s0, 8, 8, 16), r1 = prg_draw_integer(s1, 8, 8, 16),
                 r2 = prg_draw_integer(s2, 8, 8, 16);
    const Matrix a0 = sub(r0, prg_draw_integer(s1b, 8, 8, 16));
    const Matrix a1 = sub(r1, prg_draw_integer(s2b, 8, 8, 16));
    const Matrix a2 = sub(r2, prg_draw_integer(s0b, 8, 8, 16));
    const Matrix total = add(add(a0, a1), a2);
    for (double v : total.data()) CHECK(v == 0.0);
    for (double v : r0.data()) {
        CHECK(v == std::floor(v));
        CHECK(std::fabs(v) <= 16.0);
    }
}

TEST_CASE("invalid ranges are configuration errors") {
    PrgSeed s{1, 0};
    CHECK_THROWS_AS(prg_draw(s, 1, 1, RandomRange{1.0, -1.0, 0.0}), ConfigError);
    CHECK_THROWS_AS(prg_draw(s, 1, 1, RandomRange{-1.0, 1.0, 5.0}, true), ConfigError);
    CHECK_THROWS_AS(prg_draw(s, 1, 1, RandomRange{0.0, 0.0, 0.0}, true), ConfigError);
}

TEST_CASE("sign treats -0.0 as >= 0") {
    const Matrix m{{-2.0, 0.0}, {3.0, -0.0}};
    const Matrix s = sign(m);
    CHECK(s(0, 0) == -1.0);
    CHECK(s(0, 1) == 1.0);
    CHECK(s(1, 0) == 1.0);
    CHECK(s(1, 1) == 1.0);
}

TEST_CASE("exp and affine basics") {
    CHECK(exp(Matrix{{0.0}})(0, 0) == 1.0);
    const Matrix a = affine(Matrix{{1.0, -1.0}}, 0.5, 0.5);
    CHECK(a(0, 0) == 1.0);
    CHECK(a(0, 1) == 0.0);
}

TEST_CASE("sign(x) * x == |x| for finite x") {
    std::mt19937_64 rng(3);
    Matrix m = oracles::random_span_matrix(rng, 20, 20, 6);
    m(0, 0) = -0.0;
    m(0, 1) = 0.0;
    const Matrix lhs = hadamard(sign(m), m);
    const Matrix rhs = abs(m);
    // numeric equality: sign(-0.0) * -0.0 is -0.0, which equals +0.0
    for (std::size_t i = 0; i < m.size(); ++i) CHECK(lhs.at(i) == rhs.at(i));
}

TEST_CASE("rowsum_broadcast") {
    const Matrix a{{1.0, 2.0}, {3.0, 4.0}};
    const Matrix r = rowsum_broadcast(a);
    CHECK(r(0, 0) == 3.0);
    CHECK(r(0, 1) == 3.0);
    CHECK(r(1, 0) == 7.0);
    CHECK(r(1, 1) == 7.0);
    CHECK(rowsum_broadcast(Matrix{{5.0}})(0, 0) == 5.0);

    std::mt19937_64 rng(4);
    const Matrix m = oracles::random_uniform(rng, 3, 4, -10, 10);
    const Matrix rs = rowsum_broadcast(m);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double expect = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) expect += m(i, j);
        for (std::size_t j = 0; j < m.cols(); ++j)
            CHECK(rs(i, j) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("matmul_plain matches the naive oracle") {
    Matrix eye(3, 3);
    for (int i = 0; i < 3; ++i) eye(i, i) = 1.0;
    std::mt19937_64 rng(5);
    const Matrix m = oracles::random_uniform(rng, 3, 3, -5, 5);
    CHECK(bit_equal(matmul_plain(eye, m), m));

    const Matrix v = matmul_plain(Matrix{{1.0, 2.0}}, Matrix{{3.0}, {4.0}});
    CHECK(v(0, 0) == 11.0);

    const Matrix a = oracles::random_uniform(rng, 5, 5, -3, 3);
    const Matrix b = oracles::random_uniform(rng, 5, 5, -3, 3);
    CHECK(max_rel_diff(matmul_plain(a, b), oracles::matmul_naive(a, b)) < 1e-12);
}

TEST_CASE("shape and domain errors") {
    const Matrix a(2, 2), b(2, 3);
    CHECK_THROWS_AS(add(a, b), DimensionError);
    CHECK_THROWS_AS(matmul_plain(a, Matrix(3, 2)), DimensionError);
    CHECK_THROWS_AS(div(Matrix{{1.0}}, Matrix{{0.0}}), DomainError);
}

TEST_CASE("center_rows removes row means") {
    std::mt19937_64 rng(6);
    const Matrix m = oracles::random_uniform(rng, 4, 7, -20, 20);
    const Matrix c = center_rows(m);
    for (std::size_t r = 0; r < c.rows(); ++r) {
        double s = 0.0;
        for (std::size_t j = 0; j < c.cols(); ++j) s += c(r, j);
        CHECK(std::fabs(s) < 1e-12);
    }
}
