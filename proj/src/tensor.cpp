#include "triad/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace triad {

namespace {

void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b))
        throw DimensionError(std::string(op) + ": " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                             std::to_string(b.cols()));
}

Matrix zip(const Matrix& a, const Matrix& b, const char* op, double (*f)(double, double)) {
    check_same_shape(a, b, op);
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out.at(i) = f(a.at(i), b.at(i));
    return out;
}

} // namespace

Matrix add(const Matrix& a, const Matrix& b) {
    return zip(a, b, "add", [](double x, double y) { return x + y; });
}

Matrix sub(const Matrix& a, const Matrix& b) {
    return zip(a, b, "sub", [](double x, double y) { return x - y; });
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    return zip(a, b, "hadamard", [](double x, double y) { return x * y; });
}

Matrix div(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "div");
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (b.at(i) == 0.0) throw DomainError("division by exact zero");
        out.at(i) = a.at(i) / b.at(i);
    }
    return out;
}

Matrix add_scalar(const Matrix& a, double s) {
    Matrix out = a;
    for (double& v : out.data()) v += s;
    return out;
}

Matrix scale(const Matrix& a, double s) {
    Matrix out = a;
    for (double& v : out.data()) v *= s;
    return out;
}

Matrix affine(const Matrix& x, double a, double b) {
    Matrix out = x;
    for (double& v : out.data()) v = a * v + b;
    return out;
}

Matrix exp(const Matrix& a) {
    Matrix out = a;
    for (double& v : out.data()) v = std::exp(v);
    return out;
}

Matrix sign(const Matrix& a) {
    Matrix out = a;
    for (double& v : out.data()) v = (v >= 0.0) ? 1.0 : -1.0;
    return out;
}

Matrix abs(const Matrix& a) {
    Matrix out = a;
    for (double& v : out.data()) v = std::fabs(v);
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = a(r, c);
    return out;
}

Matrix map(const Matrix& a, const std::function<double(double)>& f) {
    Matrix out = a;
    for (double& v : out.data()) v = f(v);
    return out;
}

Matrix rowsum_broadcast(const Matrix& a) {
    Matrix out(a.rows(), a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < a.cols(); ++c) s += a(r, c);
        for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = s;
    }
    return out;
}

Matrix colsum(const Matrix& a) {
    Matrix out(1, a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(0, c) += a(r, c);
    return out;
}

Matrix center_rows(const Matrix& a) {
    Matrix out(a.rows(), a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < a.cols(); ++c) s += a(r, c);
        const double mean = s / static_cast<double>(a.cols());
        for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = a(r, c) - mean;
    }
    return out;
}

Matrix matmul_plain(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw DimensionError("matmul: " + std::to_string(a.cols()) + " vs " +
                             std::to_string(b.rows()));
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double v : a.data()) m = std::max(m, std::fabs(v));
    return m;
}

bool bit_equal(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) return false;
    return std::equal(a.data().begin(), a.data().end(), b.data().begin(),
                      [](double x, double y) {
                          return std::memcmp(&x, &y, sizeof(double)) == 0;
                      });
}

double max_rel_diff(const Matrix& a, const Matrix& b, double floor) {
    if (!a.same_shape(b)) throw DimensionError("max_rel_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom = std::max(std::fabs(b.at(i)), floor);
        m = std::max(m, std::fabs(a.at(i) - b.at(i)) / denom);
    }
    return m;
}

// --- PRG ----------------------------------------------------------------------

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

} // namespace

std::uint64_t PrgSeed::next_u64() {
    const std::uint64_t v = mix64(seed + (++counter) * kGamma);
    return v;
}

double PrgSeed::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

void RandomRange::validate() const {
    if (low == 0.0 && high == 0.0) return; // degenerate mask-free mode
    if (!(low < high)) throw ConfigError("RandomRange: low must be < high");
    if (nonzero_floor < 0.0) throw ConfigError("RandomRange: nonzero_floor must be >= 0");
    if (nonzero_floor != 0.0 && nonzero_floor >= std::max(std::fabs(low), std::fabs(high)))
        throw ConfigError("RandomRange: nonzero_floor >= max(|low|,|high|)");
}

Matrix prg_draw(PrgSeed& seed, std::size_t rows, std::size_t cols, const RandomRange& range,
                bool require_nonzero) {
    range.validate();
    if (require_nonzero && range.length() == 0.0)
        throw ConfigError("require_nonzero on a degenerate range");
    Matrix out(rows, cols);
    const double span = range.high - range.low;
    for (std::size_t i = 0; i < out.size(); ++i) {
        double v;
        do {
            v = range.low + seed.next_unit() * span;
        } while (require_nonzero && (v == 0.0 || std::fabs(v) < range.nonzero_floor));
        out.at(i) = v;
    }
    return out;
}

Matrix prg_draw_mulshare(PrgSeed& seed, std::size_t rows, std::size_t cols) {
    Matrix out(rows, cols);
    const double ln4 = std::log(4.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::uint64_t r = seed.next_u64();
        // bits 11..63 feed the mantissa; bit 0 is free for the sign
        const double u = static_cast<double>(r >> 11) * 0x1.0p-53;
        const double mag = 0.5 * std::exp(u * ln4); // log-uniform in [0.5, 2)
        out.at(i) = (r & 1) ? -mag : mag;
    }
    return out;
}

Matrix prg_draw_integer(PrgSeed& seed, std::size_t rows, std::size_t cols,
                        std::int64_t magnitude) {
    if (magnitude <= 0) throw ConfigError("integer draw magnitude must be positive");
    Matrix out(rows, cols);
    const std::uint64_t buckets = static_cast<std::uint64_t>(2 * magnitude + 1);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::uint64_t r = seed.next_u64() % buckets;
        out.at(i) = static_cast<double>(static_cast<std::int64_t>(r) - magnitude);
    }
    return out;
}

} // namespace triad
