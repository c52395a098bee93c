#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <vector>

#include "triad/errors.hpp"

namespace triad {

/// Dense row-major matrix of 64-bit reals. The universal payload of every
/// protocol message; immutable by convention once handed to a protocol.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {
        if (rows == 0 || cols == 0) throw DimensionError("matrix dimensions must be positive");
    }
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (rows == 0 || cols == 0) throw DimensionError("matrix dimensions must be positive");
        if (data_.size() != rows * cols) throw DimensionError("data length != rows*cols");
    }
    Matrix(std::initializer_list<std::initializer_list<double>> init) {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        if (rows_ == 0 || cols_ == 0) throw DimensionError("matrix dimensions must be positive");
        data_.reserve(rows_ * cols_);
        for (const auto& r : init) {
            if (r.size() != cols_) throw DimensionError("ragged initializer");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& at(std::size_t i) { return data_[i]; }
    double at(std::size_t i) const { return data_[i]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

// --- element-wise operations -------------------------------------------------

Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix div(const Matrix& a, const Matrix& b); // throws DomainError on exact-zero divisor
Matrix add_scalar(const Matrix& a, double s);
Matrix scale(const Matrix& a, double s);
/// a*x + b element-wise.
Matrix affine(const Matrix& x, double a, double b);
Matrix exp(const Matrix& a);
/// +1 for x >= 0 (including -0.0), -1 otherwise.
Matrix sign(const Matrix& a);
Matrix abs(const Matrix& a);
Matrix transpose(const Matrix& a);
Matrix map(const Matrix& a, const std::function<double(double)>& f);

/// Same shape as a; every element of row i is the sum of row i of a.
Matrix rowsum_broadcast(const Matrix& a);
/// 1 x cols row vector of column sums.
Matrix colsum(const Matrix& a);
/// Subtract each row's mean from that row. Local and exact up to rounding.
Matrix center_rows(const Matrix& a);

/// Plain matrix product (plaintext oracle and the local step of secure matmul).
Matrix matmul_plain(const Matrix& a, const Matrix& b);

double max_abs(const Matrix& a);
bool bit_equal(const Matrix& a, const Matrix& b);
/// max over elements of |a-b| / max(|b|, floor).
double max_rel_diff(const Matrix& a, const Matrix& b, double floor = 1e-300);

// --- seeded deterministic generator -------------------------------------------

/// Counter-mode PRG stream position. Two PrgSeed values with equal (seed,
/// counter) produce identical output streams; the construction is a splitmix64
/// finalizer over seed + counter and is stable across platforms and versions.
/// Both holders of a pairwise seed must perform identical draws so the
/// counters stay in lockstep.
struct PrgSeed {
    std::uint64_t seed = 0;
    std::uint64_t counter = 0;

    std::uint64_t next_u64();
    /// Uniform in [0,1), 53-bit mantissa mapping (v >> 11) * 2^-53.
    double next_unit();
};

/// Draw range for masks and shares. nonzero_floor is the minimum |v| enforced
/// when a draw requires non-zero elements.
struct RandomRange {
    double low = -1048576.0;  // -2^20
    double high = 1048576.0;  //  2^20
    double nonzero_floor = 0.0;

    void validate() const;
    double length() const { return high - low; }
    static RandomRange symmetric(double half_width, double nonzero_floor = 0.0) {
        return RandomRange{-half_width, half_width, nonzero_floor};
    }
};

/// rows x cols matrix, elements uniform in [low, high). If require_nonzero,
/// elements with |v| < nonzero_floor are rejection-resampled (the counter
/// advances once per attempted draw).
Matrix prg_draw(PrgSeed& seed, std::size_t rows, std::size_t cols, const RandomRange& range,
                bool require_nonzero = false);

/// Draw for multiplicative shares: random sign, magnitude log-uniform in
/// [0.5, 2.0]. Keeps three-way products of shares well-conditioned. One
/// counter step per element.
Matrix prg_draw_mulshare(PrgSeed& seed, std::size_t rows, std::size_t cols);

/// Integer-valued draw, uniform over {-magnitude, ..., magnitude}. Integer
/// masks cancel exactly in floating point, which the sign-conversion path
/// relies on.
Matrix prg_draw_integer(PrgSeed& seed, std::size_t rows, std::size_t cols, std::int64_t magnitude);

} // namespace triad
