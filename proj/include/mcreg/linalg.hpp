#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include <mcreg/errors.hpp>

namespace mcreg {

/**
 * Row-major dense matrix of doubles.
 *
 * A default-constructed matrix is the empty 0x0 placeholder; any matrix built
 * with explicit dimensions has rows >= 1 and cols >= 1. Entries supplied at
 * construction must be finite.
 */
class DenseMatrix {
public:
    DenseMatrix() = default;

    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill)
    {
        check_shape();
        if (!std::isfinite(fill)) throw ParameterError("DenseMatrix: non-finite fill value");
    }

    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data))
    {
        check_shape();
        if (data_.size() != rows_ * cols_)
            throw DimensionError("DenseMatrix: entry count does not match rows*cols");
        for (double v : data_)
            if (!std::isfinite(v)) throw ParameterError("DenseMatrix: non-finite entry");
    }

    DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
    {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        check_shape();
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw DimensionError("DenseMatrix: ragged initializer");
            for (double v : r) {
                if (!std::isfinite(v)) throw ParameterError("DenseMatrix: non-finite entry");
                data_.push_back(v);
            }
        }
    }

    static DenseMatrix identity(std::size_t n)
    {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static DenseMatrix diagonal(std::span<const double> d)
    {
        DenseMatrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

    std::vector<double> col(std::size_t j) const
    {
        std::vector<double> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
        return out;
    }

    void set_col(std::size_t j, std::span<const double> v)
    {
        if (v.size() != rows_) throw DimensionError("set_col: length mismatch");
        for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
    }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    bool operator==(const DenseMatrix&) const = default;

private:
    void check_shape() const
    {
        if (rows_ == 0 || cols_ == 0) throw DimensionError("DenseMatrix: dimensions must be >= 1");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline DenseMatrix transpose(const DenseMatrix& a)
{
    DenseMatrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

inline DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b)
{
    if (a.cols() != b.rows()) throw DimensionError("multiply: inner dimensions differ");
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto ci = c.row(i);
        for (std::size_t l = 0; l < a.cols(); ++l) {
            const double ail = a(i, l);
            if (ail == 0.0) continue;
            auto bl = b.row(l);
            for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += ail * bl[j];
        }
    }
    return c;
}

// aᵀ·b without materializing the transpose.
inline DenseMatrix cross_product(const DenseMatrix& a, const DenseMatrix& b)
{
    if (a.rows() != b.rows()) throw DimensionError("cross_product: row counts differ");
    DenseMatrix c(a.cols(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto ai = a.row(i);
        auto bi = b.row(i);
        for (std::size_t r = 0; r < a.cols(); ++r) {
            const double v = ai[r];
            if (v == 0.0) continue;
            auto cr = c.row(r);
            for (std::size_t s = 0; s < b.cols(); ++s) cr[s] += v * bi[s];
        }
    }
    return c;
}

inline DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("subtract: shape mismatch");
    DenseMatrix c = a;
    auto cd = c.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < cd.size(); ++i) cd[i] -= bd[i];
    return c;
}

inline double frobenius_norm(const DenseMatrix& a)
{
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return std::sqrt(s);
}

inline double max_abs(const DenseMatrix& a)
{
    double m = 0.0;
    for (double v : a.data()) m = std::max(m, std::abs(v));
    return m;
}

struct CenteredColumns {
    DenseMatrix centered;
    std::vector<double> means;
};

inline CenteredColumns center_columns(const DenseMatrix& m)
{
    if (m.empty()) throw DimensionError("center_columns: empty matrix");
    CenteredColumns out{m, std::vector<double>(m.cols(), 0.0)};
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto r = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) out.means[j] += r[j];
    }
    for (double& mu : out.means) mu /= static_cast<double>(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto r = out.centered.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) r[j] -= out.means[j];
    }
    return out;
}

inline constexpr double kPivotTolerance = 1e-12;

// Lower-triangular L with L·Lᵀ = s. Only the lower triangle of s is read.
inline DenseMatrix cholesky_lower(const DenseMatrix& s)
{
    if (s.rows() != s.cols()) throw DimensionError("cholesky_lower: matrix is not square");
    const std::size_t n = s.rows();
    DenseMatrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = s(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > kPivotTolerance)) throw NotPositiveDefiniteError(j, d);
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = s(i, j);
            for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
            l(i, j) = v / ljj;
        }
    }
    return l;
}

// Solves (L·Lᵀ)x = b in place given the Cholesky factor.
inline void cholesky_solve_inplace(const DenseMatrix& l, std::span<double> b)
{
    const std::size_t n = l.rows();
    for (std::size_t i = 0; i < n; ++i) {
        double v = b[i];
        for (std::size_t k = 0; k < i; ++k) v -= l(i, k) * b[k];
        b[i] = v / l(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
        double v = b[i];
        for (std::size_t k = i + 1; k < n; ++k) v -= l(k, i) * b[k];
        b[i] = v / l(i, i);
    }
}

inline DenseMatrix invert_spd(const DenseMatrix& s)
{
    const DenseMatrix l = cholesky_lower(s);
    const std::size_t n = s.rows();
    DenseMatrix inv(n, n);
    std::vector<double> e(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        cholesky_solve_inplace(l, e);
        for (std::size_t i = 0; i < n; ++i) inv(i, j) = e[i];
    }
    // exact symmetry
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * (inv(i, j) + inv(j, i));
            inv(i, j) = v;
            inv(j, i) = v;
        }
    return inv;
}

// Principal submatrix on the given (ordered) index set.
inline DenseMatrix principal_submatrix(const DenseMatrix& a, std::span<const std::size_t> idx)
{
    DenseMatrix out(idx.size(), idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t c = 0; c < idx.size(); ++c) out(r, c) = a(idx[r], idx[c]);
    return out;
}

}  // namespace mcreg
