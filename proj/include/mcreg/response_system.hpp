#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <mcreg/errors.hpp>
#include <mcreg/lasso.hpp>
#include <mcreg/linalg.hpp>

namespace mcreg {

/// Nonzero coefficients of one per-response fit, indexed in block space
/// (see DesignBlocks), plus its residual sum of squares.
struct SparseFit {
    std::vector<std::size_t> index;
    std::vector<double> value;
    double rss = 0.0;
    std::size_t sweeps = 0;

    std::size_t df() const noexcept { return index.size(); }
};

/**
 * Column blocks [X | R] regressed against columns of a target matrix T.
 *
 * Block-space column c addresses X column c for c < p and R column c - p
 * otherwise. Either block may be absent. All cross products are computed
 * once so that every per-response problem is a principal submatrix.
 */
class DesignBlocks {
public:
    DesignBlocks(const DenseMatrix* x, const DenseMatrix* r, const DenseMatrix& target)
        : x_(x), r_(r), t_(&target)
    {
        if (!x && !r) throw DimensionError("DesignBlocks: at least one block is required");
        if ((x && x->rows() != target.rows()) || (r && r->rows() != target.rows()))
            throw DimensionError("DesignBlocks: row counts differ");
        if (x) {
            xx_ = cross_product(*x, *x);
            xt_ = cross_product(*x, target);
            if (r) xr_ = cross_product(*x, *r);
        }
        if (r) {
            rr_ = cross_product(*r, *r);
            rt_ = cross_product(*r, target);
        }
        tt_.assign(target.cols(), 0.0);
        for (std::size_t i = 0; i < target.rows(); ++i) {
            auto row = target.row(i);
            for (std::size_t k = 0; k < target.cols(); ++k) tt_[k] += row[k] * row[k];
        }
    }

    std::size_t n() const noexcept { return t_->rows(); }
    std::size_t p() const noexcept { return x_ ? x_->cols() : 0; }
    std::size_t r_cols() const noexcept { return r_ ? r_->cols() : 0; }
    std::size_t width() const noexcept { return p() + r_cols(); }
    std::size_t targets() const noexcept { return t_->cols(); }

    double entry(std::size_t i, std::size_t c) const noexcept
    {
        return c < p() ? (*x_)(i, c) : (*r_)(i, c - p());
    }

    double cross(std::size_t a, std::size_t b) const noexcept
    {
        const std::size_t np = p();
        if (a < np && b < np) return xx_(a, b);
        if (a < np) return xr_(a, b - np);
        if (b < np) return xr_(b, a - np);
        return rr_(a - np, b - np);
    }

    double cross_target(std::size_t a, std::size_t k) const noexcept
    {
        return a < p() ? xt_(a, k) : rt_(a - p(), k);
    }

    double target_ss(std::size_t k) const noexcept { return tt_[k]; }
    double target(std::size_t i, std::size_t k) const noexcept { return (*t_)(i, k); }

    double rss(std::size_t k, std::span<const std::size_t> index, std::span<const double> value) const
    {
        double ss = 0.0;
        for (std::size_t i = 0; i < n(); ++i) {
            double r = target(i, k);
            for (std::size_t a = 0; a < index.size(); ++a) r -= entry(i, index[a]) * value[a];
            ss += r * r;
        }
        return ss;
    }

private:
    const DenseMatrix* x_;
    const DenseMatrix* r_;
    const DenseMatrix* t_;
    DenseMatrix xx_, xr_, rr_, xt_, rt_;
    std::vector<double> tt_;
};

/**
 * One target column regressed on a fixed subset of block columns with fixed
 * adaptive weights. The reduced Gram system is built once; solve() can then
 * be called for any (lambda1, lambda2) pair, where lambda1 scales X-block
 * columns and lambda2 scales R-block columns.
 */
class ResponseSolver {
public:
    ResponseSolver(const DesignBlocks& blocks, std::size_t target, std::vector<std::size_t> columns,
                   std::vector<double> weights)
        : blocks_(&blocks), target_(target), columns_(std::move(columns)), weights_(std::move(weights))
    {
        if (columns_.size() != weights_.size()) throw DimensionError("ResponseSolver: weights length mismatch");
        const std::size_t m = columns_.size();
        for (std::size_t a = 0; a < m; ++a) {
            if (!std::isfinite(weights_[a]) || weights_[a] < 0.0)
                throw ParameterError("ResponseSolver: weights must be finite and >= 0");
            if (a > 0 && columns_[a] <= columns_[a - 1])
                throw ParameterError("ResponseSolver: columns must be strictly increasing");
        }
        if (m > 0) gram_ = DenseMatrix(m, m);
        zty_.resize(m);
        for (std::size_t a = 0; a < m; ++a) {
            zty_[a] = blocks.cross_target(columns_[a], target);
            for (std::size_t b = 0; b < m; ++b) gram_(a, b) = blocks.cross(columns_[a], columns_[b]);
        }
        yty_ = blocks.target_ss(target);
    }

    const std::vector<std::size_t>& columns() const noexcept { return columns_; }
    std::size_t column_count() const noexcept { return columns_.size(); }
    std::size_t target() const noexcept { return target_; }

    SparseFit solve(double lambda1, double lambda2, const SolverConfig& cfg, const SparseFit* warm = nullptr) const
    {
        const std::size_t m = columns_.size();
        const std::size_t np = blocks_->p();
        std::vector<double> penalty(m);
        for (std::size_t a = 0; a < m; ++a) penalty[a] = (columns_[a] < np ? lambda1 : lambda2) * weights_[a];

        std::vector<double> start;
        if (warm && warm->df() > 0) {
            start.assign(m, 0.0);
            std::size_t a = 0;
            for (std::size_t w = 0; w < warm->df(); ++w) {
                while (a < m && columns_[a] < warm->index[w]) ++a;
                if (a < m && columns_[a] == warm->index[w]) start[a] = warm->value[w];
            }
        }

        const LassoSolution sol = solve_gram_lasso(gram_, zty_, yty_, penalty, cfg, start);
        SparseFit fit;
        fit.sweeps = sol.sweeps;
        for (std::size_t a = 0; a < m; ++a) {
            if (sol.coef[a] == 0.0) continue;
            fit.index.push_back(columns_[a]);
            fit.value.push_back(sol.coef[a]);
        }
        fit.rss = blocks_->rss(target_, fit.index, fit.value);
        return fit;
    }

private:
    const DesignBlocks* blocks_;
    std::size_t target_;
    std::vector<std::size_t> columns_;
    std::vector<double> weights_;
    DenseMatrix gram_;
    std::vector<double> zty_;
    double yty_ = 0.0;
};

}  // namespace mcreg
