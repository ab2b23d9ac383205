#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <mcreg/errors.hpp>
#include <mcreg/linalg.hpp>

namespace mcreg {

// Objective convention used by every solver in this library:
//
//     ||y - Z b||_2^2 + lambda * sum_j w_j |b_j|
//
// with no 1/2 or 1/n factor. A weight of +inf removes the column entirely.

inline double soft_threshold(double z, double t) noexcept
{
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

struct SolverConfig {
    double tol = 1e-7;                // max |coordinate change| in a sweep
    std::size_t max_sweeps = 10000;
    double rel_objective_tol = 1e-10;
    double kkt_tol = 1e-6;            // stationarity must hold to this before returning
    bool standardize = false;         // rescale columns to squared norm n before solving

    void validate() const
    {
        if (!(tol > 0.0)) throw ParameterError("SolverConfig: tol must be > 0");
        if (max_sweeps < 1) throw ParameterError("SolverConfig: max_sweeps must be >= 1");
        if (!(rel_objective_tol >= 0.0)) throw ParameterError("SolverConfig: rel_objective_tol must be >= 0");
        if (!(kkt_tol > 0.0)) throw ParameterError("SolverConfig: kkt_tol must be > 0");
    }
};

/// Non-owning view of a weighted Lasso instance.
struct LassoProblem {
    const DenseMatrix& design;
    std::span<const double> response;
    std::span<const double> weights;
    double lambda = 0.0;

    std::size_t rows() const noexcept { return design.rows(); }
    std::size_t cols() const noexcept { return design.cols(); }

    void validate() const
    {
        if (design.rows() != response.size())
            throw DimensionError("LassoProblem: design rows != response length");
        if (design.cols() != weights.size())
            throw DimensionError("LassoProblem: weights length != design cols");
        if (!(lambda >= 0.0) || std::isinf(lambda)) throw ParameterError("LassoProblem: lambda must be finite and >= 0");
        for (double w : weights)
            if (!(w >= 0.0)) throw ParameterError("LassoProblem: weights must be >= 0");
    }
};

/**
 * Covariance-form Lasso: the design enters only through gram = ZᵀZ,
 * zty = Zᵀy and yty = yᵀy. penalty[j] is the already-multiplied lambda * w_j
 * and must be finite; excluded columns are simply left out of the problem.
 */
struct GramProblem {
    DenseMatrix gram;
    std::vector<double> zty;
    double yty = 0.0;
    std::vector<double> penalty;

    std::size_t size() const noexcept { return zty.size(); }
};

struct LassoSolution {
    std::vector<double> coef;
    double objective = 0.0;
    std::size_t sweeps = 0;
    double max_kkt_violation = 0.0;
};

namespace detail {

struct GramRef {
    const DenseMatrix& gram;
    std::span<const double> zty;
    double yty;
    std::span<const double> penalty;

    std::size_t size() const noexcept { return zty.size(); }
};

// Violation of the stationarity condition for one coordinate, where grad = Z_jᵀ(y - Z b).
inline double kkt_violation(double coef, double grad, double penalty) noexcept
{
    const double g = 2.0 * grad;
    if (coef > 0.0) return std::abs(g - penalty);
    if (coef < 0.0) return std::abs(g + penalty);
    return std::max(0.0, std::abs(g) - penalty);
}

inline void exact_gradient(const GramRef& prob, std::span<const double> b, std::span<double> grad)
{
    const std::size_t m = prob.size();
    for (std::size_t j = 0; j < m; ++j) {
        double g = prob.zty[j];
        auto row = prob.gram.row(j);
        for (std::size_t l = 0; l < m; ++l) g -= row[l] * b[l];
        grad[j] = g;
    }
}

inline double gram_objective(const GramRef& prob, std::span<const double> b, std::span<const double> grad)
{
    // ||y - Zb||^2 = yty - bᵀzty - bᵀgrad when grad = zty - G b
    double obj = prob.yty;
    for (std::size_t j = 0; j < prob.size(); ++j)
        obj += -b[j] * (prob.zty[j] + grad[j]) + prob.penalty[j] * std::abs(b[j]);
    return obj;
}

}  // namespace detail

/**
 * Cyclic coordinate descent on a covariance-form problem.
 *
 * Sweeps run in fixed column order. A sweep ends the iteration when the
 * largest coordinate move falls below cfg.tol or the relative objective
 * decrease falls below cfg.rel_objective_tol; the gradient is then recomputed
 * from scratch and the iteration only returns if every coordinate is
 * stationary to cfg.kkt_tol. Throws ConvergenceError otherwise.
 */
inline LassoSolution solve_gram_lasso(const DenseMatrix& gram, std::span<const double> zty, double yty,
                                      std::span<const double> penalty, const SolverConfig& cfg,
                                      std::span<const double> warm_start = {})
{
    cfg.validate();
    const std::size_t m = zty.size();
    if (penalty.size() != m) throw DimensionError("GramProblem: penalty length mismatch");
    if (m > 0 && (gram.rows() != m || gram.cols() != m))
        throw DimensionError("GramProblem: gram shape mismatch");
    const detail::GramRef prob{gram, zty, yty, penalty};
    if (!warm_start.empty() && warm_start.size() != m)
        throw DimensionError("solve_gram_lasso: warm start length mismatch");

    LassoSolution sol;
    sol.coef.assign(m, 0.0);
    if (m == 0) {
        sol.objective = prob.yty;
        return sol;
    }
    if (!warm_start.empty()) std::copy(warm_start.begin(), warm_start.end(), sol.coef.begin());
    auto& b = sol.coef;

    std::vector<double> grad(m);
    detail::exact_gradient(prob, b, grad);
    double obj = detail::gram_objective(prob, b, grad);

    double max_violation = std::numeric_limits<double>::infinity();
    for (std::size_t sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
        const double obj_before = obj;
        double max_change = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double gjj = prob.gram(j, j);
            const double old = b[j];
            double next = 0.0;
            if (gjj > 0.0) next = soft_threshold(grad[j] + gjj * old, 0.5 * prob.penalty[j]) / gjj;
            const double delta = next - old;
            if (delta == 0.0) continue;
            obj += gjj * delta * delta - 2.0 * delta * grad[j] +
                   prob.penalty[j] * (std::abs(next) - std::abs(old));
            b[j] = next;
            auto col = prob.gram.row(j);  // symmetric: row j == column j
            for (std::size_t l = 0; l < m; ++l) grad[l] -= col[l] * delta;
            max_change = std::max(max_change, std::abs(delta));
        }
        assert(obj <= obj_before + 1e-9 * (1.0 + std::abs(obj_before)));

        const bool small_step = max_change < cfg.tol;
        const bool small_gain = (obj_before - obj) <= cfg.rel_objective_tol * std::abs(obj_before);
        if (small_step || small_gain) {
            detail::exact_gradient(prob, b, grad);
            max_violation = 0.0;
            for (std::size_t j = 0; j < m; ++j)
                max_violation = std::max(max_violation, detail::kkt_violation(b[j], grad[j], prob.penalty[j]));
            obj = detail::gram_objective(prob, b, grad);
            if (max_violation <= cfg.kkt_tol) {
                sol.sweeps = sweep;
                sol.objective = obj;
                sol.max_kkt_violation = max_violation;
                return sol;
            }
        }
    }
    detail::exact_gradient(prob, b, grad);
    max_violation = 0.0;
    for (std::size_t j = 0; j < m; ++j)
        max_violation = std::max(max_violation, detail::kkt_violation(b[j], grad[j], prob.penalty[j]));
    throw ConvergenceError(std::move(sol.coef), max_violation, cfg.max_sweeps);
}

inline LassoSolution solve_gram_lasso(const GramProblem& prob, const SolverConfig& cfg,
                                      std::span<const double> warm_start = {})
{
    return solve_gram_lasso(prob.gram, prob.zty, prob.yty, prob.penalty, cfg, warm_start);
}

/**
 * Minimizes ||y - Zb||^2 + lambda * sum_j w_j |b_j| over b.
 *
 * Columns with infinite weight are excluded and come back as exact zeros.
 * With cfg.standardize the columns are scaled to squared norm n before the
 * penalty is applied, so the result then solves the rescaled problem.
 */
inline std::vector<double> solve_weighted_lasso(const LassoProblem& prob, const SolverConfig& cfg,
                                                std::optional<std::span<const double>> warm_start = std::nullopt)
{
    prob.validate();
    const std::size_t n = prob.rows();
    const std::size_t m = prob.cols();
    if (warm_start && warm_start->size() != m)
        throw DimensionError("solve_weighted_lasso: warm start length mismatch");

    std::vector<std::size_t> active;
    for (std::size_t j = 0; j < m; ++j)
        if (std::isfinite(prob.weights[j])) active.push_back(j);

    std::vector<double> scale(active.size(), 1.0);
    if (cfg.standardize) {
        for (std::size_t a = 0; a < active.size(); ++a) {
            double ss = 0.0;
            for (std::size_t i = 0; i < n; ++i) ss += prob.design(i, active[a]) * prob.design(i, active[a]);
            if (ss > 0.0) scale[a] = std::sqrt(static_cast<double>(n) / ss);
        }
    }

    GramProblem gp;
    const std::size_t k = active.size();
    if (k > 0) gp.gram = DenseMatrix(k, k);
    gp.zty.assign(k, 0.0);
    gp.penalty.assign(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double yi = prob.response[i];
        gp.yty += yi * yi;
        auto zi = prob.design.row(i);
        for (std::size_t a = 0; a < k; ++a) {
            const double za = zi[active[a]] * scale[a];
            gp.zty[a] += za * yi;
            for (std::size_t c = a; c < k; ++c) gp.gram(a, c) += za * zi[active[c]] * scale[c];
        }
    }
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t c = 0; c < a; ++c) gp.gram(a, c) = gp.gram(c, a);
        gp.penalty[a] = prob.lambda * prob.weights[active[a]];
    }

    std::vector<double> warm;
    if (warm_start) {
        warm.resize(k);
        for (std::size_t a = 0; a < k; ++a) warm[a] = (*warm_start)[active[a]] / scale[a];
    }

    std::vector<double> coef(m, 0.0);
    try {
        const LassoSolution sol = solve_gram_lasso(gp, cfg, warm);
        for (std::size_t a = 0; a < k; ++a) coef[active[a]] = sol.coef[a] * scale[a];
    } catch (const ConvergenceError& e) {
        for (std::size_t a = 0; a < k; ++a) coef[active[a]] = e.last_iterate()[a] * scale[a];
        throw ConvergenceError(std::move(coef), e.max_violation(), cfg.max_sweeps);
    }
    return coef;
}

inline std::vector<double> residual(const LassoProblem& prob, std::span<const double> coef)
{
    std::vector<double> r(prob.response.begin(), prob.response.end());
    for (std::size_t i = 0; i < prob.rows(); ++i) {
        auto zi = prob.design.row(i);
        double fit = 0.0;
        for (std::size_t j = 0; j < prob.cols(); ++j) fit += zi[j] * coef[j];
        r[i] -= fit;
    }
    return r;
}

inline double lasso_objective(const LassoProblem& prob, std::span<const double> coef)
{
    const auto r = residual(prob, coef);
    double obj = 0.0;
    for (double v : r) obj += v * v;
    for (std::size_t j = 0; j < prob.cols(); ++j) {
        if (coef[j] == 0.0) continue;
        if (!std::isfinite(prob.weights[j])) return std::numeric_limits<double>::infinity();
        obj += prob.lambda * prob.weights[j] * std::abs(coef[j]);
    }
    return obj;
}

struct KktViolation {
    std::size_t index;
    double magnitude;
};

/**
 * Checks the Lasso stationarity conditions directly against the design.
 *
 * For finite-weight j with g_j = 2 Z_jᵀ(y - Z coef):
 *   coef_j != 0  requires |g_j - lambda w_j sign(coef_j)| <= tol
 *   coef_j == 0  requires |g_j| <= lambda w_j + tol
 * Infinite-weight coordinates must be exactly zero.
 */
inline std::vector<KktViolation> kkt_check(const LassoProblem& prob, std::span<const double> coef, double tol)
{
    prob.validate();
    if (coef.size() != prob.cols()) throw DimensionError("kkt_check: coefficient length mismatch");
    const auto r = residual(prob, coef);
    std::vector<KktViolation> out;
    for (std::size_t j = 0; j < prob.cols(); ++j) {
        const double w = prob.weights[j];
        if (!std::isfinite(w)) {
            if (coef[j] != 0.0) out.push_back({j, std::numeric_limits<double>::infinity()});
            continue;
        }
        double zr = 0.0;
        for (std::size_t i = 0; i < prob.rows(); ++i) zr += prob.design(i, j) * r[i];
        const double v = detail::kkt_violation(coef[j], zr, prob.lambda * w);
        if (v > tol) out.push_back({j, v});
    }
    return out;
}

inline double max_kkt_violation(const LassoProblem& prob, std::span<const double> coef)
{
    double worst = 0.0;
    for (const auto& v : kkt_check(prob, coef, 0.0)) worst = std::max(worst, v.magnitude);
    return worst;
}

}  // namespace mcreg
