#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <span>
#include <vector>

#include <mcreg/dataset.hpp>
#include <mcreg/errors.hpp>
#include <mcreg/linalg.hpp>
#include <mcreg/mcr.hpp>
#include <mcreg/simgen.hpp>

namespace mcreg {

struct EstimationReport {
    double frob = 0.0;
    double one_norm = 0.0;  // max column absolute sum
    double inf_norm = 0.0;  // max row absolute sum
};

inline EstimationReport estimation_errors(const CoefMatrix& estimate, const CoefMatrix& truth)
{
    if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
        throw DimensionError("estimation_errors: shape mismatch");
    const DenseMatrix delta = subtract(estimate.values, truth.values);
    EstimationReport r;
    r.frob = frobenius_norm(delta);
    std::vector<double> col_sums(delta.cols(), 0.0);
    for (std::size_t i = 0; i < delta.rows(); ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < delta.cols(); ++j) {
            row_sum += std::abs(delta(i, j));
            col_sums[j] += std::abs(delta(i, j));
        }
        r.inf_norm = std::max(r.inf_norm, row_sum);
    }
    for (double c : col_sums) r.one_norm = std::max(r.one_norm, c);
    return r;
}

struct SelectionReport {
    double dist = 0.0;
    double spe = 1.0;
    double sen = 1.0;
    double mcc = 0.0;
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
};

namespace detail {

inline void finish_rates(SelectionReport& r)
{
    const double tp = static_cast<double>(r.tp), tn = static_cast<double>(r.tn);
    const double fp = static_cast<double>(r.fp), fn = static_cast<double>(r.fn);
    r.spe = (r.tn + r.fp) == 0 ? 1.0 : tn / (tn + fp);
    r.sen = (r.tp + r.fn) == 0 ? 1.0 : tp / (tp + fn);
    const double denom = (tp + fn) * (tn + fp) * (tp + fp) * (tn + fn);
    r.mcc = denom == 0.0 ? 0.0 : (tp * tn - fp * fn) / std::sqrt(denom);
}

inline std::vector<std::size_t> sorted_unique(std::span<const std::size_t> s)
{
    std::vector<std::size_t> v(s.begin(), s.end());
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace detail

/**
 * Confusion counts of an estimated support against the truth inside a
 * universe of `universe` candidate positions (flattened indices).
 * dist = (FP + FN) / universe. Degenerate denominators give Spe = 1,
 * Sen = 1 and Mcc = 0.
 */
inline SelectionReport selection_metrics(std::span<const std::size_t> estimated, std::span<const std::size_t> truth,
                                         std::size_t universe)
{
    if (universe == 0) throw ParameterError("selection_metrics: empty universe");
    const auto est = detail::sorted_unique(estimated);
    const auto tru = detail::sorted_unique(truth);
    if ((!est.empty() && est.back() >= universe) || (!tru.empty() && tru.back() >= universe))
        throw DimensionError("selection_metrics: index outside the universe");
    std::vector<std::size_t> both;
    std::set_intersection(est.begin(), est.end(), tru.begin(), tru.end(), std::back_inserter(both));
    SelectionReport r;
    r.tp = both.size();
    r.fp = est.size() - r.tp;
    r.fn = tru.size() - r.tp;
    r.tn = universe - r.tp - r.fp - r.fn;
    r.dist = static_cast<double>(r.fp + r.fn) / static_cast<double>(universe);
    detail::finish_rates(r);
    return r;
}

/// Support recovery of B over all p·q entries.
inline SelectionReport coefficient_selection(const CoefMatrix& estimate, const CoefMatrix& truth)
{
    if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
        throw DimensionError("coefficient_selection: shape mismatch");
    std::vector<std::size_t> est, tru;
    const std::size_t q = truth.cols();
    for (std::size_t j = 0; j < truth.rows(); ++j)
        for (std::size_t k = 0; k < q; ++k) {
            if (estimate.active(j, k)) est.push_back(j * q + k);
            if (truth.active(j, k)) tru.push_back(j * q + k);
        }
    return selection_metrics(est, tru, truth.rows() * q);
}

/**
 * Support recovery of the precision matrix. Both (s,k) and (k,s) are counted;
 * the diagonal is left out of the confusion counts, while dist keeps the q²
 * denominator.
 */
inline SelectionReport precision_selection(const PrecisionPattern& pattern, const DenseMatrix& omega_star)
{
    const std::size_t q = pattern.q();
    if (omega_star.rows() != q || omega_star.cols() != q) throw DimensionError("precision_selection: shape mismatch");
    SelectionReport r;
    for (std::size_t s = 0; s < q; ++s)
        for (std::size_t k = 0; k < q; ++k) {
            if (s == k) continue;
            const bool e = pattern.sign(s, k) != 0;
            const bool t = omega_star(s, k) != 0.0;
            r.tp += e && t;
            r.fp += e && !t;
            r.fn += !e && t;
            r.tn += !e && !t;
        }
    r.dist = static_cast<double>(r.fp + r.fn) / static_cast<double>(q * q);
    detail::finish_rates(r);
    return r;
}

/**
 * Mean squared prediction error per test observation. Test rows are raw
 * (uncentered); predictions are y_mean + (x - x_mean)ᵀB with the means taken
 * from the training set.
 */
inline double predictive_square_error(const CoefMatrix& B, std::span<const double> train_x_means,
                                      std::span<const double> train_y_means, const DenseMatrix& X_test,
                                      const DenseMatrix& Y_test)
{
    if (X_test.empty() || Y_test.empty()) throw DimensionError("predictive_square_error: empty test set");
    const std::size_t p = B.rows(), q = B.cols();
    if (X_test.rows() != Y_test.rows() || X_test.cols() != p || Y_test.cols() != q ||
        train_x_means.size() != p || train_y_means.size() != q)
        throw DimensionError("predictive_square_error: shape mismatch");
    double total = 0.0;
    std::vector<double> xc(p);
    for (std::size_t i = 0; i < X_test.rows(); ++i) {
        for (std::size_t j = 0; j < p; ++j) xc[j] = X_test(i, j) - train_x_means[j];
        for (std::size_t k = 0; k < q; ++k) {
            double pred = train_y_means[k];
            for (std::size_t j = 0; j < p; ++j) pred += xc[j] * B.values(j, k);
            const double r = Y_test(i, k) - pred;
            total += r * r;
        }
    }
    return total / static_cast<double>(X_test.rows());
}

inline double predictive_square_error(const CoefMatrix& B, const Dataset& train, const DenseMatrix& X_test,
                                      const DenseMatrix& Y_test)
{
    return predictive_square_error(B, train.x_means, train.y_means, X_test, Y_test);
}

/// sigma_kk - Sigma_{-k,k}ᵀ Sigma_{-k,-k}^{-1} Sigma_{-k,k}
inline double conditional_variance(const DenseMatrix& sigma, std::size_t k)
{
    const std::size_t q = sigma.rows();
    if (sigma.cols() != q || k >= q) throw DimensionError("conditional_variance: bad index");
    if (q == 1) return sigma(0, 0);
    const auto rest = detail::iota_except(q, k);
    const DenseMatrix l = cholesky_lower(principal_submatrix(sigma, rest));
    std::vector<double> c(rest.size());
    for (std::size_t a = 0; a < rest.size(); ++a) c[a] = sigma(rest[a], k);
    std::vector<double> sol = c;
    cholesky_solve_inplace(l, sol);
    double v = sigma(k, k);
    for (std::size_t a = 0; a < c.size(); ++a) v -= c[a] * sol[a];
    return v;
}

/// gamma*_sk = -omega_sk / omega_kk, zero diagonal.
inline GammaMatrix true_gamma(const DenseMatrix& omega)
{
    const std::size_t q = omega.rows();
    GammaMatrix g{DenseMatrix(q, q)};
    for (std::size_t s = 0; s < q; ++s)
        for (std::size_t k = 0; k < q; ++k)
            if (s != k) g.values(s, k) = -omega(s, k) / omega(k, k);
    return g;
}

/// Indices of the true nonzeros for response k: j for beta*_jk != 0, then p + s for gamma*_sk != 0.
inline std::vector<std::size_t> true_active_set(const GroundTruth& truth, std::size_t k)
{
    const std::size_t p = truth.B_star.rows(), q = truth.B_star.cols();
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < p; ++j)
        if (truth.B_star.active(j, k)) out.push_back(j);
    for (std::size_t s = 0; s < q; ++s)
        if (s != k && truth.Omega_star(s, k) != 0.0) out.push_back(p + s);
    return out;
}

/**
 * Asymptotic standard deviation s_k of alphaᵀ(zeta_hat - zeta*) on the true
 * active set A_k:  s_k² = sigma~*_kk alphaᵀ M_{A,A}^{-1} alpha  with
 * M = blockdiag(XᵀX / n, Sigma*).
 */
inline double asymptotic_se(const GroundTruth& truth, const DenseMatrix& X, std::size_t k, std::span<const double> alpha)
{
    const std::size_t n = X.rows(), p = X.cols();
    const auto active = true_active_set(truth, k);
    if (active.empty()) throw ParameterError("asymptotic_se: empty active set");
    if (alpha.size() != active.size()) throw DimensionError("asymptotic_se: alpha length != |A_k|");
    double norm = 0.0;
    for (double a : alpha) norm += a * a;
    if (std::abs(norm - 1.0) > 1e-9) throw ParameterError("asymptotic_se: alpha must have unit length");

    const std::size_t d = active.size();
    DenseMatrix m(d, d);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) {
            const std::size_t i = active[a], j = active[b];
            if (i < p && j < p) {
                double s = 0.0;
                for (std::size_t r = 0; r < n; ++r) s += X(r, i) * X(r, j);
                m(a, b) = s / static_cast<double>(n);
            } else if (i >= p && j >= p) {
                m(a, b) = truth.Sigma_star(i - p, j - p);
            }
        }
    DenseMatrix l;
    try {
        l = cholesky_lower(m);
    } catch (const NotPositiveDefiniteError&) {
        throw DegenerateFitError("asymptotic_se: singular principal submatrix");
    }
    std::vector<double> sol(alpha.begin(), alpha.end());
    cholesky_solve_inplace(l, sol);
    double quad = 0.0;
    for (std::size_t a = 0; a < d; ++a) quad += alpha[a] * sol[a];
    return std::sqrt(conditional_variance(truth.Sigma_star, k) * quad);
}

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against N(0,1) (asymptotic p-value with Stephens' correction).
inline KsResult ks_test_standard_normal(std::span<const double> samples)
{
    if (samples.empty()) throw ParameterError("ks_test_standard_normal: no samples");
    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double cdf = 0.5 * std::erfc(-x[i] / std::numbers::sqrt2);
        d = std::max({d, static_cast<double>(i + 1) / n - cdf, cdf - static_cast<double>(i) / n});
    }
    const double t = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
    double p = 0.0;
    if (t < 0.2) {
        p = 1.0;
    } else {
        for (int j = 1; j <= 100; ++j) {
            const double term = 2.0 * ((j % 2) ? 1.0 : -1.0) * std::exp(-2.0 * j * j * t * t);
            p += term;
            if (std::abs(term) < 1e-12) break;
        }
        p = std::clamp(p, 0.0, 1.0);
    }
    return {d, p};
}

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t count = 0;
};

/// Sample mean and standard error (sample stdev / sqrt(count)).
inline MeanStderr mean_stderr(std::span<const double> values)
{
    MeanStderr r;
    r.count = values.size();
    if (values.empty()) return r;
    double s = 0.0;
    for (double v : values) s += v;
    r.mean = s / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - r.mean) * (v - r.mean);
        r.stderr_ = std::sqrt(ss / static_cast<double>(values.size() - 1)) / std::sqrt(static_cast<double>(values.size()));
    }
    return r;
}

}  // namespace mcreg
