#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <mcreg/errors.hpp>
#include <mcreg/lasso.hpp>
#include <mcreg/linalg.hpp>
#include <mcreg/mcr.hpp>
#include <mcreg/parallel.hpp>
#include <mcreg/response_system.hpp>
#include <mcreg/tuning.hpp>

namespace mcreg {

/// Separate estimation: plain Lasso per response for B, then neighborhood
/// selection on the residuals for the precision pattern.
struct SepFit {
    CoefMatrix B;
    GammaMatrix Gamma;  // neighborhood coefficients of residual r^s in the regression of r^k
    PrecisionPattern pattern;
    std::vector<double> residual_variances;  // of the neighborhood regressions
    double lambda_B = 0.0;
    double lambda_Omega = 0.0;
    std::vector<double> bic_B;      // per candidate lambda when tuned
    std::vector<double> bic_Omega;
};

namespace detail {

// Runs fit_path for every response on the given lambdas and keeps the shared BIC minimizer.
template <class MakeSolver>
std::pair<std::vector<SparseFit>, std::vector<double>> shared_path(std::size_t q, std::size_t n,
                                                                   std::span<const double> lambdas,
                                                                   const SolverConfig& cfg, std::size_t threads,
                                                                   const char* stage, MakeSolver&& make,
                                                                   std::size_t& chosen)
{
    std::vector<PathResult> paths(q);
    parallel_for(q, threads, [&](std::size_t k) {
        try {
            paths[k] = fit_path(make(k), lambdas, n, cfg, lambdas.size() > 1);
        } catch (const Error& e) {
            throw ResponseFitError(stage, k, e.what());
        }
    });
    chosen = select_shared_lambda(paths);
    std::vector<SparseFit> fits;
    std::vector<double> totals(lambdas.size(), 0.0);
    for (auto& p : paths) {
        fits.push_back(std::move(p.fits[chosen]));
        for (std::size_t i = 0; i < totals.size(); ++i) totals[i] += p.scores[i];
    }
    return {std::move(fits), std::move(totals)};
}

}  // namespace detail

/**
 * SEP baseline with the penalty of each stage picked from `lambdas_B` /
 * `lambdas_Omega` by BIC summed over responses. A single-element list fixes
 * the penalty.
 *
 * The B stage for response k reads only X and y^k.
 */
inline SepFit tune_sep(const DenseMatrix& X, const DenseMatrix& Y, std::span<const double> lambdas_B,
                       std::span<const double> lambdas_Omega, const SolverConfig& cfg, PresenceRule rule,
                       std::size_t threads = 1)
{
    const InitialSystem coef_sys(X, Y);
    const std::size_t n = X.rows(), p = X.cols(), q = Y.cols();

    SepFit out;
    std::size_t ib = 0;
    auto [coef_fits, bic_B] = detail::shared_path(q, n, lambdas_B, cfg, threads, "sep-B",
                                                  [&](std::size_t k) { return coef_sys.coef_solver(k); }, ib);
    out.B = {DenseMatrix(p, q)};
    for (std::size_t k = 0; k < q; ++k) scatter_coef(coef_fits[k], k, out.B.values);
    out.lambda_B = lambdas_B[ib];
    out.bic_B = std::move(bic_B);

    const DenseMatrix R = subtract(Y, multiply(X, out.B.values));
    out.Gamma = {DenseMatrix(q, q)};
    out.residual_variances.assign(q, 0.0);
    if (q > 1) {
        const DesignBlocks blocks(nullptr, &R, R);
        std::size_t io = 0;
        auto [nb_fits, bic_O] = detail::shared_path(q, n, lambdas_Omega, cfg, threads, "sep-Omega",
                                                    [&](std::size_t k) { return neighborhood_solver(blocks, k); }, io);
        for (std::size_t k = 0; k < q; ++k) {
            scatter_coef(nb_fits[k], k, out.Gamma.values);
            out.residual_variances[k] = nb_fits[k].rss / static_cast<double>(n);
        }
        out.lambda_Omega = lambdas_Omega[io];
        out.bic_Omega = std::move(bic_O);
    } else {
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) ss += R(i, 0) * R(i, 0);
        out.residual_variances[0] = ss / static_cast<double>(n);
        out.lambda_Omega = lambdas_Omega.empty() ? 0.0 : lambdas_Omega.front();
    }
    out.pattern = symmetrize_pattern(out.Gamma, rule);
    return out;
}

inline SepFit fit_sep(const DenseMatrix& X, const DenseMatrix& Y, double lambda_B, double lambda_Omega,
                      const SolverConfig& cfg, PresenceRule rule, std::size_t threads = 1)
{
    if (!(lambda_B >= 0.0) || !(lambda_Omega >= 0.0)) throw ParameterError("fit_sep: lambdas must be >= 0");
    const double lb[] = {lambda_B};
    const double lo[] = {lambda_Omega};
    return tune_sep(X, Y, lb, lo, cfg, rule, threads);
}

}  // namespace mcreg
