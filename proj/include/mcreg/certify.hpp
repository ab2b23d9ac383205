#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#include <mcreg/baselines.hpp>
#include <mcreg/lasso.hpp>
#include <mcreg/linalg.hpp>
#include <mcreg/mcr.hpp>

namespace mcreg {

// Largest KKT violation of any per-response problem behind a fit, checked
// against explicitly materialized designs rather than the Gram systems the
// solvers used.

inline double kkt_violation_initial(const DenseMatrix& X, const DenseMatrix& Y, const InitialFit& init,
                                    InitialGammaSource source = InitialGammaSource::Residuals)
{
    const std::size_t q = Y.cols();
    const DenseMatrix G = source == InitialGammaSource::Responses ? Y : subtract(Y, multiply(X, init.B0.values));
    double worst = 0.0;
    for (std::size_t k = 0; k < q; ++k) {
        const auto y = Y.col(k);
        const std::vector<double> w(X.cols(), 1.0);
        const auto b = init.B0.values.col(k);
        worst = std::max(worst, max_kkt_violation({X, y, w, init.lambda_B[k]}, b));
        if (q > 1) {
            DenseMatrix others(Y.rows(), q - 1);
            std::vector<double> g;
            for (std::size_t i = 0; i < Y.rows(); ++i) {
                std::size_t c = 0;
                for (std::size_t s = 0; s < q; ++s)
                    if (s != k) others(i, c++) = G(i, s);
            }
            for (std::size_t s = 0; s < q; ++s)
                if (s != k) g.push_back(init.Gamma0(s, k));
            const std::vector<double> wg(q - 1, 1.0);
            const auto t = G.col(k);
            worst = std::max(worst, max_kkt_violation({others, t, wg, init.lambda_Gamma[k]}, g));
        }
    }
    return worst;
}

inline double kkt_violation_mcr(const DenseMatrix& X, const DenseMatrix& Y, const InitialFit& init, const McrFit& fit)
{
    const std::size_t p = X.cols(), q = Y.cols();
    const AdaptiveWeights w = compute_adaptive_weights(init);
    double worst = 0.0;
    for (std::size_t k = 0; k < q; ++k) {
        const DenseMatrix z = build_augmented_design(X, Y, init.B0, k);
        const auto weights = augmented_penalty_weights(w, k, fit.lambda1, fit.lambda2);
        std::vector<double> coef;
        coef.reserve(p + q - 1);
        for (std::size_t j = 0; j < p; ++j) coef.push_back(fit.B.values(j, k));
        for (std::size_t s = 0; s < q; ++s)
            if (s != k) coef.push_back(fit.Gamma(s, k));
        const auto y = Y.col(k);
        worst = std::max(worst, max_kkt_violation({z, y, weights, 1.0}, coef));
    }
    return worst;
}

inline double kkt_violation_sep(const DenseMatrix& X, const DenseMatrix& Y, const SepFit& fit)
{
    const std::size_t q = Y.cols(), n = Y.rows();
    double worst = 0.0;
    const std::vector<double> w(X.cols(), 1.0);
    for (std::size_t k = 0; k < q; ++k) {
        const auto y = Y.col(k);
        const auto b = fit.B.values.col(k);
        worst = std::max(worst, max_kkt_violation({X, y, w, fit.lambda_B}, b));
    }
    if (q < 2) return worst;
    const DenseMatrix R = subtract(Y, multiply(X, fit.B.values));
    const std::vector<double> wg(q - 1, 1.0);
    for (std::size_t k = 0; k < q; ++k) {
        DenseMatrix others(n, q - 1);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t c = 0;
            for (std::size_t s = 0; s < q; ++s)
                if (s != k) others(i, c++) = R(i, s);
        }
        std::vector<double> g;
        for (std::size_t s = 0; s < q; ++s)
            if (s != k) g.push_back(fit.Gamma(s, k));
        const auto r = R.col(k);
        worst = std::max(worst, max_kkt_violation({others, r, wg, fit.lambda_Omega}, g));
    }
    return worst;
}

}  // namespace mcreg
