#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <mcreg/errors.hpp>
#include <mcreg/lasso.hpp>
#include <mcreg/linalg.hpp>
#include <mcreg/parallel.hpp>
#include <mcreg/response_system.hpp>

namespace mcreg {

/// p×q regression coefficients. The support is exactly the set of nonzero entries.
struct CoefMatrix {
    DenseMatrix values;

    std::size_t rows() const noexcept { return values.rows(); }
    std::size_t cols() const noexcept { return values.cols(); }
    bool active(std::size_t j, std::size_t k) const noexcept { return values(j, k) != 0.0; }

    std::size_t nnz() const noexcept
    {
        std::size_t c = 0;
        for (double v : values.data()) c += (v != 0.0);
        return c;
    }

    std::vector<std::pair<std::size_t, std::size_t>> support() const
    {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (std::size_t j = 0; j < rows(); ++j)
            for (std::size_t k = 0; k < cols(); ++k)
                if (active(j, k)) out.emplace_back(j, k);
        return out;
    }
};

/// q×q conditional-regression coefficients; entry (s, k) is the weight of
/// response s when regressing response k. The diagonal is always zero.
struct GammaMatrix {
    DenseMatrix values;

    std::size_t q() const noexcept { return values.rows(); }
    double operator()(std::size_t s, std::size_t k) const noexcept { return values(s, k); }
};

enum class PresenceRule { And, Or };
enum class SignPolicy { Magnitude, Strict };

struct Edge {
    std::size_t s;  // s < k
    std::size_t k;
    int sign;

    bool operator==(const Edge&) const = default;
};

/// Symmetric signed support of a precision matrix, diagonal fixed at +1.
class PrecisionPattern {
public:
    PrecisionPattern() = default;
    explicit PrecisionPattern(std::size_t q) : q_(q), signs_(q * q, 0)
    {
        for (std::size_t k = 0; k < q; ++k) signs_[k * q + k] = 1;
    }

    std::size_t q() const noexcept { return q_; }
    int sign(std::size_t s, std::size_t k) const noexcept { return signs_[s * q_ + k]; }

    void set_edge(std::size_t s, std::size_t k, int sign)
    {
        if (s == k) throw ParameterError("PrecisionPattern: diagonal entries are fixed");
        if (s >= q_ || k >= q_) throw DimensionError("PrecisionPattern: index out of range");
        const auto v = static_cast<std::int8_t>(sign > 0 ? 1 : (sign < 0 ? -1 : 0));
        signs_[s * q_ + k] = v;
        signs_[k * q_ + s] = v;
    }

    std::vector<Edge> edges() const
    {
        std::vector<Edge> out;
        for (std::size_t s = 0; s < q_; ++s)
            for (std::size_t k = s + 1; k < q_; ++k)
                if (int v = sign(s, k)) out.push_back({s, k, v});
        return out;
    }

    std::size_t edge_count() const { return edges().size(); }

    bool operator==(const PrecisionPattern& o) const { return q_ == o.q_ && signs_ == o.signs_; }

    std::optional<DenseMatrix> magnitudes;

private:
    std::size_t q_ = 0;
    std::vector<std::int8_t> signs_;
};

struct InitialFit {
    CoefMatrix B0;
    GammaMatrix Gamma0;
    std::vector<double> lambda_B;      // per response, stage regressing y^k on X
    std::vector<double> lambda_Gamma;  // per response, neighborhood stage
};

/// Adaptive weights 1/|initial estimate|; +inf marks an excluded coefficient.
struct AdaptiveWeights {
    std::size_t p = 0;
    std::size_t q = 0;
    std::vector<double> u;  // p×q row-major
    std::vector<double> v;  // q×q row-major, diagonal unused (+inf)

    double u_at(std::size_t j, std::size_t k) const noexcept { return u[j * q + k]; }
    double v_at(std::size_t s, std::size_t k) const noexcept { return v[s * q + k]; }
};

struct McrFit {
    CoefMatrix B;
    GammaMatrix Gamma;
    std::vector<double> residual_variances;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
};

namespace detail {

inline void require_same_rows(const DenseMatrix& X, const DenseMatrix& Y)
{
    if (X.rows() != Y.rows()) throw DimensionError("X and Y row counts differ");
}

inline std::vector<std::size_t> iota_except(std::size_t count, std::size_t skip, std::size_t offset = 0)
{
    std::vector<std::size_t> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        if (i != skip) out.push_back(i + offset);
    return out;
}

}  // namespace detail

/// Which columns the initial neighborhood regressions use.
enum class InitialGammaSource {
    Residuals,  // r^k on R^{-k} with R = Y - X·B0
    Responses,  // y^k on Y^{-k}
};

inline ResponseSolver neighborhood_solver(const DesignBlocks& blocks, std::size_t k)
{
    auto cols = detail::iota_except(blocks.r_cols(), k);
    std::vector<double> w(cols.size(), 1.0);
    return {blocks, k, std::move(cols), std::move(w)};
}

/**
 * Per-response solvers for the separate (unweighted) initial stage:
 * y^k on X for B0, then a neighborhood regression for Gamma0 whose blocks
 * are built by gamma_blocks() once B0 is known.
 */
class InitialSystem {
public:
    InitialSystem(const DenseMatrix& X, const DenseMatrix& Y)
        : X_(&X), Y_(&Y), p_(X.cols()), q_(Y.cols()), coef_blocks_(&X, nullptr, Y)
    {
        detail::require_same_rows(X, Y);
    }

    std::size_t p() const noexcept { return p_; }
    std::size_t q() const noexcept { return q_; }
    std::size_t n() const noexcept { return coef_blocks_.n(); }

    ResponseSolver coef_solver(std::size_t k) const
    {
        return {coef_blocks_, k, detail::iota_except(p_, p_), std::vector<double>(p_, 1.0)};
    }

    /// Matrix whose columns are regressed on each other for Gamma0.
    DenseMatrix gamma_data(const DenseMatrix& B0, InitialGammaSource source) const
    {
        if (source == InitialGammaSource::Responses) return *Y_;
        return subtract(*Y_, multiply(*X_, B0));
    }

private:
    const DenseMatrix* X_;
    const DenseMatrix* Y_;
    std::size_t p_, q_;
    DesignBlocks coef_blocks_;
};

// Writes a coefficient-stage fit (block space = X columns) into column k of B.
inline void scatter_coef(const SparseFit& fit, std::size_t k, DenseMatrix& B)
{
    for (std::size_t a = 0; a < fit.df(); ++a) B(fit.index[a], k) = fit.value[a];
}

// Writes a fit whose block space is [X | R] into B(:,k) and Gamma(:,k).
inline void scatter_joint(const SparseFit& fit, std::size_t p, std::size_t k, DenseMatrix& B, DenseMatrix& Gamma)
{
    for (std::size_t a = 0; a < fit.df(); ++a) {
        const std::size_t c = fit.index[a];
        if (c < p) B(c, k) = fit.value[a];
        else Gamma(c - p, k) = fit.value[a];
    }
}

/**
 * Separate Lasso initializer at a single penalty level: column k of B0 is the
 * Lasso of y^k on X; column k of Gamma0 is the Lasso neighborhood regression
 * of response k on the others, on residuals Y - X·B0 by default.
 */
inline InitialFit fit_initial_separate(const DenseMatrix& X, const DenseMatrix& Y, double lambda_init,
                                       const SolverConfig& cfg, std::size_t threads = 1,
                                       InitialGammaSource source = InitialGammaSource::Residuals)
{
    if (!(lambda_init >= 0.0)) throw ParameterError("fit_initial_separate: lambda must be >= 0");
    const InitialSystem sys(X, Y);
    const std::size_t p = sys.p(), q = sys.q();
    InitialFit init{{DenseMatrix(p, q)}, {DenseMatrix(q, q)}, std::vector<double>(q, lambda_init),
                    std::vector<double>(q, lambda_init)};
    std::vector<SparseFit> fits(q);
    parallel_for(q, threads, [&](std::size_t k) {
        try {
            fits[k] = sys.coef_solver(k).solve(lambda_init, lambda_init, cfg);
        } catch (const Error& e) {
            throw ResponseFitError("initial", k, e.what());
        }
    });
    for (std::size_t k = 0; k < q; ++k) scatter_coef(fits[k], k, init.B0.values);
    if (q < 2) return init;

    const DenseMatrix G = sys.gamma_data(init.B0.values, source);
    const DesignBlocks blocks(nullptr, &G, G);
    parallel_for(q, threads, [&](std::size_t k) {
        try {
            fits[k] = neighborhood_solver(blocks, k).solve(lambda_init, lambda_init, cfg);
        } catch (const Error& e) {
            throw ResponseFitError("initial", k, e.what());
        }
    });
    for (std::size_t k = 0; k < q; ++k) scatter_coef(fits[k], k, init.Gamma0.values);
    return init;
}

inline AdaptiveWeights compute_adaptive_weights(const InitialFit& init)
{
    const std::size_t p = init.B0.rows(), q = init.B0.cols();
    if (init.Gamma0.q() != q) throw DimensionError("compute_adaptive_weights: Gamma0 is not q×q");
    constexpr double inf = std::numeric_limits<double>::infinity();
    AdaptiveWeights w{p, q, std::vector<double>(p * q), std::vector<double>(q * q)};
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t k = 0; k < q; ++k) {
            const double b = init.B0.values(j, k);
            w.u[j * q + k] = b == 0.0 ? inf : 1.0 / std::abs(b);
        }
    for (std::size_t s = 0; s < q; ++s)
        for (std::size_t k = 0; k < q; ++k) {
            const double g = init.Gamma0.values(s, k);
            w.v[s * q + k] = (s == k || g == 0.0) ? inf : 1.0 / std::abs(g);
        }
    return w;
}

/// Z = [X | Y^{-k} - X·B0_{-k}]; responses in the right block keep their order with k skipped.
inline DenseMatrix build_augmented_design(const DenseMatrix& X, const DenseMatrix& Y, const CoefMatrix& B0,
                                          std::size_t k)
{
    detail::require_same_rows(X, Y);
    const std::size_t n = X.rows(), p = X.cols(), q = Y.cols();
    if (B0.rows() != p || B0.cols() != q) throw DimensionError("build_augmented_design: B0 shape mismatch");
    if (k >= q) throw DimensionError("build_augmented_design: response index out of range");
    if (p + q - 1 == 0) throw DimensionError("build_augmented_design: empty design");
    const DenseMatrix fitted = multiply(X, B0.values);
    DenseMatrix Z(n, p + q - 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) Z(i, j) = X(i, j);
        std::size_t c = p;
        for (std::size_t s = 0; s < q; ++s) {
            if (s == k) continue;
            Z(i, c++) = Y(i, s) - fitted(i, s);
        }
    }
    return Z;
}

/// Per-column penalty weights for the response-k problem on build_augmented_design's columns,
/// with lambda1 and lambda2 folded in (use lambda = 1 in the LassoProblem).
inline std::vector<double> augmented_penalty_weights(const AdaptiveWeights& w, std::size_t k, double lambda1,
                                                     double lambda2)
{
    std::vector<double> out;
    out.reserve(w.p + w.q - 1);
    for (std::size_t j = 0; j < w.p; ++j) {
        const double u = w.u_at(j, k);
        out.push_back(std::isfinite(u) ? lambda1 * u : u);
    }
    for (std::size_t s = 0; s < w.q; ++s) {
        if (s == k) continue;
        const double v = w.v_at(s, k);
        out.push_back(std::isfinite(v) ? lambda2 * v : v);
    }
    return out;
}

/**
 * Shared state for the joint per-response regressions: y^k on X and on the
 * residualized other responses Y^{-k} - X·B0_{-k}, with adaptive weights.
 */
class McrSystem {
public:
    McrSystem(const DenseMatrix& X, const DenseMatrix& Y, const InitialFit& init)
        : p_(X.cols()), q_(Y.cols()), weights_(compute_adaptive_weights(init)),
          residual_(check_and_residualize(X, Y, init)), blocks_(&X, &residual_, Y)
    {
    }

    std::size_t p() const noexcept { return p_; }
    std::size_t q() const noexcept { return q_; }
    std::size_t n() const noexcept { return blocks_.n(); }
    const AdaptiveWeights& weights() const noexcept { return weights_; }
    const DesignBlocks& blocks() const noexcept { return blocks_; }

    ResponseSolver solver(std::size_t k) const
    {
        std::vector<std::size_t> cols;
        std::vector<double> w;
        for (std::size_t j = 0; j < p_; ++j) {
            const double u = weights_.u_at(j, k);
            if (std::isfinite(u)) {
                cols.push_back(j);
                w.push_back(u);
            }
        }
        for (std::size_t s = 0; s < q_; ++s) {
            const double v = weights_.v_at(s, k);
            if (s != k && std::isfinite(v)) {
                cols.push_back(p_ + s);
                w.push_back(v);
            }
        }
        return {blocks_, k, std::move(cols), std::move(w)};
    }

    McrFit assemble(std::span<const SparseFit> fits, double lambda1, double lambda2) const
    {
        McrFit out{{DenseMatrix(p_, q_)}, {DenseMatrix(q_, q_)}, std::vector<double>(q_), lambda1, lambda2};
        for (std::size_t k = 0; k < q_; ++k) {
            scatter_joint(fits[k], p_, k, out.B.values, out.Gamma.values);
            out.residual_variances[k] = fits[k].rss / static_cast<double>(n());
        }
        return out;
    }

private:
    static DenseMatrix check_and_residualize(const DenseMatrix& X, const DenseMatrix& Y, const InitialFit& init)
    {
        detail::require_same_rows(X, Y);
        if (init.B0.rows() != X.cols() || init.B0.cols() != Y.cols() || init.Gamma0.q() != Y.cols())
            throw DimensionError("McrSystem: initial fit does not match the data");
        return subtract(Y, multiply(X, init.B0.values));
    }

    std::size_t p_, q_;
    AdaptiveWeights weights_;
    DenseMatrix residual_;
    DesignBlocks blocks_;
};

/**
 * Joint fit at fixed (lambda1, lambda2). For each response k, solves
 *
 *   min ||y^k - X b_k - (Y^{-k} - X B0_{-k}) g_k||^2
 *       + lambda1 sum_j u_jk |b_jk| + lambda2 sum_{s != k} v_sk |g_sk|
 *
 * The q problems are independent; output does not depend on `threads`.
 */
inline McrFit fit_mcr(const DenseMatrix& X, const DenseMatrix& Y, double lambda1, double lambda2,
                      const InitialFit& init, const SolverConfig& cfg, std::size_t threads = 1)
{
    if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw ParameterError("fit_mcr: lambdas must be >= 0");
    const McrSystem sys(X, Y, init);
    std::vector<SparseFit> fits(sys.q());
    parallel_for(sys.q(), threads, [&](std::size_t k) {
        try {
            fits[k] = sys.solver(k).solve(lambda1, lambda2, cfg);
        } catch (const Error& e) {
            throw ResponseFitError("mcr", k, e.what());
        }
    });
    return sys.assemble(fits, lambda1, lambda2);
}

/**
 * Symmetric signed edge pattern from neighborhood coefficients.
 *
 * Or: edge (s,k) iff gamma_sk != 0 or gamma_ks != 0. And: iff both are nonzero.
 * The edge sign is -sign(gamma); when both are nonzero with opposite signs the
 * larger magnitude wins (ties go to gamma_sk with s < k), or SignConflictError
 * is thrown under SignPolicy::Strict.
 */
inline PrecisionPattern symmetrize_pattern(const GammaMatrix& gamma, PresenceRule rule,
                                           SignPolicy policy = SignPolicy::Magnitude)
{
    const std::size_t q = gamma.q();
    PrecisionPattern out(q);
    std::vector<std::pair<std::size_t, std::size_t>> conflicts;
    for (std::size_t s = 0; s < q; ++s)
        for (std::size_t k = s + 1; k < q; ++k) {
            const double a = gamma(s, k), b = gamma(k, s);
            const bool present = rule == PresenceRule::Or ? (a != 0.0 || b != 0.0) : (a != 0.0 && b != 0.0);
            if (!present) continue;
            double pick = a != 0.0 ? a : b;
            if (a != 0.0 && b != 0.0 && (a > 0.0) != (b > 0.0)) {
                if (policy == SignPolicy::Strict) {
                    conflicts.emplace_back(s, k);
                    continue;
                }
                pick = std::abs(b) > std::abs(a) ? b : a;
            }
            out.set_edge(s, k, pick > 0.0 ? -1 : 1);
        }
    if (!conflicts.empty()) throw SignConflictError(std::move(conflicts));
    return out;
}

/**
 * Precision magnitudes implied by the conditional regressions:
 * omega_kk = 1/residual_variance_k, omega_sk = -gamma_sk * omega_kk, averaged
 * across (s,k)/(k,s) and zeroed off the pattern.
 */
inline DenseMatrix reconstruct_precision(const GammaMatrix& gamma, std::span<const double> residual_variances,
                                         const PrecisionPattern& pattern)
{
    const std::size_t q = gamma.q();
    if (residual_variances.size() != q || pattern.q() != q)
        throw DimensionError("reconstruct_precision: size mismatch");
    for (std::size_t k = 0; k < q; ++k)
        if (!(residual_variances[k] > 0.0))
            throw DegenerateFitError("reconstruct_precision: residual variance of response " + std::to_string(k) +
                                     " is not positive");
    DenseMatrix omega(q, q);
    for (std::size_t k = 0; k < q; ++k) omega(k, k) = 1.0 / residual_variances[k];
    for (std::size_t s = 0; s < q; ++s)
        for (std::size_t k = s + 1; k < q; ++k) {
            if (pattern.sign(s, k) == 0) continue;
            const double raw_sk = -gamma(s, k) * omega(k, k);
            const double raw_ks = -gamma(k, s) * omega(s, s);
            const double v = 0.5 * (raw_sk + raw_ks);
            omega(s, k) = v;
            omega(k, s) = v;
        }
    return omega;
}

}  // namespace mcreg
