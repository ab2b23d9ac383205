#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <mcreg/errors.hpp>
#include <mcreg/lasso.hpp>
#include <mcreg/linalg.hpp>
#include <mcreg/mcr.hpp>
#include <mcreg/parallel.hpp>
#include <mcreg/response_system.hpp>

namespace mcreg {

struct TuningGrid {
    std::vector<double> lambda1_values;
    std::vector<double> lambda2_values;

    void validate() const
    {
        for (const auto* axis : {&lambda1_values, &lambda2_values}) {
            if (axis->empty()) throw ParameterError("TuningGrid: empty axis");
            for (std::size_t i = 0; i < axis->size(); ++i) {
                if (!((*axis)[i] > 0.0) || !std::isfinite((*axis)[i]))
                    throw ParameterError("TuningGrid: values must be positive and finite");
                if (i > 0 && !((*axis)[i] > (*axis)[i - 1]))
                    throw ParameterError("TuningGrid: values must be strictly increasing");
            }
        }
    }
};

/// 10^(-3 + (s-1)/3) for s = 1..19, i.e. 1e-3 .. 1e3 in thirds of a decade.
inline std::vector<double> default_lambda_axis()
{
    std::vector<double> out;
    out.reserve(19);
    for (int s = 1; s <= 19; ++s) out.push_back(std::pow(10.0, static_cast<double>(s - 10) / 3.0));
    return out;
}

inline TuningGrid default_grid() { return {default_lambda_axis(), default_lambda_axis()}; }

/// n log(rss/n) + log(n) df; +inf when rss is not positive.
inline double bic_term(std::size_t n, double rss, std::size_t df) noexcept
{
    if (!(rss > 0.0)) return std::numeric_limits<double>::infinity();
    const double nn = static_cast<double>(n);
    return nn * std::log(rss / nn) + std::log(nn) * static_cast<double>(df);
}

/**
 * BIC of a joint fit recomputed from the full matrices:
 * sum_k n log(RSS_k / n) + log(n) df_k, where RSS_k is the residual of the
 * response-k conditional regression and df_k counts nonzeros in column k of
 * B and Gamma.
 */
inline double bic_score(const DenseMatrix& X, const DenseMatrix& Y, const CoefMatrix& B, const GammaMatrix& Gamma,
                        const InitialFit& init)
{
    const std::size_t n = X.rows(), p = X.cols(), q = Y.cols();
    if (Y.rows() != n || B.rows() != p || B.cols() != q || Gamma.q() != q || init.B0.rows() != p ||
        init.B0.cols() != q)
        throw DimensionError("bic_score: shape mismatch");
    const DenseMatrix resid0 = subtract(Y, multiply(X, init.B0.values));
    double total = 0.0;
    for (std::size_t k = 0; k < q; ++k) {
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double r = Y(i, k);
            for (std::size_t j = 0; j < p; ++j) r -= X(i, j) * B.values(j, k);
            for (std::size_t s = 0; s < q; ++s)
                if (s != k) r -= resid0(i, s) * Gamma(s, k);
            rss += r * r;
        }
        std::size_t df = 0;
        for (std::size_t j = 0; j < p; ++j) df += B.values(j, k) != 0.0;
        for (std::size_t s = 0; s < q; ++s) df += (s != k && Gamma(s, k) != 0.0);
        if (!(rss > 0.0)) throw DegenerateFitError("bic_score: zero residual for response " + std::to_string(k));
        total += bic_term(n, rss, df);
    }
    return total;
}

struct GridSearchResult {
    TuningGrid grid;
    DenseMatrix score_surface;  // [lambda1 index, lambda2 index]; +inf marks a degenerate cell
    std::size_t best_row = 0;
    std::size_t best_col = 0;
    double best_lambda1 = 0.0;
    double best_lambda2 = 0.0;
    std::vector<SparseFit> best_fits;               // per response
    std::vector<std::vector<SparseFit>> cell_fits;  // [response][row * cols + col]
};

/**
 * Exhaustive BIC search over a two-dimensional grid.
 *
 * `system` provides q(), n() and solver(k) returning an object with
 * solve(lambda1, lambda2, cfg, warm). For each response, cells are visited with
 * both penalties decreasing and each cell warm-starts from its neighbour with
 * the next larger lambda2 (or, for the first cell of a row, from the same
 * column of the previous row). Responses run in parallel; the surface is
 * summed in response order, so the result does not depend on `threads`.
 * Ties go to the lexicographically largest (lambda1, lambda2).
 */
template <class System>
GridSearchResult grid_search(const TuningGrid& grid, const System& system, const SolverConfig& cfg,
                             std::size_t threads = 1)
{
    grid.validate();
    const std::size_t rows = grid.lambda1_values.size(), cols = grid.lambda2_values.size();
    const std::size_t q = system.q(), n = system.n();

    GridSearchResult out;
    out.grid = grid;
    out.cell_fits.resize(q);
    parallel_for(q, threads, [&](std::size_t k) {
        try {
            const auto solver = system.solver(k);
            auto& fits = out.cell_fits[k];
            fits.resize(rows * cols);
            for (std::size_t r = rows; r-- > 0;) {
                for (std::size_t c = cols; c-- > 0;) {
                    const SparseFit* warm = nullptr;
                    if (c + 1 < cols) warm = &fits[r * cols + c + 1];
                    else if (r + 1 < rows) warm = &fits[(r + 1) * cols + c];
                    fits[r * cols + c] =
                        solver.solve(grid.lambda1_values[r], grid.lambda2_values[c], cfg, warm);
                }
            }
        } catch (const Error& e) {
            throw ResponseFitError("grid_search", k, e.what());
        }
    });

    out.score_surface = DenseMatrix(rows, cols);
    bool found = false;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            double score = 0.0;
            for (std::size_t k = 0; k < q; ++k) {
                const SparseFit& f = out.cell_fits[k][r * cols + c];
                score += bic_term(n, f.rss, f.df());
            }
            out.score_surface(r, c) = score;
            if (std::isfinite(score) && score <= best) {
                best = score;
                out.best_row = r;
                out.best_col = c;
                found = true;
            }
        }
    if (!found) throw TuningError("grid_search: every grid cell is degenerate");
    out.best_lambda1 = grid.lambda1_values[out.best_row];
    out.best_lambda2 = grid.lambda2_values[out.best_col];
    out.best_fits.reserve(q);
    for (std::size_t k = 0; k < q; ++k) out.best_fits.push_back(out.cell_fits[k][out.best_row * cols + out.best_col]);
    return out;
}

struct McrTuning {
    GridSearchResult search;
    McrFit fit;
};

inline McrTuning tune_mcr(const DenseMatrix& X, const DenseMatrix& Y, const InitialFit& init, const TuningGrid& grid,
                          const SolverConfig& cfg, std::size_t threads = 1)
{
    const McrSystem sys(X, Y, init);
    McrTuning out{grid_search(grid, sys, cfg, threads), {}};
    out.fit = sys.assemble(out.search.best_fits, out.search.best_lambda1, out.search.best_lambda2);
    return out;
}

/// One response fitted along a single decreasing penalty path.
struct PathResult {
    std::vector<double> lambdas;  // increasing
    std::vector<SparseFit> fits;  // aligned with lambdas; empty where not fitted
    std::vector<double> scores;   // BIC per lambda, +inf when degenerate or not fitted
    std::size_t stopped_at = 0;   // lambdas below index stopped_at were not fitted
    std::size_t best = 0;
};

namespace detail {

// argmin with ties resolved towards the larger lambda
inline std::size_t argmin_prefer_last(std::span<const double> scores)
{
    std::size_t best = scores.size();
    double value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < scores.size(); ++i)
        if (std::isfinite(scores[i]) && scores[i] <= value) {
            value = scores[i];
            best = i;
        }
    if (best == scores.size()) throw TuningError("every penalty level gives a degenerate fit");
    return best;
}

}  // namespace detail

/**
 * Fits `solver` at each lambda from largest to smallest with warm starts and
 * scores each fit by BIC.
 *
 * With at least n candidate columns the Lasso can interpolate and the BIC is
 * unbounded below as df approaches n. With `truncate` set the path then ends
 * at the first fit whose df exceeds n/2; that fit and every smaller lambda
 * score +inf.
 */
template <class Solver>
PathResult fit_path(const Solver& solver, std::span<const double> lambdas, std::size_t n, const SolverConfig& cfg,
                    bool truncate = true)
{
    PathResult out;
    out.lambdas.assign(lambdas.begin(), lambdas.end());
    out.fits.resize(lambdas.size());
    out.scores.assign(lambdas.size(), std::numeric_limits<double>::infinity());
    const bool saturable = truncate && solver.column_count() >= n;
    const SparseFit* warm = nullptr;
    for (std::size_t i = lambdas.size(); i-- > 0;) {
        out.fits[i] = solver.solve(lambdas[i], lambdas[i], cfg, warm);
        if (saturable && 2 * out.fits[i].df() > n) {
            out.fits[i] = SparseFit{};
            out.stopped_at = i + 1;
            break;
        }
        out.scores[i] = bic_term(n, out.fits[i].rss, out.fits[i].df());
        warm = &out.fits[i];
    }
    out.best = detail::argmin_prefer_last(out.scores);
    return out;
}

/// Index of the lambda minimizing the BIC summed over responses (ties -> larger lambda).
inline std::size_t select_shared_lambda(std::span<const PathResult> paths)
{
    if (paths.empty()) throw TuningError("select_shared_lambda: no responses");
    std::vector<double> total(paths.front().scores.size(), 0.0);
    for (const auto& p : paths)
        for (std::size_t i = 0; i < total.size(); ++i) total[i] += p.scores[i];
    return detail::argmin_prefer_last(total);
}

/// How the initializer's penalty is chosen along the 1-D grid.
enum class InitialTuning {
    Shared,       // one lambda per stage, minimizing the BIC summed over responses
    PerResponse,  // each response minimizes its own BIC
};

namespace detail {

// Fits every response along `lambdas`, picks the penalty per `mode` and
// scatters the chosen fits into `dest`; returns the chosen lambda per response.
template <class MakeSolver>
std::vector<double> tune_stage(std::size_t q, std::size_t n, std::span<const double> lambdas, const SolverConfig& cfg,
                               std::size_t threads, InitialTuning mode, MakeSolver make, DenseMatrix& dest)
{
    std::vector<PathResult> paths(q);
    parallel_for(q, threads, [&](std::size_t k) {
        try {
            paths[k] = fit_path(make(k), lambdas, n, cfg, lambdas.size() > 1);
        } catch (const Error& e) {
            throw ResponseFitError("initial", k, e.what());
        }
    });
    const std::size_t shared = mode == InitialTuning::Shared ? select_shared_lambda(paths) : 0;
    std::vector<double> chosen(q);
    for (std::size_t k = 0; k < q; ++k) {
        const std::size_t i = mode == InitialTuning::Shared ? shared : paths[k].best;
        scatter_coef(paths[k].fits[i], k, dest);
        chosen[k] = paths[k].lambdas[i];
    }
    return chosen;
}

}  // namespace detail

/**
 * Separate Lasso initializer with the penalty chosen by BIC over `lambdas`,
 * independently for the B0 stage and the Gamma0 stage.
 */
inline InitialFit tune_initial_separate(const DenseMatrix& X, const DenseMatrix& Y, std::span<const double> lambdas,
                                        const SolverConfig& cfg, std::size_t threads = 1,
                                        InitialTuning mode = InitialTuning::Shared,
                                        InitialGammaSource source = InitialGammaSource::Residuals)
{
    const InitialSystem sys(X, Y);
    const std::size_t p = sys.p(), q = sys.q(), n = sys.n();
    InitialFit init{{DenseMatrix(p, q)}, {DenseMatrix(q, q)}, {}, std::vector<double>(q)};
    init.lambda_B = detail::tune_stage(q, n, lambdas, cfg, threads, mode,
                                       [&](std::size_t k) { return sys.coef_solver(k); }, init.B0.values);
    if (q < 2) return init;
    const DenseMatrix G = sys.gamma_data(init.B0.values, source);
    const DesignBlocks blocks(nullptr, &G, G);
    init.lambda_Gamma = detail::tune_stage(q, n, lambdas, cfg, threads, mode,
                                           [&](std::size_t k) { return neighborhood_solver(blocks, k); },
                                           init.Gamma0.values);
    return init;
}

}  // namespace mcreg
