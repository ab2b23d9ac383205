#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <mcreg/mcreg.hpp>

#include "oracles.hpp"

using namespace mcreg;

namespace {

struct SmallData {
    DenseMatrix X;
    DenseMatrix Y;
};

// Correlated two-response data with p covariates.
SmallData small_data(std::size_t n, std::size_t p, std::size_t q, std::uint64_t seed)
{
    ModelSpec spec{p, q, n, std::min(1.5, static_cast<double>(p)), std::min(1.0, static_cast<double>(q)), seed};
    const auto sim = gen_dataset(spec);
    return {sim.data.X, sim.data.Y};
}

InitialFit fixed_initial(const DenseMatrix& X, const DenseMatrix& Y)
{
    return fit_initial_separate(X, Y, 5.0, SolverConfig{});
}

}  // namespace

TEST(Mcr, MatchesBruteForceForTwoByTwo)
{
    std::size_t nonzero_gamma = 0, nonzero_b = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto d = small_data(100, 2, 2, seed);
        const InitialFit init = fixed_initial(d.X, d.Y);
        const double l1 = 2.0 + static_cast<double>(seed % 5), l2 = 1.0 + static_cast<double>(seed % 3);
        const McrFit fit = fit_mcr(d.X, d.Y, l1, l2, init, SolverConfig{});
        for (std::size_t k = 0; k < 2; ++k) {
            const std::size_t o = 1 - k;
            oracle::Mat z(100, std::vector<double>(3));
            std::vector<double> y(100);
            for (std::size_t i = 0; i < 100; ++i) {
                z[i][0] = d.X(i, 0);
                z[i][1] = d.X(i, 1);
                z[i][2] = d.Y(i, o) - d.X(i, 0) * init.B0.values(0, o) - d.X(i, 1) * init.B0.values(1, o);
                y[i] = d.Y(i, k);
            }
            const auto inv = [](double v) { return v == 0.0 ? INFINITY : 1.0 / std::abs(v); };
            const std::vector<double> w{l1 * inv(init.B0.values(0, k)), l1 * inv(init.B0.values(1, k)),
                                        l2 * inv(init.Gamma0(o, k))};
            const auto ref = oracle::brute_force_lasso(z, y, w, 1.0);
            EXPECT_NEAR(fit.B.values(0, k), ref[0], 1e-5) << "seed " << seed;
            EXPECT_NEAR(fit.B.values(1, k), ref[1], 1e-5) << "seed " << seed;
            EXPECT_NEAR(fit.Gamma(o, k), ref[2], 1e-5) << "seed " << seed;
            EXPECT_EQ(fit.Gamma(k, k), 0.0);
            nonzero_gamma += ref[2] != 0.0;
            nonzero_b += (ref[0] != 0.0) + (ref[1] != 0.0);
        }
    }
    EXPECT_GT(nonzero_gamma, 10u);
    EXPECT_GT(nonzero_b, 10u);
}

TEST(Mcr, AugmentedDesignLayout)
{
    const DenseMatrix X{{1, 0}, {0, 1}, {1, 1}};
    const DenseMatrix Y{{1, 2, 3}, {4, 5, 6}, {7, 8, 9}};
    const CoefMatrix B0{DenseMatrix{{1, 0, 2}, {0, 1, 0}}};
    const DenseMatrix z = build_augmented_design(X, Y, B0, 1);
    ASSERT_EQ(z.cols(), 4u);
    // row 2: x = (1,1); fitted = (1, 1, 2); residual cols 0 and 2 = (7-1, 9-2)
    EXPECT_EQ(z.row(2)[0], 1.0);
    EXPECT_EQ(z.row(2)[1], 1.0);
    EXPECT_EQ(z.row(2)[2], 6.0);
    EXPECT_EQ(z.row(2)[3], 7.0);
    EXPECT_EQ(z(0, 3), 3.0 - 2.0);
    EXPECT_THROW(build_augmented_design(X, Y, B0, 3), DimensionError);
}

TEST(Mcr, AdaptiveWeightsAndPenaltyFolding)
{
    InitialFit init{{DenseMatrix{{0.5, 0.0}, {-2.0, 1.0}}}, {DenseMatrix{{0.0, 0.25}, {0.0, 0.0}}}, {1, 1}, {1, 1}};
    const auto w = compute_adaptive_weights(init);
    EXPECT_EQ(w.u_at(0, 0), 2.0);
    EXPECT_TRUE(std::isinf(w.u_at(0, 1)));
    EXPECT_EQ(w.u_at(1, 0), 0.5);
    EXPECT_EQ(w.v_at(0, 1), 4.0);
    EXPECT_TRUE(std::isinf(w.v_at(1, 0)));
    EXPECT_TRUE(std::isinf(w.v_at(0, 0)));
    const auto pw = augmented_penalty_weights(w, 1, 3.0, 10.0);
    ASSERT_EQ(pw.size(), 3u);
    EXPECT_TRUE(std::isinf(pw[0]));
    EXPECT_EQ(pw[1], 3.0);
    EXPECT_EQ(pw[2], 40.0);
}

TEST(Mcr, ZeroInitialEntriesStayZero)
{
    const auto d = small_data(120, 6, 4, 3);
    const InitialFit init = fit_initial_separate(d.X, d.Y, 30.0, SolverConfig{});
    const McrFit fit = fit_mcr(d.X, d.Y, 0.01, 0.01, init, SolverConfig{});
    for (std::size_t j = 0; j < 6; ++j)
        for (std::size_t k = 0; k < 4; ++k)
            if (init.B0.values(j, k) == 0.0) EXPECT_EQ(fit.B.values(j, k), 0.0);
    for (std::size_t s = 0; s < 4; ++s)
        for (std::size_t k = 0; k < 4; ++k)
            if (init.Gamma0(s, k) == 0.0) EXPECT_EQ(fit.Gamma(s, k), 0.0);
}

TEST(Mcr, SolutionsSatisfyKkt)
{
    const auto d = small_data(150, 8, 6, 5);
    const InitialFit init = fixed_initial(d.X, d.Y);
    EXPECT_LE(kkt_violation_initial(d.X, d.Y, init), 1e-5);
    const McrFit fit = fit_mcr(d.X, d.Y, 1.0, 0.5, init, SolverConfig{});
    EXPECT_LE(kkt_violation_mcr(d.X, d.Y, init, fit), 1e-5);
}

TEST(Mcr, ResidualVarianceIsRssOverN)
{
    const auto d = small_data(80, 3, 3, 9);
    const InitialFit init = fixed_initial(d.X, d.Y);
    const McrFit fit = fit_mcr(d.X, d.Y, 1.0, 1.0, init, SolverConfig{});
    const DenseMatrix r0 = subtract(d.Y, multiply(d.X, init.B0.values));
    for (std::size_t k = 0; k < 3; ++k) {
        double rss = 0.0;
        for (std::size_t i = 0; i < 80; ++i) {
            double r = d.Y(i, k);
            for (std::size_t j = 0; j < 3; ++j) r -= d.X(i, j) * fit.B.values(j, k);
            for (std::size_t s = 0; s < 3; ++s)
                if (s != k) r -= r0(i, s) * fit.Gamma(s, k);
            rss += r * r;
        }
        EXPECT_NEAR(fit.residual_variances[k], rss / 80.0, 1e-8);
    }
}

TEST(Mcr, ThreadCountDoesNotChangeResult)
{
    const auto d = small_data(100, 10, 12, 4);
    const InitialFit a = fit_initial_separate(d.X, d.Y, 3.0, SolverConfig{}, 1);
    const InitialFit b = fit_initial_separate(d.X, d.Y, 3.0, SolverConfig{}, 8);
    EXPECT_EQ(a.B0.values, b.B0.values);
    EXPECT_EQ(a.Gamma0.values, b.Gamma0.values);
    const McrFit f1 = fit_mcr(d.X, d.Y, 0.5, 0.5, a, SolverConfig{}, 1);
    const McrFit f8 = fit_mcr(d.X, d.Y, 0.5, 0.5, a, SolverConfig{}, 8);
    EXPECT_EQ(f1.B.values, f8.B.values);
    EXPECT_EQ(f1.Gamma.values, f8.Gamma.values);
    EXPECT_EQ(f1.residual_variances, f8.residual_variances);
}

TEST(Mcr, RejectsBadInput)
{
    const auto d = small_data(30, 2, 2, 1);
    const InitialFit init = fixed_initial(d.X, d.Y);
    EXPECT_THROW(fit_mcr(d.X, d.Y, -1.0, 1.0, init, SolverConfig{}), ParameterError);
    const DenseMatrix Xshort(29, 2);
    EXPECT_THROW(fit_mcr(Xshort, d.Y, 1.0, 1.0, init, SolverConfig{}), DimensionError);
    const DenseMatrix X3(30, 3);
    EXPECT_THROW(fit_mcr(X3, d.Y, 1.0, 1.0, init, SolverConfig{}), DimensionError);
}

TEST(Symmetrize, OrAndAndRules)
{
    GammaMatrix g{DenseMatrix(2, 2)};
    g.values(0, 1) = 0.4;
    const auto orp = symmetrize_pattern(g, PresenceRule::Or);
    EXPECT_EQ(orp.edge_count(), 1u);
    EXPECT_EQ(orp.sign(0, 1), -1);
    EXPECT_EQ(orp.sign(1, 0), -1);
    EXPECT_EQ(symmetrize_pattern(g, PresenceRule::And).edge_count(), 0u);
    g.values(1, 0) = 0.1;
    EXPECT_EQ(symmetrize_pattern(g, PresenceRule::And).edges(), (std::vector<Edge>{{0, 1, -1}}));
}

TEST(Symmetrize, SignConflicts)
{
    GammaMatrix g{DenseMatrix(3, 3)};
    g.values(0, 1) = 0.2;
    g.values(1, 0) = -0.5;
    g.values(0, 2) = -0.3;
    g.values(2, 0) = 0.3;
    const auto p = symmetrize_pattern(g, PresenceRule::Or);
    EXPECT_EQ(p.sign(0, 1), 1);   // -0.5 wins, edge sign is -sign(gamma)
    EXPECT_EQ(p.sign(0, 2), 1);   // tie: gamma_02 = -0.3 wins
    EXPECT_THROW(symmetrize_pattern(g, PresenceRule::Or, SignPolicy::Strict), SignConflictError);
}

TEST(Symmetrize, RandomPatternsAreSymmetricAndNested)
{
    std::mt19937_64 gen(17);
    std::bernoulli_distribution present(0.3);
    std::normal_distribution<double> nd;
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t q = 2 + rep % 9;
        GammaMatrix g{DenseMatrix(q, q)};
        for (std::size_t s = 0; s < q; ++s)
            for (std::size_t k = 0; k < q; ++k)
                if (s != k && present(gen)) g.values(s, k) = nd(gen);
        const auto orp = symmetrize_pattern(g, PresenceRule::Or);
        const auto andp = symmetrize_pattern(g, PresenceRule::And);
        for (std::size_t s = 0; s < q; ++s) {
            EXPECT_EQ(orp.sign(s, s), 1);
            for (std::size_t k = 0; k < q; ++k) {
                EXPECT_EQ(orp.sign(s, k), orp.sign(k, s));
                EXPECT_EQ(andp.sign(s, k), andp.sign(k, s));
                if (andp.sign(s, k) != 0) EXPECT_EQ(andp.sign(s, k), orp.sign(s, k));
                if (s != k) EXPECT_EQ(orp.sign(s, k) != 0, g(s, k) != 0.0 || g(k, s) != 0.0);
            }
        }
    }
}

TEST(Reconstruct, AveragesBothDirections)
{
    GammaMatrix g{DenseMatrix(2, 2)};
    g.values(0, 1) = -0.4;
    g.values(1, 0) = -0.2;
    const std::vector<double> var{1.0, 1.0};
    const auto pattern = symmetrize_pattern(g, PresenceRule::Or);
    const DenseMatrix omega = reconstruct_precision(g, var, pattern);
    EXPECT_NEAR(omega(0, 1), 0.3, 1e-15);
    EXPECT_EQ(omega(0, 1), omega(1, 0));
    EXPECT_EQ(omega(0, 0), 1.0);
    const std::vector<double> bad{1.0, 0.0};
    EXPECT_THROW(reconstruct_precision(g, bad, pattern), DegenerateFitError);
}

TEST(Reconstruct, ExactForPopulationQuantities)
{
    const auto sim = gen_dataset({1, 6, 10, 1.0, 2.0, 3});
    const DenseMatrix& omega = sim.truth.Omega_star;
    const GammaMatrix g = true_gamma(omega);
    std::vector<double> var(6);
    for (std::size_t k = 0; k < 6; ++k) var[k] = conditional_variance(sim.truth.Sigma_star, k);
    PrecisionPattern pattern(6);
    for (std::size_t s = 0; s < 6; ++s)
        for (std::size_t k = s + 1; k < 6; ++k)
            if (omega(s, k) != 0.0) pattern.set_edge(s, k, omega(s, k) > 0 ? 1 : -1);
    EXPECT_EQ(symmetrize_pattern(g, PresenceRule::And), pattern);
    const DenseMatrix rebuilt = reconstruct_precision(g, var, pattern);
    for (std::size_t s = 0; s < 6; ++s)
        for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(rebuilt(s, k), omega(s, k), 1e-10);
}

TEST(Initial, ResidualSourceUsesResidualizedResponses)
{
    const auto d = small_data(100, 4, 3, 8);
    const InitialFit res = fit_initial_separate(d.X, d.Y, 2.0, SolverConfig{}, 1, InitialGammaSource::Residuals);
    const InitialFit raw = fit_initial_separate(d.X, d.Y, 2.0, SolverConfig{}, 1, InitialGammaSource::Responses);
    EXPECT_EQ(res.B0.values, raw.B0.values);
    EXPECT_LE(kkt_violation_initial(d.X, d.Y, res, InitialGammaSource::Residuals), 1e-5);
    EXPECT_LE(kkt_violation_initial(d.X, d.Y, raw, InitialGammaSource::Responses), 1e-5);
    const DenseMatrix R = subtract(d.Y, multiply(d.X, res.B0.values));
    for (std::size_t k = 0; k < 3; ++k) {
        DenseMatrix others(100, 2);
        std::vector<double> w{1.0, 1.0}, g;
        for (std::size_t i = 0; i < 100; ++i) {
            std::size_t c = 0;
            for (std::size_t s = 0; s < 3; ++s)
                if (s != k) others(i, c++) = R(i, s);
        }
        for (std::size_t s = 0; s < 3; ++s)
            if (s != k) g.push_back(res.Gamma0(s, k));
        const auto ref = oracle::brute_force_lasso(oracle::to_rows(others), R.col(k), w, 2.0);
        EXPECT_NEAR(g[0], ref[0], 1e-5);
        EXPECT_NEAR(g[1], ref[1], 1e-5);
    }
}
