#include <cmath>

#include <gtest/gtest.h>

#include <mcreg/mcreg.hpp>

using namespace mcreg;

TEST(Simgen, PresetShapes)
{
    const auto presets = model_presets();
    ASSERT_EQ(presets.size(), 6u);
    const std::size_t expect[6][3] = {{100, 100, 250}, {50, 50, 250}, {10, 25, 250},
                                      {200, 1000, 250}, {200, 800, 250}, {200, 400, 150}};
    const double cb[6] = {3.0, 4.0, 3.5, 20.0, 25.0, 20.0};
    const double co[6] = {2.0, 2.0, 2.0, 1.5, 1.5, 2.5};
    for (std::size_t m = 0; m < 6; ++m) {
        EXPECT_EQ(presets[m].p, expect[m][0]);
        EXPECT_EQ(presets[m].q, expect[m][1]);
        EXPECT_EQ(presets[m].n, expect[m][2]);
        EXPECT_EQ(presets[m].b_nonzero_expect, cb[m]);
        EXPECT_EQ(presets[m].omega_nonzero_expect, co[m]);
    }
}

TEST(Simgen, SameSeedSameData)
{
    ModelSpec spec = model_presets()[2];
    spec.seed = 123;
    const auto a = gen_dataset(spec);
    const auto b = gen_dataset(spec);
    EXPECT_EQ(a.x_raw, b.x_raw);
    EXPECT_EQ(a.y_raw, b.y_raw);
    EXPECT_EQ(a.truth.B_star.values, b.truth.B_star.values);
    EXPECT_EQ(a.truth.Omega_star, b.truth.Omega_star);
    spec.seed = 124;
    EXPECT_NE(gen_dataset(spec).y_raw, a.y_raw);
}

TEST(Simgen, UnsymmetrizedRowsSumToTwoThirds)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng = make_stream(seed, Stream::Precision);
        const DenseMatrix a = gen_precision_unsymmetrized(30, 0.1, rng);
        for (std::size_t i = 0; i < 30; ++i) {
            EXPECT_EQ(a(i, i), 0.0);
            double s = 0.0;
            for (std::size_t j = 0; j < 30; ++j) {
                s += std::abs(a(i, j));
                if (a(i, j) != 0.0) {
                    EXPECT_LE(std::abs(a(i, j)), 2.0 / 3.0 + 1e-12);
                }
            }
            if (s > 0.0) EXPECT_NEAR(s, 2.0 / 3.0, 1e-12);
        }
    }
}

TEST(Simgen, PrecisionIsSymmetricPositiveDefiniteWithUnitDiagonal)
{
    for (std::size_t m = 0; m < 6; ++m) {
        ModelSpec spec = model_presets()[m];
        if (spec.q > 400) continue;
        spec.seed = 10 + m;
        Rng rng = make_stream(spec.seed, Stream::Precision);
        const DenseMatrix omega = gen_precision(spec.q, spec.omega_prob(), rng);
        for (std::size_t i = 0; i < spec.q; ++i) {
            EXPECT_EQ(omega(i, i), 1.0);
            for (std::size_t j = 0; j < spec.q; ++j) EXPECT_EQ(omega(i, j), omega(j, i));
        }
        EXPECT_NO_THROW(cholesky_lower(omega));
    }
}

TEST(Simgen, CoefficientMagnitudesRespectVmin)
{
    ModelSpec spec = model_presets()[1];
    spec.seed = 5;
    const auto sim = gen_dataset(spec);
    const double vmin = sim.truth.v_min;
    EXPECT_GT(vmin, 0.0);
    EXPECT_LE(vmin, 1.0);
    double smallest = INFINITY;
    for (double v : sim.truth.Omega_star.data())
        if (v != 0.0) smallest = std::min(smallest, std::abs(v));
    EXPECT_EQ(vmin, smallest);
    for (double v : sim.truth.B_star.values.data())
        if (v != 0.0) {
            EXPECT_GE(std::abs(v), vmin);
            EXPECT_LE(std::abs(v), 1.0);
        }
    EXPECT_GT(sim.truth.B_star.nnz(), 0u);
}

TEST(Simgen, CovariatesAreBinaryAndDataIsCentered)
{
    ModelSpec spec = model_presets()[2];
    spec.seed = 9;
    const auto sim = gen_dataset(spec);
    for (double v : sim.x_raw.data()) EXPECT_TRUE(v == 0.0 || v == 1.0);
    for (std::size_t j = 0; j < spec.p; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < spec.n; ++i) s += sim.data.X(i, j);
        EXPECT_NEAR(s, 0.0, 1e-10);
    }
    for (std::size_t k = 0; k < spec.q; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < spec.n; ++i) s += sim.data.Y(i, k);
        EXPECT_NEAR(s, 0.0, 1e-9);
    }
}

TEST(Simgen, ZeroNoiseGivesExactLinearModel)
{
    ModelSpec spec{8, 5, 40, 3.0, 2.0, 77, 0.0};
    const auto sim = gen_dataset(spec);
    const DenseMatrix xb = multiply(sim.x_raw, sim.truth.B_star.values);
    EXPECT_EQ(sim.y_raw, xb);
}

TEST(Simgen, SigmaIsInverseOfOmega)
{
    const auto sim = gen_dataset({2, 12, 10, 1.0, 2.0, 31});
    const DenseMatrix id = multiply(sim.truth.Omega_star, sim.truth.Sigma_star);
    for (std::size_t i = 0; i < 12; ++i)
        for (std::size_t j = 0; j < 12; ++j) EXPECT_NEAR(id(i, j), i == j ? 1.0 : 0.0, 1e-12);
}

TEST(Simgen, NoiseCovarianceMatchesSigma)
{
    ModelSpec spec{1, 3, 20000, 0.0, 2.0, 4};
    const auto sim = gen_dataset(spec);
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < spec.n; ++i) s += sim.data.Y(i, a) * sim.data.Y(i, b);
            EXPECT_NEAR(s / static_cast<double>(spec.n), sim.truth.Sigma_star(a, b), 0.05);
        }
}

TEST(Simgen, ValidationAndWarnings)
{
    EXPECT_THROW(gen_dataset({0, 1, 1, 0.0, 0.0, 1}), ParameterError);
    EXPECT_THROW(gen_dataset({2, 2, 5, 3.0, 0.0, 1}), ParameterError);
    EXPECT_THROW(gen_dataset({2, 2, 5, 1.0, 1.0, 1, -1.0}), ParameterError);
    const auto one = gen_dataset({2, 2, 1, 1.0, 1.0, 1});
    EXPECT_FALSE(one.warnings.empty());
}

TEST(Simgen, DerivedSeedsDiffer)
{
    EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
    EXPECT_EQ(derive_seed(5, 3), derive_seed(5, 3));
}
