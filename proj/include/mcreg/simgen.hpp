#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <mcreg/dataset.hpp>
#include <mcreg/errors.hpp>
#include <mcreg/linalg.hpp>
#include <mcreg/mcr.hpp>

namespace mcreg {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Seed for replication `rep` of a benchmark started from `base`.
inline constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t rep) noexcept
{
    return splitmix64(base ^ splitmix64(rep + 0x5EEDull));
}

/**
 * mt19937_64 with hand-rolled variate transforms. The standard library's
 * distributions are implementation-defined, so uniform and normal draws are
 * built here from raw 64-bit outputs to keep streams identical across
 * toolchains.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // [0, 1) with 53 random bits
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double prob) { return uniform() < prob; }

    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    // Uniform on [-1, -lo] ∪ [lo, 1].
    double signed_uniform(double lo)
    {
        const double sign = uniform() < 0.5 ? -1.0 : 1.0;
        return sign * (lo + (1.0 - lo) * uniform());
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

enum class Stream : std::uint64_t { Precision = 1, Coefficients = 2, Covariates = 3, Noise = 4 };

inline Rng make_stream(std::uint64_t seed, Stream s)
{
    return Rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(s))));
}

struct ModelSpec {
    std::size_t p = 1;
    std::size_t q = 1;
    std::size_t n = 1;
    double b_nonzero_expect = 0.0;      // P(B_jk != 0) = b_nonzero_expect / p
    double omega_nonzero_expect = 0.0;  // P(Omega_sk != 0) = omega_nonzero_expect / q
    std::uint64_t seed = 0;
    double noise_scale = 1.0;           // multiplies the Gaussian noise; 0 gives Y = X B exactly

    double b_prob() const noexcept { return b_nonzero_expect / static_cast<double>(p); }
    double omega_prob() const noexcept { return omega_nonzero_expect / static_cast<double>(q); }

    void validate() const
    {
        if (p < 1 || q < 1 || n < 1) throw ParameterError("ModelSpec: p, q, n must be >= 1");
        if (!(b_prob() >= 0.0 && b_prob() <= 1.0)) throw ParameterError("ModelSpec: B success rate outside [0,1]");
        if (!(omega_prob() >= 0.0 && omega_prob() <= 1.0))
            throw ParameterError("ModelSpec: Omega success rate outside [0,1]");
        if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale))
            throw ParameterError("ModelSpec: noise_scale must be finite and >= 0");
    }
};

/// The six simulation designs (p, q, n, c_B, c_Omega).
inline std::vector<ModelSpec> model_presets()
{
    return {
        {100, 100, 250, 3.0, 2.0},
        {50, 50, 250, 4.0, 2.0},
        {10, 25, 250, 3.5, 2.0},
        {200, 1000, 250, 20.0, 1.5},
        {200, 800, 250, 25.0, 1.5},
        {200, 400, 150, 20.0, 2.5},
    };
}

struct GroundTruth {
    CoefMatrix B_star;
    DenseMatrix Omega_star;
    DenseMatrix Sigma_star;
    double v_min = 1.0;
};

/**
 * Off-diagonal draws Bern(prob) * U([-1,-0.5] ∪ [0.5,1]), each row rescaled so
 * its off-diagonal absolute sum is 2/3. Diagonal left at zero; rows with no
 * draws stay zero. This is the matrix before symmetrization.
 */
inline DenseMatrix gen_precision_unsymmetrized(std::size_t q, double prob, Rng& rng)
{
    if (!(prob >= 0.0 && prob <= 1.0)) throw ParameterError("gen_precision: prob outside [0,1]");
    DenseMatrix a(q, q);
    for (std::size_t i = 0; i < q; ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < q; ++j) {
            if (i == j || !rng.bernoulli(prob)) continue;
            a(i, j) = rng.signed_uniform(0.5);
            row_sum += std::abs(a(i, j));
        }
        if (row_sum > 0.0) {
            const double scale = 1.5 * row_sum;
            for (std::size_t j = 0; j < q; ++j) a(i, j) /= scale;
        }
    }
    return a;
}

/// (A + Aᵀ)/2 of gen_precision_unsymmetrized with unit diagonal.
inline DenseMatrix gen_precision(std::size_t q, double prob, Rng& rng)
{
    const DenseMatrix a = gen_precision_unsymmetrized(q, prob, rng);
    DenseMatrix omega(q, q);
    for (std::size_t i = 0; i < q; ++i) {
        omega(i, i) = 1.0;
        for (std::size_t j = i + 1; j < q; ++j) {
            const double v = 0.5 * (a(i, j) + a(j, i));
            omega(i, j) = v;
            omega(j, i) = v;
        }
    }
    return omega;
}

inline CoefMatrix gen_coefficients(std::size_t p, std::size_t q, double prob, double v_min, Rng& rng)
{
    if (!(v_min > 0.0 && v_min <= 1.0)) throw ParameterError("gen_coefficients: v_min must lie in (0, 1]");
    if (!(prob >= 0.0 && prob <= 1.0)) throw ParameterError("gen_coefficients: prob outside [0,1]");
    CoefMatrix b{DenseMatrix(p, q)};
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t k = 0; k < q; ++k)
            if (rng.bernoulli(prob)) b.values(j, k) = rng.signed_uniform(v_min);
    return b;
}

/// Smallest nonzero |entry| of a precision matrix (the unit diagonal included).
inline double min_nonzero_magnitude(const DenseMatrix& omega)
{
    double m = std::numeric_limits<double>::infinity();
    for (double v : omega.data())
        if (v != 0.0) m = std::min(m, std::abs(v));
    return m;
}

struct SimulatedData {
    DenseMatrix x_raw;
    DenseMatrix y_raw;
    Dataset data;  // centered copies of x_raw, y_raw
    GroundTruth truth;
    std::vector<std::string> warnings;
};

/**
 * Draws Omega*, then B* with v_min taken from Omega*, then X with iid
 * Bern(1/2) entries in {0, 1}, then y_i = B*ᵀx_i + L z_i with L Lᵀ = Omega*^{-1}.
 * Each of the four draws uses its own stream derived from spec.seed.
 */
inline SimulatedData gen_dataset(const ModelSpec& spec)
{
    spec.validate();
    const std::size_t p = spec.p, q = spec.q, n = spec.n;

    Rng omega_rng = make_stream(spec.seed, Stream::Precision);
    Rng coef_rng = make_stream(spec.seed, Stream::Coefficients);
    Rng x_rng = make_stream(spec.seed, Stream::Covariates);
    Rng noise_rng = make_stream(spec.seed, Stream::Noise);

    GroundTruth truth;
    truth.Omega_star = gen_precision(q, spec.omega_prob(), omega_rng);
    truth.Sigma_star = invert_spd(truth.Omega_star);
    truth.v_min = min_nonzero_magnitude(truth.Omega_star);
    truth.B_star = gen_coefficients(p, q, spec.b_prob(), truth.v_min, coef_rng);
    const DenseMatrix chol = cholesky_lower(truth.Sigma_star);

    DenseMatrix x(n, p);
    for (double& v : x.data()) v = x_rng.bernoulli(0.5) ? 1.0 : 0.0;

    DenseMatrix y = multiply(x, truth.B_star.values);
    std::vector<double> z(q);
    for (std::size_t i = 0; i < n; ++i) {
        for (double& v : z) v = noise_rng.normal();
        auto yi = y.row(i);
        for (std::size_t a = 0; a < q; ++a) {
            double e = 0.0;
            for (std::size_t b = 0; b <= a; ++b) e += chol(a, b) * z[b];
            yi[a] += spec.noise_scale * e;
        }
    }

    SimulatedData out{x, y, Dataset::from_raw(x, y), std::move(truth), {}};
    if (n == 1) out.warnings.emplace_back("n = 1: centering leaves X and Y identically zero");
    return out;
}

}  // namespace mcreg
