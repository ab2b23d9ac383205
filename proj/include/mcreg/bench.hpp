#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <mcreg/baselines.hpp>
#include <mcreg/certify.hpp>
#include <mcreg/mcr.hpp>
#include <mcreg/metrics.hpp>
#include <mcreg/parallel.hpp>
#include <mcreg/simgen.hpp>
#include <mcreg/tuning.hpp>

namespace mcreg {

enum class Method { Amcr, Sep };

inline std::string_view method_name(Method m) { return m == Method::Amcr ? "amcr" : "sep"; }

struct BenchConfig {
    ModelSpec model;  // seed ignored; replication r uses derive_seed(seed, r)
    std::size_t reps = 1;
    std::uint64_t seed = 0;
    std::vector<Method> methods{Method::Amcr, Method::Sep};
    SolverConfig solver{};
    TuningGrid grid = default_grid();
    PresenceRule rule = PresenceRule::Or;
    std::size_t threads = 1;
    bool certify = true;  // recompute KKT residuals on explicit designs
};

struct MethodMetrics {
    EstimationReport est;
    SelectionReport sel_B;
    SelectionReport sel_Omega;
    double kkt_max = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
};

struct ReplicationResult {
    std::size_t rep = 0;
    std::uint64_t seed = 0;
    Method method = Method::Amcr;
    bool ok = false;
    std::string error;
    MethodMetrics metrics;
};

/// (name, value) pairs in the fixed order used for result files.
inline std::vector<std::pair<std::string, double>> metric_values(const MethodMetrics& m)
{
    return {
        {"B_frob", m.est.frob},         {"B_one", m.est.one_norm},       {"B_inf", m.est.inf_norm},
        {"B_dist", m.sel_B.dist},       {"B_spe", m.sel_B.spe},          {"B_sen", m.sel_B.sen},
        {"B_mcc", m.sel_B.mcc},         {"Omega_dist", m.sel_Omega.dist}, {"Omega_spe", m.sel_Omega.spe},
        {"Omega_sen", m.sel_Omega.sen}, {"Omega_mcc", m.sel_Omega.mcc},  {"kkt_max", m.kkt_max},
        {"lambda1", m.lambda1},         {"lambda2", m.lambda2},
    };
}

/// Tuned aMCR fit: BIC-tuned separate initializer, then the 2-D grid search.
struct AmcrRun {
    InitialFit init;
    McrTuning tuned;
    PrecisionPattern pattern;
};

inline AmcrRun run_amcr(const Dataset& d, const TuningGrid& grid, const SolverConfig& cfg, PresenceRule rule,
                        std::size_t threads)
{
    AmcrRun out;
    out.init = tune_initial_separate(d.X, d.Y, grid.lambda1_values, cfg, threads);
    out.tuned = tune_mcr(d.X, d.Y, out.init, grid, cfg, threads);
    out.pattern = symmetrize_pattern(out.tuned.fit.Gamma, rule);
    return out;
}

inline SepFit run_sep(const Dataset& d, const TuningGrid& grid, const SolverConfig& cfg, PresenceRule rule,
                      std::size_t threads)
{
    return tune_sep(d.X, d.Y, grid.lambda1_values, grid.lambda2_values, cfg, rule, threads);
}

inline ReplicationResult run_method(const SimulatedData& sim, Method method, const BenchConfig& cfg,
                                    std::size_t threads)
{
    ReplicationResult r;
    r.method = method;
    try {
        const Dataset& d = sim.data;
        MethodMetrics& m = r.metrics;
        if (method == Method::Amcr) {
            const AmcrRun run = run_amcr(d, cfg.grid, cfg.solver, cfg.rule, threads);
            m.est = estimation_errors(run.tuned.fit.B, sim.truth.B_star);
            m.sel_B = coefficient_selection(run.tuned.fit.B, sim.truth.B_star);
            m.sel_Omega = precision_selection(run.pattern, sim.truth.Omega_star);
            m.lambda1 = run.tuned.fit.lambda1;
            m.lambda2 = run.tuned.fit.lambda2;
            if (cfg.certify)
                m.kkt_max = std::max(kkt_violation_initial(d.X, d.Y, run.init),
                                     kkt_violation_mcr(d.X, d.Y, run.init, run.tuned.fit));
        } else {
            const SepFit fit = run_sep(d, cfg.grid, cfg.solver, cfg.rule, threads);
            m.est = estimation_errors(fit.B, sim.truth.B_star);
            m.sel_B = coefficient_selection(fit.B, sim.truth.B_star);
            m.sel_Omega = precision_selection(fit.pattern, sim.truth.Omega_star);
            m.lambda1 = fit.lambda_B;
            m.lambda2 = fit.lambda_Omega;
            if (cfg.certify) m.kkt_max = kkt_violation_sep(d.X, d.Y, fit);
        }
        r.ok = true;
    } catch (const std::exception& e) {
        r.ok = false;
        r.error = e.what();
    }
    return r;
}

/**
 * Replications of simulate -> tune -> fit -> score for every configured
 * method. Replications run in parallel (each single-threaded inside), and
 * results come back ordered by (replication, method). A failing replication
 * is recorded and the run continues.
 */
inline std::vector<ReplicationResult> run_bench(const BenchConfig& cfg)
{
    const std::size_t nm = cfg.methods.size();
    std::vector<ReplicationResult> rows(cfg.reps * nm);
    const std::size_t outer = cfg.reps > 1 ? cfg.threads : 1;
    const std::size_t inner = cfg.reps > 1 ? 1 : cfg.threads;
    parallel_for(cfg.reps, outer, [&](std::size_t rep) {
        ModelSpec spec = cfg.model;
        spec.seed = derive_seed(cfg.seed, rep);
        std::vector<ReplicationResult> local;
        try {
            const SimulatedData sim = gen_dataset(spec);
            for (std::size_t mi = 0; mi < nm; ++mi) local.push_back(run_method(sim, cfg.methods[mi], cfg, inner));
        } catch (const std::exception& e) {
            for (std::size_t mi = 0; mi < nm; ++mi) {
                ReplicationResult r;
                r.method = cfg.methods[mi];
                r.error = e.what();
                local.push_back(std::move(r));
            }
        }
        for (std::size_t mi = 0; mi < nm; ++mi) {
            local[mi].rep = rep;
            local[mi].seed = spec.seed;
            rows[rep * nm + mi] = std::move(local[mi]);
        }
    });
    return rows;
}

struct MetricSummary {
    std::string name;
    MeanStderr stats;
};

struct MethodSummary {
    Method method;
    std::size_t ok = 0;
    std::size_t failed = 0;
    std::vector<MetricSummary> metrics;

    const MeanStderr& operator[](std::string_view name) const
    {
        for (const auto& m : metrics)
            if (m.name == name) return m.stats;
        throw ParameterError("unknown metric: " + std::string(name));
    }
};

/// Mean and standard error of each metric over the successful replications.
inline std::vector<MethodSummary> summarize(const std::vector<ReplicationResult>& rows, std::span<const Method> methods)
{
    std::vector<MethodSummary> out;
    for (Method m : methods) {
        MethodSummary s{m, 0, 0, {}};
        std::vector<std::string> names;
        std::vector<std::vector<double>> values;
        for (const auto& r : rows) {
            if (r.method != m) continue;
            if (!r.ok) {
                ++s.failed;
                continue;
            }
            ++s.ok;
            const auto mv = metric_values(r.metrics);
            if (names.empty()) {
                for (const auto& [name, _] : mv) names.push_back(name);
                values.resize(names.size());
            }
            for (std::size_t i = 0; i < mv.size(); ++i) values[i].push_back(mv[i].second);
        }
        if (names.empty())
            for (const auto& [name, _] : metric_values(MethodMetrics{})) names.push_back(name), values.emplace_back();
        for (std::size_t i = 0; i < names.size(); ++i) s.metrics.push_back({names[i], mean_stderr(values[i])});
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace mcreg
