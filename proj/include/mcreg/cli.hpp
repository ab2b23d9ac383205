#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <mcreg/baselines.hpp>
#include <mcreg/bench.hpp>
#include <mcreg/certify.hpp>
#include <mcreg/dataset.hpp>
#include <mcreg/errors.hpp>
#include <mcreg/io.hpp>
#include <mcreg/mcr.hpp>
#include <mcreg/metrics.hpp>
#include <mcreg/simgen.hpp>
#include <mcreg/tuning.hpp>

namespace mcreg {

inline constexpr const char* version = "0.1.0";

namespace cli {

namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode : int { Ok = 0, Usage = 2, Numerical = 3, InputOutput = 4 };

// Usage problem found after flag parsing.
class UsageError : public Error {
public:
    using Error::Error;
};

inline std::string timestamp_utc()
{
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// FNV-1a, enough to tell input files apart in a manifest.
inline std::string file_digest(const fs::path& path)
{
    const std::string text = read_text_file(path);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline void write_json(const fs::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

inline json matrix_json(const DenseMatrix& m)
{
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        rows.push_back(std::move(r));
    }
    return rows;
}

// Non-finite numbers become null.
inline json number_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json vector_json(std::span<const double> v)
{
    json out = json::array();
    for (double x : v) out.push_back(number_json(x));
    return out;
}

inline json surface_json(const DenseMatrix& m)
{
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) r.push_back(number_json(m(i, j)));
        rows.push_back(std::move(r));
    }
    return rows;
}

inline json spec_json(const ModelSpec& s)
{
    return {{"p", s.p}, {"q", s.q}, {"n", s.n}, {"cb", s.b_nonzero_expect}, {"comega", s.omega_nonzero_expect}};
}

inline json manifest(const std::string& command, json config, std::uint64_t seed)
{
    return {{"command", command},
            {"config", std::move(config)},
            {"seed", seed},
            {"version", version},
            {"created_at", timestamp_utc()}};
}

/// "3.28(.074)": mean to two decimals, standard error to three without the leading zero.
inline std::string table_cell(double mean, double se)
{
    if (!std::isfinite(mean)) return "NA";
    char m[64], s[64];
    std::snprintf(m, sizeof m, "%.2f", mean);
    if (!std::isfinite(se)) return std::string(m) + "(NA)";
    std::snprintf(s, sizeof s, "%.3f", se);
    std::string ss = s;
    if (ss.rfind("0.", 0) == 0) ss.erase(0, 1);
    return std::string(m) + "(" + ss + ")";
}

// ---- shared model flags ----

struct ModelFlags {
    int model = 0;
    std::size_t p = 0, q = 0, n = 0;
    double cb = 0.0, comega = 0.0;

    void add_to(CLI::App& app)
    {
        app.add_option("--model", model, "preset model 1..6")->check(CLI::Range(1, 6));
        app.add_option("--p", p, "number of covariates");
        app.add_option("--q", q, "number of responses");
        app.add_option("--n", n, "number of observations");
        app.add_option("--cb", cb, "expected nonzeros per column of B");
        app.add_option("--comega", comega, "expected nonzeros per row of Omega");
    }

    ModelSpec resolve() const
    {
        ModelSpec s;
        if (model != 0) {
            s = model_presets()[static_cast<std::size_t>(model - 1)];
        } else if (p == 0 || q == 0 || n == 0) {
            throw UsageError("give --model or all of --p --q --n");
        }
        if (p) s.p = p;
        if (q) s.q = q;
        if (n) s.n = n;
        if (cb > 0.0) s.b_nonzero_expect = cb;
        if (comega > 0.0) s.omega_nonzero_expect = comega;
        try {
            s.validate();
        } catch (const ParameterError& e) {
            throw UsageError(e.what());
        }
        return s;
    }
};

// ---- simulate ----

struct SimulateArgs {
    ModelFlags model;
    std::uint64_t seed = 0;
    std::string out;
};

inline int cmd_simulate(const SimulateArgs& a)
{
    ModelSpec spec = a.model.resolve();
    spec.seed = a.seed;
    const SimulatedData sim = gen_dataset(spec);
    const fs::path dir(a.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw FileError(dir.string(), ec.message());
    write_csv(dir / "X.csv", sim.x_raw);
    write_csv(dir / "Y.csv", sim.y_raw);
    write_csv(dir / "B_star.csv", sim.truth.B_star.values);
    write_csv(dir / "Omega_star.csv", sim.truth.Omega_star);
    json m = manifest("simulate", spec_json(spec), spec.seed);
    m["v_min"] = sim.truth.v_min;
    m["warnings"] = sim.warnings;
    write_json(dir / "manifest.json", m);
    for (const auto& w : sim.warnings) std::cerr << "warning: " << w << "\n";
    return Ok;
}

// ---- fit ----

struct FitArgs {
    std::string x, y, out = ".";
    std::string method = "amcr";
    std::optional<double> lambda1, lambda2, lambda_init;
    bool tune = false;
    std::string sym_rule = "or";
    std::size_t threads = 1;
    bool reconstruct = false;
    std::string labels;
    std::string test_x, test_y;
};

inline std::size_t selected_covariates(const CoefMatrix& B)
{
    std::size_t c = 0;
    for (std::size_t j = 0; j < B.rows(); ++j)
        for (std::size_t k = 0; k < B.cols(); ++k)
            if (B.active(j, k)) {
                ++c;
                break;
            }
    return c;
}

inline int cmd_fit(const FitArgs& a)
{
    if (!a.tune && (!a.lambda1 || !a.lambda2))
        throw UsageError("fit needs --tune or both --lambda1 and --lambda2");
    if (a.threads < 1) throw UsageError("--threads must be >= 1");
    if (a.test_x.empty() != a.test_y.empty()) throw UsageError("--test-x and --test-y go together");
    const PresenceRule rule = a.sym_rule == "and" ? PresenceRule::And : PresenceRule::Or;

    const DenseMatrix x_raw = read_csv(a.x);
    const DenseMatrix y_raw = read_csv(a.y);
    if (x_raw.rows() != y_raw.rows())
        throw IngestionError(a.y, 0, 0,
                             "row count " + std::to_string(y_raw.rows()) + " differs from X (" +
                                 std::to_string(x_raw.rows()) + ")");
    const Dataset d = Dataset::from_raw(x_raw, y_raw);
    std::vector<std::string> labels;
    if (!a.labels.empty()) {
        labels = read_labels(a.labels);
        if (labels.size() != d.q())
            throw IngestionError(a.labels, 0, 0, "expected " + std::to_string(d.q()) + " labels");
    }

    const SolverConfig cfg;
    const TuningGrid grid = default_grid();
    json report;
    report["method"] = a.method;
    report["n"] = d.n();
    report["p"] = d.p();
    report["q"] = d.q();
    report["sym_rule"] = a.sym_rule;
    report["tuned"] = a.tune;

    CoefMatrix B;
    GammaMatrix Gamma;
    std::vector<double> resvar;
    PrecisionPattern pattern;
    double kkt = 0.0;

    if (a.method == "amcr") {
        const InitialFit init = a.lambda_init ? fit_initial_separate(d.X, d.Y, *a.lambda_init, cfg, a.threads)
                                              : tune_initial_separate(d.X, d.Y, grid.lambda1_values, cfg, a.threads);
        McrFit fit;
        if (a.tune) {
            McrTuning t = tune_mcr(d.X, d.Y, init, grid, cfg, a.threads);
            report["lambda_axis"] = vector_json(grid.lambda1_values);
            report["bic_surface"] = surface_json(t.search.score_surface);
            report["bic"] = number_json(t.search.score_surface(t.search.best_row, t.search.best_col));
            fit = std::move(t.fit);
        } else {
            fit = fit_mcr(d.X, d.Y, *a.lambda1, *a.lambda2, init, cfg, a.threads);
        }
        report["lambda1"] = fit.lambda1;
        report["lambda2"] = fit.lambda2;
        report["lambda_init_B"] = vector_json(init.lambda_B);
        report["lambda_init_Gamma"] = vector_json(init.lambda_Gamma);
        kkt = std::max(kkt_violation_initial(d.X, d.Y, init), kkt_violation_mcr(d.X, d.Y, init, fit));
        B = std::move(fit.B);
        Gamma = std::move(fit.Gamma);
        resvar = std::move(fit.residual_variances);
        pattern = symmetrize_pattern(Gamma, rule);
    } else if (a.method == "sep") {
        SepFit fit = a.tune ? tune_sep(d.X, d.Y, grid.lambda1_values, grid.lambda2_values, cfg, rule, a.threads)
                            : fit_sep(d.X, d.Y, *a.lambda1, *a.lambda2, cfg, rule, a.threads);
        report["lambda1"] = fit.lambda_B;
        report["lambda2"] = fit.lambda_Omega;
        if (a.tune) {
            report["lambda_axis"] = vector_json(grid.lambda1_values);
            report["bic_B"] = vector_json(fit.bic_B);
            report["bic_Omega"] = vector_json(fit.bic_Omega);
        }
        kkt = kkt_violation_sep(d.X, d.Y, fit);
        B = std::move(fit.B);
        Gamma = std::move(fit.Gamma);
        resvar = std::move(fit.residual_variances);
        pattern = std::move(fit.pattern);
    } else {
        throw UsageError("--method must be amcr or sep");
    }

    report["residual_variances"] = vector_json(resvar);
    report["kkt_max_violation"] = kkt;
    report["nnz_B"] = B.nnz();
    report["selected_covariates"] = selected_covariates(B);
    report["edges"] = pattern.edge_count();

    if (!a.test_x.empty()) {
        const DenseMatrix xt = read_csv(a.test_x);
        const DenseMatrix yt = read_csv(a.test_y);
        if (xt.cols() != d.p() || yt.cols() != d.q() || xt.rows() != yt.rows())
            throw IngestionError(a.test_x, 0, 0, "test matrices do not match the training shapes");
        report["pse"] = predictive_square_error(B, d, xt, yt);
    }

    const fs::path dir(a.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw FileError(dir.string(), ec.message());
    write_csv(dir / "B_hat.csv", B.values);
    if (a.method == "amcr") write_csv(dir / "Gamma_hat.csv", Gamma.values);
    write_json(dir / "pattern.json", pattern_to_json(pattern, labels));
    if (a.reconstruct) write_csv(dir / "omega_hat.csv", reconstruct_precision(Gamma, resvar, pattern));
    write_json(dir / "fit_report.json", report);

    json cfg_json = {{"method", a.method}, {"tune", a.tune}, {"sym_rule", a.sym_rule},
                     {"threads", a.threads}, {"reconstruct", a.reconstruct}};
    if (a.lambda1) cfg_json["lambda1"] = *a.lambda1;
    if (a.lambda2) cfg_json["lambda2"] = *a.lambda2;
    if (a.lambda_init) cfg_json["lambda_init"] = *a.lambda_init;
    cfg_json["inputs"] = {{"x", {{"path", a.x}, {"digest", file_digest(a.x)}}},
                          {"y", {{"path", a.y}, {"digest", file_digest(a.y)}}}};
    write_json(dir / "manifest.json", manifest("fit", std::move(cfg_json), 0));
    return Ok;
}

// ---- bench ----

struct BenchArgs {
    ModelFlags model;
    std::size_t reps = 1;
    std::uint64_t seed = 0;
    std::vector<std::string> methods{"amcr", "sep"};
    std::string sym_rule = "or";
    std::size_t threads = 1;
    std::string out = ".";
};

inline json summary_json(const MethodSummary& s)
{
    json metrics = json::object();
    for (const auto& m : s.metrics)
        metrics[m.name] = {{"mean", number_json(m.stats.mean)},
                           {"stderr", number_json(m.stats.stderr_)},
                           {"count", m.stats.count},
                           {"table", table_cell(m.stats.mean, m.stats.stderr_)}};
    return {{"ok", s.ok}, {"failed", s.failed}, {"metrics", std::move(metrics)}};
}

inline int cmd_bench(const BenchArgs& a)
{
    if (a.reps < 1) throw UsageError("--reps must be >= 1");
    if (a.threads < 1) throw UsageError("--threads must be >= 1");
    BenchConfig cfg;
    cfg.model = a.model.resolve();
    cfg.reps = a.reps;
    cfg.seed = a.seed;
    cfg.threads = a.threads;
    cfg.rule = a.sym_rule == "and" ? PresenceRule::And : PresenceRule::Or;
    cfg.methods.clear();
    for (const auto& m : a.methods) {
        if (m == "amcr") cfg.methods.push_back(Method::Amcr);
        else if (m == "sep") cfg.methods.push_back(Method::Sep);
        else throw UsageError("unknown method: " + m);
    }

    const auto rows = run_bench(cfg);
    const auto summary = summarize(rows, cfg.methods);

    const fs::path dir(a.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw FileError(dir.string(), ec.message());

    std::string csv = "rep,seed,method,metric,value\n";
    json failures = json::array();
    for (const auto& r : rows) {
        if (!r.ok) {
            failures.push_back({{"rep", r.rep}, {"seed", r.seed}, {"method", method_name(r.method)}, {"error", r.error}});
            continue;
        }
        for (const auto& [name, value] : metric_values(r.metrics)) {
            csv += std::to_string(r.rep) + "," + std::to_string(r.seed) + "," + std::string(method_name(r.method)) +
                   "," + name + "," + format_double(value) + "\n";
        }
    }
    write_text_file(dir / "bench_results.csv", csv);

    json methods = json::object();
    for (const auto& s : summary) methods[std::string(method_name(s.method))] = summary_json(s);
    json sj = {{"model", spec_json(cfg.model)},
               {"reps", cfg.reps},
               {"seed", cfg.seed},
               {"sym_rule", a.sym_rule},
               {"partial", !failures.empty()},
               {"failures", failures},
               {"methods", methods}};
    write_json(dir / "bench_summary.json", sj);

    json cfg_json = spec_json(cfg.model);
    cfg_json["reps"] = cfg.reps;
    cfg_json["methods"] = a.methods;
    cfg_json["sym_rule"] = a.sym_rule;
    cfg_json["threads"] = a.threads;
    write_json(dir / "manifest.json", manifest("bench", std::move(cfg_json), cfg.seed));

    for (const auto& s : summary) {
        std::cout << method_name(s.method) << " (" << s.ok << " ok, " << s.failed << " failed)\n";
        for (const auto& m : s.metrics)
            std::cout << "  " << m.name << " " << table_cell(m.stats.mean, m.stats.stderr_) << "\n";
    }
    for (const auto& f : failures) std::cerr << "replication failed: " << f.dump() << "\n";
    return Ok;
}

// ---- export-graph ----

struct ExportArgs {
    std::string pattern;
    std::string format = "dot";
    std::string labels;
    std::string out;
};

inline int cmd_export_graph(const ExportArgs& a)
{
    LabeledPattern lp = read_pattern(a.pattern);
    if (!a.labels.empty()) {
        lp.labels = read_labels(a.labels);
        if (lp.labels.size() != lp.pattern.q())
            throw IngestionError(a.labels, 0, 0, "expected " + std::to_string(lp.pattern.q()) + " labels");
    }
    const std::string text =
        a.format == "json" ? pattern_to_json(lp.pattern, lp.labels).dump(2) + "\n" : pattern_to_dot(lp.pattern, lp.labels);
    if (a.out.empty()) std::cout << text;
    else write_text_file(a.out, text);
    return Ok;
}

}  // namespace cli

/**
 * Entry point of the command-line tool. Returns the process exit code:
 * 0 success, 2 usage, 3 numerical failure, 4 input/output.
 */
inline int run_cli(int argc, char** argv)
{
    using namespace cli;
    CLI::App app{"Sparse multivariate regression with conditional dependency recovery"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);

    const std::size_t env_threads = default_threads();

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "draw a dataset from a simulation model");
    sim.model.add_to(*s);
    s->add_option("--seed", sim.seed, "random seed");
    s->add_option("--out", sim.out, "output directory")->required();

    FitArgs fit;
    fit.threads = env_threads;
    auto* f = app.add_subcommand("fit", "fit aMCR or SEP on CSV data");
    f->add_option("--x", fit.x, "covariate CSV (n x p)")->required();
    f->add_option("--y", fit.y, "response CSV (n x q)")->required();
    f->add_option("--method", fit.method, "amcr or sep")->check(CLI::IsMember({"amcr", "sep"}));
    f->add_option("--lambda1", fit.lambda1, "penalty on B (sep: B stage)")->check(CLI::NonNegativeNumber);
    f->add_option("--lambda2", fit.lambda2, "penalty on Gamma (sep: Omega stage)")->check(CLI::NonNegativeNumber);
    f->add_option("--lambda-init", fit.lambda_init, "fixed initializer penalty (default: BIC)")
        ->check(CLI::NonNegativeNumber);
    f->add_flag("--tune", fit.tune, "choose penalties by BIC over the 19x19 grid");
    f->add_option("--sym-rule", fit.sym_rule, "or|and")->check(CLI::IsMember({"or", "and"}));
    f->add_option("--threads", fit.threads, "worker threads (default MCREG_THREADS or 1)");
    f->add_flag("--reconstruct", fit.reconstruct, "also write omega_hat.csv");
    f->add_option("--labels", fit.labels, "response names, one per line");
    f->add_option("--test-x", fit.test_x, "held-out covariates for Pse");
    f->add_option("--test-y", fit.test_y, "held-out responses for Pse");
    f->add_option("--out", fit.out, "output directory");

    BenchArgs bench;
    bench.threads = env_threads;
    auto* b = app.add_subcommand("bench", "replicated simulation benchmark");
    bench.model.add_to(*b);
    b->add_option("--reps", bench.reps, "replications");
    b->add_option("--seed", bench.seed, "base seed");
    b->add_option("--methods", bench.methods, "amcr,sep")->delimiter(',');
    b->add_option("--sym-rule", bench.sym_rule, "or|and")->check(CLI::IsMember({"or", "and"}));
    b->add_option("--threads", bench.threads, "worker threads (default MCREG_THREADS or 1)");
    b->add_option("--out", bench.out, "output directory");

    ExportArgs ex;
    auto* e = app.add_subcommand("export-graph", "export a pattern.json as DOT or JSON");
    e->add_option("pattern", ex.pattern, "pattern.json")->required();
    e->add_option("--format", ex.format, "dot|json")->check(CLI::IsMember({"dot", "json"}));
    e->add_option("--labels", ex.labels, "response names, one per line");
    e->add_option("--out", ex.out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? Ok : Usage;
    }

    try {
        if (*s) return cmd_simulate(sim);
        if (*f) return cmd_fit(fit);
        if (*b) return cmd_bench(bench);
        return cmd_export_graph(ex);
    } catch (const UsageError& err) {
        std::cerr << "usage error: " << err.what() << "\n";
        return Usage;
    } catch (const IngestionError& err) {
        std::cerr << "input error: " << err.what() << "\n";
        return InputOutput;
    } catch (const FileError& err) {
        std::cerr << "i/o error: " << err.what() << "\n";
        return InputOutput;
    } catch (const ParameterError& err) {
        std::cerr << "usage error: " << err.what() << "\n";
        return Usage;
    } catch (const Error& err) {
        std::cerr << "numerical failure: " << err.what() << "\n";
        return Numerical;
    }
}

}  // namespace mcreg
