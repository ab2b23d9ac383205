#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include <mcreg/cli.hpp>
#include <mcreg/mcreg.hpp>

using namespace mcreg;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run(std::vector<std::string> args)
{
    args.insert(args.begin(), "mcreg");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override
    {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("mcreg_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    void simulate(const std::string& sub, std::vector<std::string> model, const std::string& seed = "1")
    {
        model.insert(model.begin(), "simulate");
        model.insert(model.end(), {"--seed", seed, "--out", path(sub)});
        ASSERT_EQ(run(model), 0);
    }

    static json load(const std::string& p) { return json::parse(read_text_file(p)); }

    fs::path dir_;
};

const std::vector<std::string> kSmall{"--p", "5", "--q", "4", "--n", "60", "--cb", "2", "--comega", "1.5"};

}  // namespace

TEST_F(CliTest, SimulateWritesShapesAndIsDeterministic)
{
    simulate("a", {"--model", "3"}, "7");
    simulate("b", {"--model", "3"}, "7");
    const DenseMatrix X = read_csv(path("a/X.csv"));
    const DenseMatrix Y = read_csv(path("a/Y.csv"));
    EXPECT_EQ(X.rows(), 250u);
    EXPECT_EQ(X.cols(), 10u);
    EXPECT_EQ(Y.cols(), 25u);
    EXPECT_EQ(read_csv(path("a/B_star.csv")).rows(), 10u);
    EXPECT_EQ(read_csv(path("a/Omega_star.csv")).cols(), 25u);
    for (const char* f : {"X.csv", "Y.csv", "B_star.csv", "Omega_star.csv"})
        EXPECT_EQ(read_text_file(path(std::string("a/") + f)), read_text_file(path(std::string("b/") + f))) << f;
    const json m = load(path("a/manifest.json"));
    EXPECT_EQ(m["command"], "simulate");
    EXPECT_EQ(m["seed"], 7);
    EXPECT_EQ(read_text_file(path("a/X.csv")).find("X"), std::string::npos);
}

TEST_F(CliTest, UsageErrorsExitTwo)
{
    EXPECT_EQ(run({"simulate", "--model", "9", "--out", path("x")}), 2);
    EXPECT_EQ(run({"simulate", "--out", path("x")}), 2);
    EXPECT_EQ(run({}), 2);
    EXPECT_EQ(run({"bogus"}), 2);
    simulate("d", kSmall);
    EXPECT_EQ(run({"fit", "--x", path("d/X.csv"), "--y", path("d/Y.csv"), "--out", path("f")}), 2);
    EXPECT_EQ(run({"fit", "--x", path("d/X.csv"), "--y", path("d/Y.csv"), "--lambda1", "1", "--out", path("f")}), 2);
    EXPECT_EQ(run({"fit", "--x", path("d/X.csv"), "--y", path("d/Y.csv"), "--method", "ols", "--tune"}), 2);
    EXPECT_EQ(run({"fit", "--x", path("d/X.csv"), "--y", path("d/Y.csv"), "--tune", "--threads", "0"}), 2);
}

TEST_F(CliTest, IngestionErrorsExitFour)
{
    simulate("d", kSmall);
    write_text_file(path("bad.csv"), "1,2\n3,oops\n");
    EXPECT_EQ(run({"fit", "--x", path("bad.csv"), "--y", path("d/Y.csv"), "--tune", "--out", path("f")}), 4);
    EXPECT_EQ(run({"fit", "--x", path("missing.csv"), "--y", path("d/Y.csv"), "--tune", "--out", path("f")}), 4);
    write_text_file(path("short.csv"), "1\n2\n");
    EXPECT_EQ(run({"fit", "--x", path("d/X.csv"), "--y", path("short.csv"), "--tune", "--out", path("f")}), 4);
    write_text_file(path("p.json"), "{not json");
    EXPECT_EQ(run({"export-graph", path("p.json")}), 4);
}

TEST_F(CliTest, TunedFitReportsFullSurface)
{
    simulate("d", kSmall);
    ASSERT_EQ(run({"fit", "--x", path("d/X.csv"), "--y", path("d/Y.csv"), "--tune", "--reconstruct", "--out",
                   path("f")}),
              0);
    const json r = load(path("f/fit_report.json"));
    EXPECT_EQ(r["method"], "amcr");
    ASSERT_EQ(r["bic_surface"].size(), 19u);
    for (const auto& row : r["bic_surface"]) EXPECT_EQ(row.size(), 19u);
    EXPECT_EQ(r["lambda_axis"].size(), 19u);
    EXPECT_LE(r["kkt_max_violation"].get<double>(), 1e-5);
    double best = INFINITY;
    for (const auto& row : r["bic_surface"])
        for (const auto& v : row)
            if (v.is_number()) best = std::min(best, v.get<double>());
    EXPECT_EQ(r["bic"].get<double>(), best);
    const DenseMatrix B = read_csv(path("f/B_hat.csv"));
    EXPECT_EQ(B.rows(), 5u);
    EXPECT_EQ(B.cols(), 4u);
    EXPECT_EQ(read_csv(path("f/Gamma_hat.csv")).rows(), 4u);
    EXPECT_EQ(read_csv(path("f/omega_hat.csv")).cols(), 4u);
    const auto pattern = read_pattern(path("f/pattern.json"));
    EXPECT_EQ(pattern.pattern.q(), 4u);
    EXPECT_EQ(r["edges"], pattern.pattern.edge_count());
}

TEST_F(CliTest, SepWithOneResponseHasNoEdges)
{
    simulate("d", {"--p", "4", "--q", "1", "--n", "50", "--cb", "2"});
    ASSERT_EQ(run({"fit", "--method", "sep", "--x", path("d/X.csv"), "--y", path("d/Y.csv"), "--tune", "--out",
                   path("f")}),
              0);
    EXPECT_EQ(load(path("f/pattern.json"))["edges"].size(), 0u);
    EXPECT_EQ(load(path("f/fit_report.json"))["edges"], 0);
    EXPECT_FALSE(fs::exists(path("f/Gamma_hat.csv")));
}

TEST_F(CliTest, ThreadCountGivesByteIdenticalOutput)
{
    simulate("d", {"--p", "8", "--q", "10", "--n", "80", "--cb", "2", "--comega", "1.5"});
    for (const char* t : {"1", "8"})
        ASSERT_EQ(run({"fit", "--x", path("d/X.csv"), "--y", path("d/Y.csv"), "--tune", "--reconstruct", "--threads",
                       t, "--out", path(std::string("f") + t)}),
                  0);
    for (const char* f : {"B_hat.csv", "Gamma_hat.csv", "pattern.json", "omega_hat.csv", "fit_report.json"})
        EXPECT_EQ(read_text_file(path(std::string("f1/") + f)), read_text_file(path(std::string("f8/") + f))) << f;
}

TEST_F(CliTest, FixedLambdasMatchLibrary)
{
    simulate("d", kSmall);
    ASSERT_EQ(run({"fit", "--x", path("d/X.csv"), "--y", path("d/Y.csv"), "--lambda1", "0.5", "--lambda2", "0.2",
                   "--lambda-init", "3", "--out", path("f")}),
              0);
    const Dataset d = Dataset::from_raw(read_csv(path("d/X.csv")), read_csv(path("d/Y.csv")));
    const InitialFit init = fit_initial_separate(d.X, d.Y, 3.0, SolverConfig{});
    const McrFit fit = fit_mcr(d.X, d.Y, 0.5, 0.2, init, SolverConfig{});
    EXPECT_EQ(read_csv(path("f/B_hat.csv")), fit.B.values);
    EXPECT_EQ(read_csv(path("f/Gamma_hat.csv")), fit.Gamma.values);
}

TEST_F(CliTest, BenchAggregatesReplications)
{
    ASSERT_EQ(run({"bench", "--p", "5", "--q", "4", "--n", "60", "--cb", "2", "--comega", "1.5", "--reps", "2",
                   "--seed", "3", "--out", path("b")}),
              0);
    const json s = load(path("b/bench_summary.json"));
    EXPECT_EQ(s["reps"], 2);
    EXPECT_EQ(s["partial"], false);
    std::istringstream csv(read_text_file(path("b/bench_results.csv")));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "rep,seed,method,metric,value");
    std::map<std::string, std::vector<double>> values;
    while (std::getline(csv, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
        ASSERT_EQ(cells.size(), 5u);
        values[cells[2] + "/" + cells[3]].push_back(std::stod(cells[4]));
    }
    for (const char* method : {"amcr", "sep"}) {
        const json& m = s["methods"][method];
        EXPECT_EQ(m["ok"], 2);
        for (const char* metric : {"B_frob", "B_mcc", "Omega_spe"}) {
            const auto& v = values[std::string(method) + "/" + metric];
            ASSERT_EQ(v.size(), 2u);
            const double mean = 0.5 * (v[0] + v[1]);
            const double se = std::abs(v[0] - v[1]) / 2.0;  // sd / sqrt(2) with n - 1 = 1
            EXPECT_NEAR(m["metrics"][metric]["mean"].get<double>(), mean, 1e-12);
            EXPECT_NEAR(m["metrics"][metric]["stderr"].get<double>(), se, 1e-12);
            EXPECT_EQ(m["metrics"][metric]["count"], 2);
        }
    }
    EXPECT_TRUE(fs::exists(path("b/manifest.json")));
}

TEST_F(CliTest, ExportGraph)
{
    PrecisionPattern p(3);
    p.set_edge(0, 2, -1);
    write_text_file(path("p.json"), pattern_to_json(p).dump());
    write_text_file(path("labels.txt"), "a\nb\nc\n");
    ASSERT_EQ(run({"export-graph", path("p.json"), "--format", "dot", "--labels", path("labels.txt"), "--out",
                   path("g.dot")}),
              0);
    EXPECT_EQ(read_text_file(path("g.dot")),
              "graph responses {\n  \"a\";\n  \"b\";\n  \"c\";\n  \"a\" -- \"c\" [sign=\"-1\"];\n}\n");
    ASSERT_EQ(run({"export-graph", path("p.json"), "--format", "json", "--out", path("g.json")}), 0);
    EXPECT_EQ(read_pattern(path("g.json")).pattern, p);
    write_text_file(path("two.txt"), "a\nb\n");
    EXPECT_EQ(run({"export-graph", path("p.json"), "--labels", path("two.txt"), "--out", path("x.dot")}), 4);
}

TEST_F(CliTest, EnvironmentSetsDefaultThreads)
{
    ::setenv("MCREG_THREADS", "3", 1);
    EXPECT_EQ(default_threads(), 3u);
    ::setenv("MCREG_THREADS", "junk", 1);
    EXPECT_EQ(default_threads(), 1u);
    ::unsetenv("MCREG_THREADS");
    EXPECT_EQ(default_threads(), 1u);
}
