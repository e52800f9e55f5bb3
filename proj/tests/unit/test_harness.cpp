#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "mlse/experiment.hpp"
#include "mlse/verify.hpp"

using namespace mlse;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("mlse_test_" + name)) {
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// results.csv with the wall-time column cut off
std::string without_wall(const std::string& csv) {
    std::istringstream is(csv);
    std::ostringstream os;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line[0] != '#') line = line.substr(0, line.rfind(','));
        os << line << '\n';
    }
    return os.str();
}

ExperimentConfig small_config(const fs::path& out) {
    ExperimentConfig c;
    c.budgets = {10, 30};
    c.seeds = {0, 1, 2};
    c.v_scale = 0.1;
    c.write_traces = true;
    c.output_dir = out.string();
    return c;
}

}  // namespace

TEST_CASE("one budget and one seed give one row") {
    TempDir dir("single");
    ExperimentConfig c;
    c.output_dir = dir.path.string();
    const auto s = run_experiment(c);
    CHECK(s.rows.size() == 1);
    std::ifstream in(dir.path / "results.csv");
    const auto rows = read_results_csv(in);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].budget == 40);
    CHECK(rows[0].l_value == s.rows[0].discrepancy.l_value);
    CHECK(fs::exists(dir.path / "config.resolved.json"));
    CHECK(fs::exists(dir.path / "depth_counts.csv"));
}

TEST_CASE("header and row layout") {
    TempDir dir("layout");
    const auto s = run_experiment(small_config(dir.path));
    const std::string text = slurp(dir.path / "results.csv");
    std::istringstream is(text);
    std::string l1, l2;
    std::getline(is, l1);
    std::getline(is, l2);
    CHECK(l1 == kResultsVersion);
    CHECK(l2 == "budget,seed,variant,D,kernel,tau,v_scale,l_value,sym_diff_fraction,j_n,mutual_info,n_refinements,"
                "max_depth,e1_violations,e2_violations,wall_ms");
    std::vector<std::pair<int, std::uint64_t>> order;
    for (const auto& r : s.rows) order.emplace_back(r.budget, r.seed);
    CHECK(order == std::vector<std::pair<int, std::uint64_t>>{{10, 0}, {10, 1}, {10, 2}, {30, 0}, {30, 1}, {30, 2}});
    CHECK(fs::exists(dir.path / "traces" / "trace_b30_s2.csv"));
}

TEST_CASE("outputs are identical across invocations and thread counts") {
    TempDir a("det_a"), b("det_b");
    RunnerOptions one, four;
    four.threads = 4;
    auto ca = small_config(a.path);
    auto cb = small_config(b.path);
    cb.output_dir = ca.output_dir;  // same resolved config text
    (void)run_experiment(ca, one);
    {
        // second invocation into another directory via the environment override
        setenv(kOutputDirEnv, b.path.c_str(), 1);
        (void)run_experiment(cb, four);
        unsetenv(kOutputDirEnv);
    }
    CHECK(without_wall(slurp(a.path / "results.csv")) == without_wall(slurp(b.path / "results.csv")));
    for (const char* f : {"depth_counts.csv", "config.resolved.json", "traces/trace_b10_s1.csv",
                          "traces/trace_b30_s0.csv"}) {
        CHECK(slurp(a.path / f) == slurp(b.path / f));
    }
}

TEST_CASE("seed offset shifts every seed") {
    TempDir dir("offset");
    RunnerOptions o;
    o.seed_offset = 100;
    o.write_files = false;
    const auto s = run_experiment(small_config(dir.path), o);
    CHECK(s.rows.front().seed == 100);
    CHECK(s.rows.back().seed == 102);
    CHECK_FALSE(fs::exists(dir.path));
}

TEST_CASE("a failed sweep removes its partial outputs") {
    TempDir dir("partial");
    fs::create_directories(dir.path);
    std::ofstream(dir.path / "traces") << "not a directory";
    CHECK_THROWS((void)run_experiment(small_config(dir.path)));
    CHECK_FALSE(fs::exists(dir.path / "results.csv"));
    CHECK_FALSE(fs::exists(dir.path / "depth_counts.csv"));
    CHECK_FALSE(fs::exists(dir.path / "config.resolved.json"));
    CHECK(fs::exists(dir.path / "traces"));
}

TEST_CASE("invalid config is rejected before running") {
    ExperimentConfig c;
    c.budgets = {20, 10};
    CHECK_THROWS_AS((void)run_experiment(c), ConfigError);
}

TEST_CASE("quantiles") {
    CHECK(quantile({4.0}, 0.25) == 4.0);
    CHECK(quantile({4.0}, 0.5) == 4.0);
    CHECK(quantile({4.0}, 0.75) == 4.0);
    CHECK(quantile({3.0, 1.0, 2.0, 4.0}, 0.5) == 2.5);
    CHECK(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.25) == 2.0);
    CHECK(quantile({0.0, 10.0}, 0.75) == 7.5);
}

TEST_CASE("plot data") {
    TempDir dir("plot");
    SUBCASE("single row gives single-line files") {
        emit_plot_data({{20, 0, 0.5, 1.0, 2.0}}, {{20, 0, 0, 3}}, dir.path.string());
        for (const char* f : {"error_vs_budget.dat", "info_gain_vs_budget.dat", "evals_per_depth.dat"}) {
            std::istringstream is(slurp(dir.path / f));
            std::string line;
            int data = 0;
            while (std::getline(is, line)) data += !line.empty() && line[0] != '#';
            CHECK(data == 1);
        }
        CHECK(slurp(dir.path / "error_vs_budget.dat").find("20 1 0.5 0.5 0.5") != std::string::npos);
    }
    SUBCASE("medians match a recomputation from the raw rows") {
        std::vector<ResultRow> rows;
        std::map<int, std::vector<double>> raw;
        for (int b : {10, 20}) {
            for (std::uint64_t s = 0; s < 5; ++s) {
                const double l = 1.0 / (b + 3.0 * s);
                rows.push_back({b, s, l, 0.0, 0.0});
                raw[b].push_back(l);
            }
        }
        emit_plot_data(rows, {}, dir.path.string());
        CHECK_FALSE(fs::exists(dir.path / "evals_per_depth.dat"));
        std::istringstream is(slurp(dir.path / "error_vs_budget.dat"));
        std::string line;
        std::getline(is, line);
        for (int b : {10, 20}) {
            int budget, runs;
            double med;
            is >> budget >> runs >> med;
            std::getline(is, line);
            auto v = raw[b];
            std::sort(v.begin(), v.end());
            CHECK(budget == b);
            CHECK(runs == 5);
            CHECK(med == doctest::Approx(v[2]).epsilon(1e-15));
        }
    }
}

TEST_CASE("verify suite on the default setup") {
    ExperimentConfig c;
    c.seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    const auto rep = verify_suite(c);
    for (const char* name : {"posterior_oracle", "partition_x3", "algo_params", "algo_params_negative_control",
                             "tiling", "a_t_monotone", "q_cap", "info_inequality_2c4", "e1_rate", "soundness",
                             "deviation_bounds"}) {
        const auto* check = rep.find(name);
        REQUIRE(check != nullptr);
        CHECK_MESSAGE(check->passed, name);
    }
    CHECK(rep.runs.size() == 10);
}
