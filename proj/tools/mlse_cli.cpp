#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mlse/config.hpp"
#include "mlse/experiment.hpp"
#include "mlse/verify.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kSuiteFailure = 2;
constexpr int kRuntimeFailure = 3;

int cmd_run(const std::string& config_path, int threads, std::uint64_t seed_offset) {
    const auto config = mlse::load_config(config_path);
    mlse::RunnerOptions opts;
    opts.threads = threads;
    opts.seed_offset = seed_offset;
    const auto sweep = mlse::run_experiment(config, opts);
    std::cout << "wrote " << sweep.rows.size() << " rows to " << sweep.output_dir << "/results.csv\n";
    return kOk;
}

int cmd_verify(const std::string& config_path, int threads, std::uint64_t seed_offset) {
    const auto config = mlse::load_config(config_path);
    mlse::VerifyOptions opts;
    opts.threads = threads;
    opts.seed_offset = seed_offset;
    const auto report = mlse::verify_suite(config, opts);
    mlse::print_report(std::cout, report);
    return report.all_passed() ? kOk : kSuiteFailure;
}

int cmd_plot(const std::string& input, const std::string& out_dir) {
    std::ifstream in(input);
    if (!in) throw std::runtime_error("cannot open '" + input + "'");
    const auto rows = mlse::read_results_csv(in);
    std::vector<mlse::DepthCountRow> depth;
    const auto depth_path = std::filesystem::path(input).parent_path() / "depth_counts.csv";
    if (std::filesystem::exists(depth_path)) {
        std::ifstream d(depth_path);
        depth = mlse::read_depth_counts_csv(d);
    }
    mlse::emit_plot_data(rows, depth, out_dir);
    std::cout << "wrote plot data for " << rows.size() << " rows to " << out_dir << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiscale GP level-set estimation experiments"};
    app.require_subcommand(1);
    int threads = 1;
    std::uint64_t seed_offset = 0;
    app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 256));
    app.add_option("--seed-offset", seed_offset, "added to every configured seed");

    std::string config_path;
    auto* run = app.add_subcommand("run", "run a budget x seed sweep and write CSV outputs");
    run->add_option("--config", config_path, "JSON config")->required();
    auto* verify = app.add_subcommand("verify", "run the invariant suites");
    verify->add_option("--config", config_path, "JSON config")->required();
    std::string input, out_dir;
    auto* plot = app.add_subcommand("plot", "write plot data files from results.csv");
    plot->add_option("--input", input, "results.csv")->required();
    plot->add_option("--out", out_dir, "output directory")->required();
    for (auto* sub : {run, verify, plot}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*run) return cmd_run(config_path, threads, seed_offset);
        if (*verify) return cmd_verify(config_path, threads, seed_offset);
        return cmd_plot(input, out_dir);
    } catch (const mlse::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeFailure;
    }
}
