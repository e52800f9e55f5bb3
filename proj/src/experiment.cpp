#include "mlse/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mlse {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trace_name(int budget, std::uint64_t seed) {
    return "trace_b" + std::to_string(budget) + "_s" + std::to_string(seed) + ".csv";
}

std::vector<NodeId> partition_ids(const LevelSetRun& run) {
    std::vector<NodeId> ids;
    ids.reserve(run.active().size() + run.s_hat().size() + run.r_hat().size());
    for (const auto& e : run.active()) ids.push_back(e.node);
    for (const auto& c : run.s_hat()) ids.push_back(c.node);
    for (const auto& c : run.r_hat()) ids.push_back(c.node);
    return ids;
}

// Removes what a failed sweep created, newest first.
class OutputGuard {
public:
    void created(fs::path p) { paths_.push_back(std::move(p)); }
    void commit() { paths_.clear(); }
    ~OutputGuard() {
        std::error_code ec;
        for (auto it = paths_.rbegin(); it != paths_.rend(); ++it) {
            if (fs::is_directory(*it, ec)) {
                if (fs::is_empty(*it, ec)) fs::remove(*it, ec);
            } else {
                fs::remove(*it, ec);
            }
        }
    }

private:
    std::vector<fs::path> paths_;
};

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::runtime_error("results: bad number '" + s + "'");
    return v;
}

}  // namespace

AlgoParams make_run_params(const ExperimentConfig& config, int budget, const PartitionTree& tree,
                           const SmoothnessProfile& profile) {
    ScheduleInputs in;
    in.budget = budget;
    in.tau = config.tau;
    in.delta = config.delta;
    in.noise_var = config.noise_var;
    in.v_scale = config.v_scale;
    in.metric_dim = config.metric_dim;
    in.covering_constant = config.covering_constant;
    AlgoParams p = make_algo_params(in, profile, tree);
    if (!config.v_schedule_override.empty()) {
        const auto& ov = config.v_schedule_override;
        for (std::size_t h = 0; h < p.v_schedule.size(); ++h) p.v_schedule[h] = ov[std::min(h, ov.size() - 1)];
        p.q_schedule = compute_q_schedule(p.v_schedule, p.noise_var, p.beta_n);
    }
    return p;
}

RunRecord run_single(const ExperimentConfig& config, int budget, std::uint64_t seed, bool keep_trace) {
    const auto start = std::chrono::steady_clock::now();
    const Box domain = Box::unit(config.dimension);
    const SmoothnessProfile profile = smoothness_profile(config.kernel, domain.diameter());
    PartitionTree tree(domain, hypercube_params(config.dimension));
    GroundTruth truth(config.kernel, config.noise_var, domain, config.grid_resolution, seed);

    RunRecord r;
    r.budget = budget;
    r.seed = seed;
    r.variant = config.variant;
    r.dimension = config.dimension;
    r.kernel = kernel_name(config.kernel);
    r.tau = config.tau;
    r.v_scale = config.v_scale;
    r.params = make_run_params(config, budget, tree, profile);

    RunOptions opts;
    opts.variant = config.variant;
    opts.inherit_parent_bounds = config.inherit_parent_bounds;
    LevelSetRun run(r.params, tree, truth, opts);
    if (!nodes_tile_domain(partition_ids(run))) ++r.tiling_failures;
    while (run.step()) {
        if (!nodes_tile_domain(partition_ids(run))) ++r.tiling_failures;
        if (run.active().size() > run.t()) ++r.active_bound_failures;
    }
    const Classification c = run.classification();
    r.summary = c.summary;

    if (truth.grid_points().empty()) {
        r.discrepancy.l_value = std::numeric_limits<double>::quiet_NaN();
        r.discrepancy.sym_diff_fraction = std::numeric_limits<double>::quiet_NaN();
    } else {
        r.discrepancy = discrepancy(c, truth, config.tau);
    }
    r.info = info_accounting(c, config.kernel, config.noise_var);
    if (config.level_bound) {
        LevelBoundOptions t2;
        t2.max_samples = config.level_bound_max_samples;
        t2.seed = seed;
        r.level_bound_violations =
            level_bound_check(r.info, c, tree, config.kernel, config.noise_var, config.delta, r.params.h_max, t2);
    }
    r.diagnostics = diagnose_run(c, tree, truth, r.params);
    if (keep_trace) {
        std::ostringstream os;
        write_trace(os, c.trace);
        r.trace_csv = os.str();
    }
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return r;
}

std::string resolve_output_dir(const ExperimentConfig& config) {
    const char* env = std::getenv(kOutputDirEnv);
    if (env && *env) return env;
    return config.output_dir;
}

std::string format_result_row(const RunRecord& r) {
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.3f", r.wall_ms);
    std::ostringstream os;
    os << r.budget << ',' << r.seed << ',' << variant_name(r.variant) << ',' << r.dimension << ',' << r.kernel << ','
       << num(r.tau) << ',' << num(r.v_scale) << ',' << num(r.discrepancy.l_value) << ','
       << num(r.discrepancy.sym_diff_fraction) << ',' << num(r.info.j_n) << ',' << num(r.info.mutual_info) << ','
       << r.summary.n_refinements << ',' << r.summary.max_depth << ',' << r.diagnostics.e1_violations << ','
       << r.diagnostics.e2_violations << ',' << wall;
    return os.str();
}

SweepResult run_experiment(const ExperimentConfig& config, const RunnerOptions& options) {
    validate(config);
    SweepResult result;
    result.config = config;
    for (auto& s : result.config.seeds) s += options.seed_offset;
    validate(result.config);
    result.output_dir = resolve_output_dir(config);
    const ExperimentConfig& cfg = result.config;

    struct Job {
        int budget;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (int b : cfg.budgets) {
        for (auto s : cfg.seeds) jobs.push_back({b, s});
    }

    OutputGuard guard;
    std::ofstream results_os;
    std::ofstream depth_os;
    const fs::path dir(result.output_dir);
    const fs::path trace_dir = dir / "traces";
    if (options.write_files) {
        std::error_code ec;
        if (!fs::exists(dir)) {
            fs::create_directories(dir, ec);
            if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
            guard.created(dir);
        }
        if (cfg.write_traces && !fs::exists(trace_dir)) {
            fs::create_directories(trace_dir, ec);
            if (ec) throw std::runtime_error("cannot create '" + trace_dir.string() + "': " + ec.message());
            guard.created(trace_dir);
        }
        {
            std::ofstream cj(dir / "config.resolved.json");
            guard.created(dir / "config.resolved.json");
            cj << to_json(cfg);
            if (!cj) throw std::runtime_error("cannot write config.resolved.json");
        }
        results_os.open(dir / "results.csv");
        guard.created(dir / "results.csv");
        depth_os.open(dir / "depth_counts.csv");
        guard.created(dir / "depth_counts.csv");
        if (!results_os || !depth_os) throw std::runtime_error("cannot open result files in '" + dir.string() + "'");
        results_os << kResultsVersion << '\n' << kResultsHeader << '\n';
        depth_os << kDepthCountsHeader << '\n';
    }

    const auto sink = [&](std::size_t, const RunRecord& r) {
        if (!options.write_files) return;
        results_os << format_result_row(r) << '\n';
        results_os.flush();
        for (std::size_t h = 0; h < r.summary.evals_by_depth.size(); ++h) {
            depth_os << r.budget << ',' << r.seed << ',' << h << ',' << r.summary.evals_by_depth[h] << '\n';
        }
        depth_os.flush();
        if (cfg.write_traces) {
            const fs::path p = trace_dir / trace_name(r.budget, r.seed);
            std::ofstream t(p);
            guard.created(p);
            t << r.trace_csv;
            if (!t) throw std::runtime_error("cannot write trace '" + p.string() + "'");
        }
        if (!results_os || !depth_os) throw std::runtime_error("write failed in '" + dir.string() + "'");
    };
    result.rows = parallel_map<RunRecord>(
        jobs.size(), options.threads,
        [&](std::size_t i) { return run_single(cfg, jobs[i].budget, jobs[i].seed, cfg.write_traces); }, sink);

    if (options.write_files) {
        results_os.close();
        depth_os.close();
        if (!results_os || !depth_os) throw std::runtime_error("closing result files failed");
    }
    guard.commit();
    return result;
}

// ---------------------------------------------------------------------------

std::vector<ResultRow> read_results_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kResultsVersion) throw std::runtime_error("results: missing version line");
    if (!std::getline(is, line) || line != kResultsHeader) throw std::runtime_error("results: unexpected header");
    std::vector<ResultRow> out;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto f = split_csv(line);
        if (f.size() != 16) throw std::runtime_error("results: expected 16 fields in '" + line + "'");
        ResultRow r;
        r.budget = std::stoi(f[0]);
        r.seed = std::stoull(f[1]);
        r.l_value = parse_double(f[7]);
        r.j_n = parse_double(f[9]);
        r.mutual_info = parse_double(f[10]);
        out.push_back(r);
    }
    return out;
}

std::vector<DepthCountRow> read_depth_counts_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kDepthCountsHeader) throw std::runtime_error("depth counts: bad header");
    std::vector<DepthCountRow> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 4) throw std::runtime_error("depth counts: expected 4 fields in '" + line + "'");
        out.push_back({std::stoi(f[0]), std::stoull(f[1]), std::stoi(f[2]), std::stoi(f[3])});
    }
    return out;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

void emit_plot_data(const std::vector<ResultRow>& results, const std::vector<DepthCountRow>& depth_counts,
                    const std::string& out_dir) {
    if (results.empty()) throw std::invalid_argument("plot: no result rows");
    fs::create_directories(out_dir);
    std::map<int, std::vector<const ResultRow*>> by_budget;
    for (const auto& r : results) by_budget[r.budget].push_back(&r);

    const auto column = [](const std::vector<const ResultRow*>& rows, double ResultRow::*field) {
        std::vector<double> v;
        for (const auto* r : rows) {
            if (!std::isnan(r->*field)) v.push_back(r->*field);
        }
        return v;
    };
    const auto open = [&](const char* name) {
        std::ofstream os(fs::path(out_dir) / name);
        if (!os) throw std::runtime_error(std::string("plot: cannot write ") + name);
        return os;
    };

    {
        auto os = open("error_vs_budget.dat");
        os << "# budget runs median_l q25_l q75_l\n";
        for (const auto& [b, rows] : by_budget) {
            const auto v = column(rows, &ResultRow::l_value);
            os << b << ' ' << rows.size() << ' ' << num(quantile(v, 0.5)) << ' ' << num(quantile(v, 0.25)) << ' '
               << num(quantile(v, 0.75)) << '\n';
        }
    }
    {
        auto os = open("info_gain_vs_budget.dat");
        os << "# budget runs median_j_n q25_j_n q75_j_n median_mi q25_mi q75_mi\n";
        for (const auto& [b, rows] : by_budget) {
            const auto j = column(rows, &ResultRow::j_n);
            const auto mi = column(rows, &ResultRow::mutual_info);
            os << b << ' ' << rows.size() << ' ' << num(quantile(j, 0.5)) << ' ' << num(quantile(j, 0.25)) << ' '
               << num(quantile(j, 0.75)) << ' ' << num(quantile(mi, 0.5)) << ' ' << num(quantile(mi, 0.25)) << ' '
               << num(quantile(mi, 0.75)) << '\n';
        }
    }
    if (!depth_counts.empty()) {
        std::map<std::pair<int, int>, long long> totals;
        std::map<int, std::set<std::uint64_t>> seeds;
        for (const auto& d : depth_counts) {
            totals[{d.budget, d.depth}] += d.evaluations;
            seeds[d.budget].insert(d.seed);
        }
        auto os = open("evals_per_depth.dat");
        os << "# budget depth total_evaluations mean_evaluations\n";
        for (const auto& [key, total] : totals) {
            const double runs = static_cast<double>(seeds[key.first].size());
            os << key.first << ' ' << key.second << ' ' << total << ' ' << num(static_cast<double>(total) / runs)
               << '\n';
        }
    }
}

}  // namespace mlse
