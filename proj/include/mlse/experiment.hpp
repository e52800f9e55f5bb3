#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mlse/config.hpp"
#include "mlse/detail/parallel.hpp"
#include "mlse/eval.hpp"

namespace mlse {

inline constexpr const char* kResultsVersion = "# mlse results v1";
inline constexpr const char* kResultsHeader =
    "budget,seed,variant,D,kernel,tau,v_scale,l_value,sym_diff_fraction,j_n,mutual_info,n_refinements,max_depth,"
    "e1_violations,e2_violations,wall_ms";

/// Environment variable that replaces `output_dir` from the config.
inline constexpr const char* kOutputDirEnv = "MLSE_OUTPUT_DIR";

/// Everything measured on one (budget, seed) run.
struct RunRecord {
    int budget = 0;
    std::uint64_t seed = 0;
    Variant variant = Variant::Core;
    int dimension = 1;
    std::string kernel;
    double tau = 0.0;
    double v_scale = 1.0;
    AlgoParams params;

    DiscrepancyReport discrepancy;  // l_value is NaN without a grid
    InfoGainReport info;
    int level_bound_violations = -1;  // -1: not computed
    RunSummary summary;
    RunDiagnostics diagnostics;

    // per-step structural checks
    int tiling_failures = 0;
    int active_bound_failures = 0;  // |X_t| > t (meaningful for the fast variant)

    std::string trace_csv;  // filled when traces are requested
    double wall_ms = 0.0;
};

/// Schedules for one run, with the config's V override applied (padded with
/// its last entry, q recomputed).
[[nodiscard]] AlgoParams make_run_params(const ExperimentConfig& config, int budget, const PartitionTree& tree,
                                         const SmoothnessProfile& profile);

/// One complete run. Deterministic in (config, budget, seed).
[[nodiscard]] RunRecord run_single(const ExperimentConfig& config, int budget, std::uint64_t seed,
                                   bool keep_trace = false);

struct RunnerOptions {
    int threads = 1;
    std::uint64_t seed_offset = 0;
    bool write_files = true;
};

/// Rows ordered by (budget, seed) in config order.
struct SweepResult {
    ExperimentConfig config;  // seeds already shifted by the offset
    std::string output_dir;
    std::vector<RunRecord> rows;
};

/// `output_dir` unless the environment override is set and non-empty.
[[nodiscard]] std::string resolve_output_dir(const ExperimentConfig& config);

/// Runs every (budget, seed) pair on a worker pool. With write_files, writes
/// results.csv, depth_counts.csv, config.resolved.json and (optionally) one
/// trace per run into the output directory; rows are appended in order as
/// they complete. Files written by a failed sweep are removed.
SweepResult run_experiment(const ExperimentConfig& config, const RunnerOptions& options = {});

[[nodiscard]] std::string format_result_row(const RunRecord& r);

inline constexpr const char* kDepthCountsHeader = "budget,seed,depth,evaluations";

// ---------------------------------------------------------------------------
// Plot data

/// The subset of results.csv the plot emitter needs.
struct ResultRow {
    int budget = 0;
    std::uint64_t seed = 0;
    double l_value = 0.0;
    double j_n = 0.0;
    double mutual_info = 0.0;
};

struct DepthCountRow {
    int budget = 0;
    std::uint64_t seed = 0;
    int depth = 0;
    int evaluations = 0;
};

/// Throws std::runtime_error on a missing version line or header mismatch.
[[nodiscard]] std::vector<ResultRow> read_results_csv(std::istream& is);
[[nodiscard]] std::vector<DepthCountRow> read_depth_counts_csv(std::istream& is);

/// Linear-interpolation quantile of unsorted data, q in [0, 1].
[[nodiscard]] double quantile(std::vector<double> values, double q);

/// Writes error_vs_budget.dat, info_gain_vs_budget.dat and (when depth
/// counts are given) evals_per_depth.dat into out_dir.
void emit_plot_data(const std::vector<ResultRow>& results, const std::vector<DepthCountRow>& depth_counts,
                    const std::string& out_dir);

}  // namespace mlse

