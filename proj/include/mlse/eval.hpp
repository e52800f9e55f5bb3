#pragma once

#include <cstdint>
#include <vector>

#include "mlse/ground_truth.hpp"
#include "mlse/lse.hpp"

namespace mlse {

// ---------------------------------------------------------------------------
// Level-set error

struct DiscrepancyReport {
    double l_value = 0.0;            // sup of |f - tau| over the symmetric difference
    double sym_diff_fraction = 0.0;  // share of grid points in the symmetric difference
    int grid_resolution = 0;
    std::size_t grid_points = 0;
};

/// Grid version: `inside_s[g]` says whether grid point g lies in the
/// estimated super-level set.
[[nodiscard]] DiscrepancyReport discrepancy(const std::vector<double>& grid_values, const std::vector<char>& inside_s,
                                            double tau, int grid_resolution);

/// Unclassified cells count as outside the estimate.
[[nodiscard]] DiscrepancyReport discrepancy(const Classification& c, const GroundTruth& truth, double tau);

/// Grid indices (row-major, axis 0 fastest) inside the closed box.
[[nodiscard]] std::vector<std::size_t> grid_indices_in(const GroundTruth& truth, const Box& box);

/// Marks grid points owned by any of the cells (half-open ownership).
[[nodiscard]] std::vector<char> grid_membership(const GroundTruth& truth, const std::vector<ClassifiedCell>& cells);

// ---------------------------------------------------------------------------
// Information gain

/// 1/2 log det(I + K / noise_var) over the points (with multiplicity).
[[nodiscard]] double mutual_information(const std::vector<Point>& points, const KernelSpec& kernel, double noise_var);

/// z / log(1 + z) with z = k(x, x) / noise_var: the constant for which
/// v / noise_var <= C_4 log(1 + v / noise_var) whenever v <= k(x, x).
[[nodiscard]] double info_constant_c4(const KernelSpec& kernel, double noise_var);

struct LevelInfo {
    int h = 0;
    int n_h = 0;
    double j_nh = 0.0;  // sum of sigma_t^2 over evaluations at depth h
    // filled by level_bound_check
    std::uint64_t m_h = 0;
    std::uint64_t samples = 0;  // points actually used (m_h or the cap)
    bool subsampled = false;
    double eps_h = 0.0;
    int best_t = 0;
    double i_h = 0.0;
    double bound = 0.0;  // C_4 (I_h + n_h eps_h)
    bool violated = false;
};

struct InfoGainReport {
    double j_n = 0.0;
    double mutual_info = 0.0;
    double c4 = 0.0;
    std::vector<LevelInfo> per_level;
};

[[nodiscard]] InfoGainReport info_accounting(const Classification& c, const KernelSpec& kernel, double noise_var);

struct LevelBoundOptions {
    std::uint64_t max_samples = 4096;
    std::uint64_t seed = 0;
};

/// Per-level information bound built from empirical Gram eigenvalues of
/// m_h points drawn uniformly from the union of eps_h-balls around the
/// evaluated depth-h centers. Updates `report.per_level` in place and
/// returns the number of violated levels.
int level_bound_check(InfoGainReport& report, const Classification& c, PartitionTree& tree,
                         const KernelSpec& kernel, double noise_var, double delta, int h_max,
                         const LevelBoundOptions& options = {});

/// max over s of T log(s m / noise_var) + (n - s) / noise_var * sum_{i > T} lambda_i
/// with eigenvalues sorted in decreasing order.
[[nodiscard]] double info_level_term(const std::vector<double>& eigen_desc, int n_h, int t_h, std::uint64_t m_h,
                                     double noise_var);

// ---------------------------------------------------------------------------
// Dimension diagnostics and rates

/// Greedy r-separated subset in input order (pairwise distances >= r). At
/// least half of the true packing number.
[[nodiscard]] int packing_estimate(const std::vector<Point>& points, double radius);

struct RateFit {
    std::vector<double> budgets;
    std::vector<double> median_errors;
    std::vector<char> excluded;  // non-positive errors dropped from the fit
    double slope = 0.0;
    double intercept = 0.0;
    double theory_slope = 0.0;  // -alpha / (D + 2 alpha)
};

[[nodiscard]] RateFit rate_fit(const std::vector<double>& budgets, const std::vector<double>& median_errors,
                               double alpha, int dimension);

// ---------------------------------------------------------------------------
// Per-run checks against the ground truth

struct RunDiagnostics {
    int e1_violations = 0;     // evaluations with |f(center) - mu| > beta sigma
    int e2_violations = 0;     // touched cells whose grid variation exceeds V_h
    double slack = 0.0;        // largest jump between neighbouring grid points
    int soundness_failures = 0;
    int deviation_checked = 0;
    int deviation_v_failures = 0;      // sup |f - tau| > 10 V_h
    int deviation_sigma_failures = 0;  // sup |f - tau| > 4 beta sigma, h < h_max
    int q_cap_violations = 0;
    bool a_t_monotone = true;
    double a_t_max_increase = 0.0;

    [[nodiscard]] bool violation_free() const { return e1_violations == 0 && e2_violations == 0; }
};

/// Uses only grid values and values the run already materialized.
[[nodiscard]] RunDiagnostics diagnose_run(const Classification& c, PartitionTree& tree, const GroundTruth& truth,
                                          const AlgoParams& params);

}  // namespace mlse
