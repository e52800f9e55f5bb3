#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mlse/experiment.hpp"

namespace mlse {

struct CheckResult {
    std::string name;
    bool passed = true;
    std::uint64_t checked = 0;
    std::uint64_t failed = 0;
    std::string detail;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    std::vector<RunRecord> runs;

    [[nodiscard]] bool all_passed() const;
    [[nodiscard]] const CheckResult* find(const std::string& name) const;
};

struct VerifyOptions {
    int threads = 1;
    std::uint64_t seed_offset = 0;
    int posterior_datasets = 20;
    int x3_depth = 8;
};

/// Runs every invariant suite against the config: posterior oracle,
/// partition geometry, schedule invariants (with a corrupted-schedule
/// negative control), per-run structural checks, the information
/// inequality, and the statistical gates on confidence events, soundness
/// and the deviation bounds. Failures are report content, never exceptions.
[[nodiscard]] VerifyReport verify_suite(const ExperimentConfig& config, const VerifyOptions& options = {});

/// Same suites over runs that were already made.
[[nodiscard]] VerifyReport verify_runs(const ExperimentConfig& config, std::vector<RunRecord> runs,
                                       const VerifyOptions& options = {});

/// Largest relative error of the incremental posterior against a dense
/// solve over `datasets` random datasets of up to 40 points.
struct OracleCheck {
    std::uint64_t comparisons = 0;
    double max_rel_error = 0.0;
};
[[nodiscard]] OracleCheck posterior_oracle_check(const KernelSpec& kernel, int dimension, double noise_var,
                                                 int datasets, std::uint64_t seed);

/// J_n <= factor C_4 noise_var I with relative tolerance `tol`.
[[nodiscard]] bool info_inequality_holds(const InfoGainReport& info, double noise_var, double factor, double tol);

/// One line per check: PASS/FAIL name failed/checked detail.
void print_report(std::ostream& os, const VerifyReport& report);

}  // namespace mlse
