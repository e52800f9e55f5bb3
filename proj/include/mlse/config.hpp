#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mlse/kernel.hpp"
#include "mlse/lse.hpp"

namespace mlse {

/// One experiment: a sweep over budgets x seeds with everything else fixed.
struct ExperimentConfig {
    KernelSpec kernel = KernelSpec::squared_exponential(1.0, 1.0);
    int dimension = 1;
    double noise_var = 0.01;
    double tau = 0.0;
    double delta = 0.1;
    std::vector<int> budgets{40};
    std::vector<std::uint64_t> seeds{0};
    Variant variant = Variant::Core;
    double v_scale = 1.0;
    int grid_resolution = 201;
    double covering_constant = 0.0;  // 0: (1 + sqrt(D))^D
    double metric_dim = 0.0;         // 0: D
    std::string output_dir = "mlse_out";
    bool inherit_parent_bounds = false;
    bool level_bound = false;
    bool write_traces = false;
    std::uint64_t level_bound_max_samples = 4096;
    std::vector<double> v_schedule_override;  // replaces V_h when non-empty
};

/// Default grid resolution per dimension: 201, 101, 31, then none.
[[nodiscard]] int default_grid_resolution(int dimension);

/// Parses JSON text. Unknown keys and invalid values raise ConfigError with
/// the field path. Missing keys take their defaults.
[[nodiscard]] ExperimentConfig parse_config(const std::string& json_text);

[[nodiscard]] ExperimentConfig load_config(const std::string& path);

/// Checks every invariant; throws ConfigError.
void validate(const ExperimentConfig& config);

/// JSON with every field materialized.
[[nodiscard]] std::string to_json(const ExperimentConfig& config);

}  // namespace mlse
