#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mlse/kernel.hpp"
#include "mlse/partition.hpp"

namespace mlse {

/// Confidence width multiplier sqrt(2 log(2 n 2^{2 H} / delta)) with the
/// real-valued depth H = log(n) / (2 alpha log(1/rho_bar)). Requires n >= 2.
[[nodiscard]] double compute_beta_n(int n, double delta, double alpha, double rho_bar);

/// ceil(log(n) / (2 alpha log(1/rho_bar))). Requires n >= 2.
[[nodiscard]] int compute_h_max(int n, double alpha, double rho_bar);

/// (1 + sqrt(D))^D: covering constant of [0,1]^D under the euclidean metric.
[[nodiscard]] double default_covering_constant(int dimension);

/// Chaining constants entering V_h.
struct VConstants {
    double metric_dim_prime = 0.0;  // D_m / alpha
    double covering_prime = 0.0;    // C_a' for the exponent 2 D_m'
    double c2 = 0.0;
    double c3 = 0.0;
};

[[nodiscard]] VConstants compute_v_constants(const SmoothnessProfile& profile, double metric_dim,
                                             double covering_constant, double domain_diameter);

struct VSchedule {
    VConstants constants;
    std::vector<double> raw;   // before the backward pass
    std::vector<double> values;  // after V_h <- min(V_h, 2 V_{h+1})
};

/// V_h for h = 0 .. h_max + 1. Depth h_max + 1 is included because cells at
/// h_max may still be refined, so their children need a variation bound.
[[nodiscard]] VSchedule compute_v_schedule(const SmoothnessProfile& profile, const PartitionParams& params,
                                           int h_max, double delta, double metric_dim, double covering_constant,
                                           double v_scale, double domain_diameter);

/// q_h = ceil(noise_var beta^2 / V_h^2), at least 1.
[[nodiscard]] std::vector<std::uint64_t> compute_q_schedule(const std::vector<double>& v_schedule, double noise_var,
                                                            double beta_n);

struct AlgoParams {
    int budget = 0;
    double tau = 0.0;
    double delta = 0.1;
    double noise_var = 0.01;
    double alpha = 1.0;
    double beta_n = 0.0;
    int h_max = 0;
    std::vector<double> v_schedule;
    std::vector<std::uint64_t> q_schedule;
    double v_scale = 1.0;
    double covering_constant = 1.0;
    double metric_dim = 1.0;

    /// V_h, with depths past the schedule mapped to the last entry.
    [[nodiscard]] double v(int h) const;
    [[nodiscard]] std::uint64_t q(int h) const;
};

struct ScheduleInputs {
    int budget = 0;
    double tau = 0.0;
    double delta = 0.1;
    double noise_var = 0.01;
    double v_scale = 1.0;
    double metric_dim = 0.0;          // <= 0 selects the domain dimension
    double covering_constant = 0.0;   // <= 0 selects default_covering_constant
};

/// All schedules for a run on `tree`'s domain. Budgets below 2 use n = 2 in
/// the beta and depth formulas.
[[nodiscard]] AlgoParams make_algo_params(const ScheduleInputs& in, const SmoothnessProfile& profile,
                                          const PartitionTree& tree);

/// Invariant violations of a parameter set (empty when valid).
[[nodiscard]] std::vector<std::string> check_algo_params(const AlgoParams& params);

}  // namespace mlse
