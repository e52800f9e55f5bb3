#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mlse/lse.hpp"

namespace mlse {

/// Argmax of |tau - mu| + beta sigma + V_h over the active set, ties to
/// lower depth then lower index. `estimates[k]` is the posterior at
/// active[k]'s center.
[[nodiscard]] std::optional<std::size_t> select_candidate_fast(const std::vector<ActiveEntry>& active,
                                                               const std::vector<Estimate>& estimates, double tau,
                                                               const AlgoParams& params);

/// Count rule: refine once the center has q_h evaluations and h <= h_max.
[[nodiscard]] bool fast_should_refine(const ActiveEntry& entry, const AlgoParams& params);

}  // namespace mlse
