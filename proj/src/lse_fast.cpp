#include "mlse/lse_fast.hpp"

#include <cmath>
#include <stdexcept>

namespace mlse {

std::optional<std::size_t> select_candidate_fast(const std::vector<ActiveEntry>& active,
                                                 const std::vector<Estimate>& estimates, double tau,
                                                 const AlgoParams& params) {
    if (estimates.size() != active.size()) throw std::invalid_argument("select_candidate_fast: size mismatch");
    if (active.empty()) return std::nullopt;
    const auto score = [&](std::size_t k) {
        return std::abs(tau - estimates[k].mean) + params.beta_n * estimates[k].stddev + params.v(active[k].node.depth);
    };
    std::size_t best = 0;
    double best_v = score(0);
    for (std::size_t k = 1; k < active.size(); ++k) {
        const double v = score(k);
        if (v > best_v || (v == best_v && tie_before(active[k].node, active[best].node))) {
            best = k;
            best_v = v;
        }
    }
    return best;
}

bool fast_should_refine(const ActiveEntry& entry, const AlgoParams& params) {
    const int h = entry.node.depth;
    return h <= params.h_max && entry.eval_count >= params.q(h);
}

}  // namespace mlse
