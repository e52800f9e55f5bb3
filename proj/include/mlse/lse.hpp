#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mlse/gp.hpp"
#include "mlse/ground_truth.hpp"
#include "mlse/partition.hpp"
#include "mlse/schedule.hpp"

namespace mlse {

enum class Variant { Core, Fast };

[[nodiscard]] std::string variant_name(Variant v);
[[nodiscard]] Variant parse_variant(const std::string& s);

/// Frontier cell with running confidence bounds on f over the cell.
struct ActiveEntry {
    NodeId node;
    double u_bar = 0.0;
    double l_bar = 0.0;
    std::uint64_t eval_count = 0;
};

/// Posterior at a node center and (for h >= 1) at its parent's center.
struct NodeEstimates {
    Estimate own;
    std::optional<Estimate> parent;
};

/// One bounds refresh:
///   l_t = max(mu - beta sigma, mu_p - beta sigma_p - V_{h-1}) - V_h
///   u_t = min(mu + beta sigma, mu_p + beta sigma_p + V_{h-1}) + V_h
/// folded into the running l_bar (max) and u_bar (min). The parent branch is
/// skipped when `est.parent` is empty.
[[nodiscard]] ActiveEntry bounds_update(const ActiveEntry& entry, const NodeEstimates& est, double beta_n,
                                        double v_h, double v_parent);

/// max(u_bar - tau, tau - l_bar).
[[nodiscard]] double selection_index(const ActiveEntry& e, double tau);

/// Argmax of selection_index with ties going to lower depth, then lower
/// index. Empty when there is nothing left to select.
[[nodiscard]] std::optional<std::size_t> select_candidate(const std::vector<ActiveEntry>& active, double tau);

/// Lower depth first, then lower index.
[[nodiscard]] bool tie_before(NodeId a, NodeId b);

enum class Action { Evaluate, Refine, ClassifyS, ClassifyR };

[[nodiscard]] std::string action_name(Action a);

/// Trace line. For evaluate/refine, mu and sigma are the posterior at the
/// selected center before the action and l_bar/u_bar the bounds used for
/// selection; n_e counts evaluations including this one. For classify
/// records they describe the cell when it left the active set.
struct TraceRecord {
    std::uint64_t step = 0;
    Action action = Action::Evaluate;
    int depth = 0;
    std::uint64_t index = 1;
    double mu = 0.0;
    double sigma = 0.0;
    double l_bar = 0.0;
    double u_bar = 0.0;
    int n_e = 0;
};

inline constexpr const char* kTraceHeader = "step,action,depth,index,mu,sigma,l_bar,u_bar,n_e";

void write_trace(std::ostream& os, const std::vector<TraceRecord>& trace);
[[nodiscard]] std::vector<TraceRecord> read_trace(std::istream& is);

struct ClassifiedCell {
    NodeId node;
    Box cell;
};

/// Work counters outside posterior algebra, in coordinate-level units.
struct OpCounters {
    std::uint64_t selection = 0;  // entries scanned by selection
    std::uint64_t bounds = 0;     // center/cell coordinates touched by refreshes
    std::uint64_t classify = 0;   // entries scanned by pruning
    std::uint64_t split = 0;      // split and child construction work

    [[nodiscard]] std::uint64_t total() const { return selection + bounds + classify + split; }
};

struct RunSummary {
    Variant variant = Variant::Core;
    std::uint64_t steps = 0;
    int n_e = 0;
    int n_refinements = 0;
    int max_depth = 0;
    std::vector<int> evals_by_depth;
    OpCounters ops;
};

struct Classification {
    std::vector<ClassifiedCell> s_hat;
    std::vector<ClassifiedCell> r_hat;
    std::vector<ClassifiedCell> unclassified;
    std::vector<TraceRecord> trace;
    std::vector<Point> evaluated_points;
    std::vector<double> observations;
    RunSummary summary;
};

/// Options that alter the algorithm. Defaults reproduce the listing.
struct RunOptions {
    Variant variant = Variant::Core;
    /// Start children at the parent's running bounds instead of (-inf, +inf).
    bool inherit_parent_bounds = false;
};

/// Live state of one run of the multiscale level-set algorithm.
class LevelSetRun {
public:
    LevelSetRun(const AlgoParams& params, PartitionTree& tree, GroundTruth& truth, RunOptions options = {});

    /// Seeds the root, refreshes its bounds and applies the prior
    /// classification. Called by the constructor.
    void initialize();

    [[nodiscard]] bool finished() const;

    /// One selection plus refine-or-evaluate action. Returns false when the
    /// run was already finished.
    bool step();

    /// Steps until finished and returns the classification.
    Classification run();

    [[nodiscard]] Classification classification() const;

    [[nodiscard]] const std::vector<ActiveEntry>& active() const { return active_; }
    [[nodiscard]] const std::vector<ClassifiedCell>& s_hat() const { return s_hat_; }
    [[nodiscard]] const std::vector<ClassifiedCell>& r_hat() const { return r_hat_; }
    [[nodiscard]] const std::vector<TraceRecord>& trace() const { return trace_; }
    [[nodiscard]] const PosteriorState& posterior() const { return posterior_; }
    [[nodiscard]] const AlgoParams& params() const { return params_; }
    [[nodiscard]] const RunSummary& summary() const { return summary_; }
    [[nodiscard]] std::uint64_t t() const { return summary_.steps; }
    [[nodiscard]] int n_e() const { return summary_.n_e; }

    /// Posterior at a node center under the current data.
    Estimate estimate(NodeId id);

private:
    NodeEstimates node_estimates(NodeId id);
    void refresh_bounds();
    void classify_and_prune();
    void refine_entry(std::size_t k);
    void evaluate_entry(std::size_t k);

    AlgoParams params_;
    PartitionTree& tree_;
    GroundTruth& truth_;
    RunOptions options_;
    PosteriorState posterior_;

    std::vector<ActiveEntry> active_;
    std::vector<ClassifiedCell> s_hat_;
    std::vector<ClassifiedCell> r_hat_;
    std::vector<TraceRecord> trace_;
    RunSummary summary_;
    std::map<NodeId, Estimate> cache_;
};

/// Runs the algorithm to completion on a fresh tree over truth's domain.
[[nodiscard]] Classification run_level_set(const AlgoParams& params, PartitionTree& tree, GroundTruth& truth,
                                           RunOptions options = {});

/// True when the nodes tile the root exactly: pairwise non-nested and the
/// dyadic measures sum to one.
[[nodiscard]] bool nodes_tile_domain(const std::vector<NodeId>& nodes);

}  // namespace mlse
