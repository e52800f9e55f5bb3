#include "mlse/lse.hpp"
#include "mlse/lse_fast.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mlse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class Score>
std::optional<std::size_t> argmax_entry(const std::vector<ActiveEntry>& active, Score score) {
    if (active.empty()) return std::nullopt;
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

}  // namespace

bool tie_before(NodeId a, NodeId b) {
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.index < b.index;
}

std::string variant_name(Variant v) { return v == Variant::Core ? "core" : "fast"; }

Variant parse_variant(const std::string& s) {
    if (s == "core") return Variant::Core;
    if (s == "fast") return Variant::Fast;
    throw std::invalid_argument("unknown variant '" + s + "' (expected core or fast)");
}

std::string action_name(Action a) {
    switch (a) {
        case Action::Evaluate: return "evaluate";
        case Action::Refine: return "refine";
        case Action::ClassifyS: return "classify_s";
        case Action::ClassifyR: return "classify_r";
    }
    return "?";
}

ActiveEntry bounds_update(const ActiveEntry& entry, const NodeEstimates& est, double beta_n, double v_h,
                          double v_parent) {
    double lo = est.own.mean - beta_n * est.own.stddev;
    double hi = est.own.mean + beta_n * est.own.stddev;
    if (est.parent) {
        lo = std::max(lo, est.parent->mean - beta_n * est.parent->stddev - v_parent);
        hi = std::min(hi, est.parent->mean + beta_n * est.parent->stddev + v_parent);
    }
    ActiveEntry out = entry;
    out.l_bar = std::max(entry.l_bar, lo - v_h);
    out.u_bar = std::min(entry.u_bar, hi + v_h);
    return out;
}

double selection_index(const ActiveEntry& e, double tau) { return std::max(e.u_bar - tau, tau - e.l_bar); }

std::optional<std::size_t> select_candidate(const std::vector<ActiveEntry>& active, double tau) {
    return argmax_entry(active, [&](std::size_t k) { return selection_index(active[k], tau); });
}

void write_trace(std::ostream& os, const std::vector<TraceRecord>& trace) {
    os << kTraceHeader << '\n';
    std::ostringstream line;
    line << std::setprecision(17);
    for (const auto& r : trace) {
        line.str("");
        line << r.step << ',' << action_name(r.action) << ',' << r.depth << ',' << r.index << ',' << r.mu << ','
             << r.sigma << ',' << r.l_bar << ',' << r.u_bar << ',' << r.n_e << '\n';
        os << line.str();
    }
}

std::vector<TraceRecord> read_trace(std::istream& is) {
    std::vector<TraceRecord> out;
    std::string line;
    if (!std::getline(is, line) || line != kTraceHeader) throw std::invalid_argument("trace: missing header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string f[9];
        for (int i = 0; i < 9; ++i) {
            if (!std::getline(ls, f[i], ',')) throw std::invalid_argument("trace: short record '" + line + "'");
        }
        TraceRecord r;
        r.step = std::stoull(f[0]);
        if (f[1] == "evaluate") r.action = Action::Evaluate;
        else if (f[1] == "refine") r.action = Action::Refine;
        else if (f[1] == "classify_s") r.action = Action::ClassifyS;
        else if (f[1] == "classify_r") r.action = Action::ClassifyR;
        else throw std::invalid_argument("trace: unknown action '" + f[1] + "'");
        r.depth = std::stoi(f[2]);
        r.index = std::stoull(f[3]);
        r.mu = std::stod(f[4]);
        r.sigma = std::stod(f[5]);
        r.l_bar = std::stod(f[6]);
        r.u_bar = std::stod(f[7]);
        r.n_e = std::stoi(f[8]);
        out.push_back(r);
    }
    return out;
}

LevelSetRun::LevelSetRun(const AlgoParams& params, PartitionTree& tree, GroundTruth& truth, RunOptions options)
    : params_(params),
      tree_(tree),
      truth_(truth),
      options_(options),
      posterior_(truth.kernel(), params.noise_var, tree.domain().dimension()) {
    if (tree.domain().dimension() != truth.domain().dimension()) {
        throw std::invalid_argument("level-set run: tree and truth dimensions differ");
    }
    if (params_.v_schedule.empty() || params_.q_schedule.empty()) {
        throw std::invalid_argument("level-set run: empty schedules");
    }
    initialize();
}

void LevelSetRun::initialize() {
    active_.clear();
    s_hat_.clear();
    r_hat_.clear();
    trace_.clear();
    cache_.clear();
    summary_ = RunSummary{};
    summary_.variant = options_.variant;
    summary_.evals_by_depth.assign(static_cast<std::size_t>(params_.h_max) + 2, 0);
    active_.push_back(ActiveEntry{tree_.root().id, kInf, -kInf, 0});
    refresh_bounds();
    classify_and_prune();
}

bool LevelSetRun::finished() const { return active_.empty() || summary_.n_e >= params_.budget; }

Estimate LevelSetRun::estimate(NodeId id) {
    auto it = cache_.find(id);
    if (it != cache_.end()) return it->second;
    const Estimate e = posterior_.posterior(tree_.node(id).center);
    cache_.emplace(id, e);
    return e;
}

NodeEstimates LevelSetRun::node_estimates(NodeId id) {
    NodeEstimates est;
    est.own = estimate(id);
    if (id.depth > 0) est.parent = estimate(parent_id(id));
    return est;
}

void LevelSetRun::refresh_bounds() {
    const auto dim = static_cast<std::uint64_t>(tree_.dimension());
    for (auto& e : active_) {
        const int h = e.node.depth;
        const double v_parent = h > 0 ? params_.v(h - 1) : 0.0;
        e = bounds_update(e, node_estimates(e.node), params_.beta_n, params_.v(h), v_parent);
        summary_.ops.bounds += 2 * dim;
    }
}

void LevelSetRun::classify_and_prune() {
    std::vector<ActiveEntry> keep;
    keep.reserve(active_.size());
    for (const auto& e : active_) {
        ++summary_.ops.classify;
        Action a;
        if (e.l_bar >= params_.tau) {
            a = Action::ClassifyS;
        } else if (e.u_bar < params_.tau) {
            a = Action::ClassifyR;
        } else {
            keep.push_back(e);
            continue;
        }
        const auto& node = tree_.node(e.node);
        const Estimate est = estimate(e.node);
        (a == Action::ClassifyS ? s_hat_ : r_hat_).push_back(ClassifiedCell{node.id, node.cell});
        trace_.push_back(TraceRecord{summary_.steps, a, e.node.depth, e.node.index, est.mean, est.stddev, e.l_bar,
                                     e.u_bar, summary_.n_e});
    }
    active_ = std::move(keep);
}

void LevelSetRun::refine_entry(std::size_t k) {
    const ActiveEntry parent = active_[k];
    const auto [a, b] = tree_.refine(parent.node);
    const auto dim = static_cast<std::uint64_t>(tree_.dimension());
    // split axis search plus two child boxes and centers
    summary_.ops.split += dim + 2 * 3 * dim;
    ActiveEntry ca{a->id, kInf, -kInf, 0};
    ActiveEntry cb{b->id, kInf, -kInf, 0};
    if (options_.inherit_parent_bounds) {
        ca.u_bar = cb.u_bar = parent.u_bar;
        ca.l_bar = cb.l_bar = parent.l_bar;
    }
    active_[k] = ca;
    active_.insert(active_.begin() + static_cast<std::ptrdiff_t>(k) + 1, cb);
    ++summary_.n_refinements;
    summary_.max_depth = std::max(summary_.max_depth, a->id.depth);
}

void LevelSetRun::evaluate_entry(std::size_t k) {
    auto& e = active_[k];
    const Point& x = tree_.node(e.node).center;
    const double y = truth_.query(x, true);
    posterior_.update(x, y);
    cache_.clear();
    ++e.eval_count;
    ++summary_.n_e;
    const auto h = static_cast<std::size_t>(e.node.depth);
    if (h >= summary_.evals_by_depth.size()) summary_.evals_by_depth.resize(h + 1, 0);
    ++summary_.evals_by_depth[h];
}

bool LevelSetRun::step() {
    if (finished()) return false;

    std::optional<std::size_t> pick;
    std::vector<Estimate> estimates;
    if (options_.variant == Variant::Core) {
        pick = select_candidate(active_, params_.tau);
    } else {
        estimates.reserve(active_.size());
        for (const auto& e : active_) estimates.push_back(estimate(e.node));
        pick = select_candidate_fast(active_, estimates, params_.tau, params_);
    }
    summary_.ops.selection += active_.size();
    const std::size_t k = *pick;
    const ActiveEntry sel = active_[k];
    const Estimate before = estimate(sel.node);
    const int h = sel.node.depth;

    bool refine;
    if (options_.variant == Variant::Core) {
        refine = params_.beta_n * before.stddev < params_.v(h) && h <= params_.h_max;
    } else {
        refine = fast_should_refine(sel, params_);
    }

    ++summary_.steps;
    if (refine) {
        refine_entry(k);
    } else {
        evaluate_entry(k);
    }
    trace_.push_back(TraceRecord{summary_.steps, refine ? Action::Refine : Action::Evaluate, h, sel.node.index,
                                 before.mean, before.stddev, sel.l_bar, sel.u_bar, summary_.n_e});
    refresh_bounds();
    classify_and_prune();
    return true;
}

Classification LevelSetRun::run() {
    while (step()) {
    }
    return classification();
}

Classification LevelSetRun::classification() const {
    Classification c;
    c.s_hat = s_hat_;
    c.r_hat = r_hat_;
    for (const auto& e : active_) {
        const auto* n = tree_.find(e.node);
        c.unclassified.push_back(ClassifiedCell{e.node, n->cell});
    }
    c.trace = trace_;
    c.evaluated_points = posterior_.dataset().points;
    c.observations = posterior_.dataset().observations;
    c.summary = summary_;
    return c;
}

Classification run_level_set(const AlgoParams& params, PartitionTree& tree, GroundTruth& truth, RunOptions options) {
    LevelSetRun run(params, tree, truth, options);
    return run.run();
}

bool nodes_tile_domain(const std::vector<NodeId>& nodes) {
    if (nodes.empty()) return false;
    std::set<NodeId> seen;
    int deepest = 0;
    for (const auto& n : nodes) {
        if (!seen.insert(n).second) return false;
        deepest = std::max(deepest, n.depth);
    }
    for (const auto& n : nodes) {
        NodeId up = n;
        while (up.depth > 0) {
            up = parent_id(up);
            if (seen.count(up)) return false;
        }
    }
    // dyadic measure sum in units of 2^{-deepest}; depth <= 62 keeps this exact
    std::uint64_t total = 0;
    const std::uint64_t target = std::uint64_t{1} << deepest;
    for (const auto& n : nodes) {
        total += std::uint64_t{1} << (deepest - n.depth);
        if (total > target) return false;
    }
    return total == target;
}

}  // namespace mlse
