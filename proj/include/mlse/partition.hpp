#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "mlse/types.hpp"

namespace mlse {

/// Constants (rho, v1, v2) of the ball-sandwich condition
/// B(x_{h,i}, v2 rho^h) c X_{h,i} c B(x_{h,i}, v1 rho^h).
struct PartitionParams {
    double rho = 0.5;
    double v1 = 2.0;
    double v2 = 0.5;

    [[nodiscard]] double rho_bar() const { return rho < 0.5 ? rho : 0.5; }
};

/// Throws std::invalid_argument unless 0 < v2 <= 1 <= v1 and 0 < rho < 1.
void validate(const PartitionParams& params);

/// Parameters for bisecting the longest side of a hypercube:
/// rho = 2^{-1/D}, v1 = 2 sqrt(D), v2 = 2^{1/D} / 4.
[[nodiscard]] PartitionParams hypercube_params(int dimension);

/// Node (h, i) with 1 <= i <= 2^h.
struct NodeId {
    int depth = 0;
    std::uint64_t index = 1;

    friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

/// Half-open membership [lo, hi) per axis, closed on the domain's upper faces.
[[nodiscard]] bool half_open_contains(const Box& domain, const Box& cell, const Point& x);

[[nodiscard]] NodeId parent_id(NodeId node);
[[nodiscard]] std::pair<NodeId, NodeId> child_ids(NodeId node);
[[nodiscard]] bool is_ancestor(NodeId ancestor, NodeId node);

struct PartitionNode {
    NodeId id;
    Point center;
    Box cell;
};

/// Lazily materialized binary tree of boxes over a hyper-rectangle.
///
/// Cells split at the midpoint of their longest side (lowest axis on ties);
/// child 2i-1 holds the lower half. Cells are half-open [lo, hi) except on
/// the upper faces of the domain, so every depth is an exact partition.
class PartitionTree {
public:
    PartitionTree(Box domain, PartitionParams params);

    [[nodiscard]] const Box& domain() const { return domain_; }
    [[nodiscard]] const PartitionParams& params() const { return params_; }
    [[nodiscard]] int dimension() const { return static_cast<int>(domain_.dimension()); }

    /// Materializes (h, i) and its ancestors on demand.
    const PartitionNode& node(NodeId id);

    [[nodiscard]] const PartitionNode* find(NodeId id) const;

    const PartitionNode& root() { return node({0, 1}); }

    /// Children (h+1, 2i-1) and (h+1, 2i).
    std::pair<const PartitionNode*, const PartitionNode*> refine(NodeId id);

    /// Node (h-1, ceil(i/2)); throws std::invalid_argument at the root.
    const PartitionNode& parent(NodeId id);

    /// Half-open membership with the domain's upper faces closed.
    [[nodiscard]] bool cell_contains(const Box& cell, const Point& x) const;

    /// Depth-h node whose cell contains x (descends from the root).
    NodeId locate(const Point& x, int depth);

    [[nodiscard]] std::size_t materialized_count() const { return nodes_.size(); }

    /// Coordinate-level work spent on splits so far (D per split).
    [[nodiscard]] std::uint64_t split_work() const { return split_work_; }

private:
    Box domain_;
    PartitionParams params_;
    std::map<NodeId, PartitionNode> nodes_;
    std::uint64_t split_work_ = 0;
};

struct X3Failure {
    NodeId node;
    bool outer = false;  // cell not inside B(center, v1 rho^h)
    bool inner = false;  // B(center, v2 rho^h) not inside the cell
    double outer_excess = 0.0;
    double inner_excess = 0.0;
};

struct X3Report {
    std::size_t nodes_checked = 0;
    std::vector<X3Failure> failures;

    [[nodiscard]] bool passed() const { return failures.empty(); }
};

/// Checks the ball sandwich analytically for every node up to max_depth:
/// the farthest corner must lie within v1 rho^h and the half shortest side
/// must be at least v2 rho^h (tolerance 1e-12).
[[nodiscard]] X3Report verify_x3(PartitionTree& tree, int max_depth);

}  // namespace mlse
