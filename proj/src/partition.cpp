#include "mlse/partition.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mlse {

namespace {
constexpr int kMaxDepth = 62;
constexpr double kX3Tolerance = 1e-12;
}  // namespace

void validate(const PartitionParams& p) {
    if (!(p.rho > 0.0 && p.rho < 1.0)) throw std::invalid_argument("partition: rho must lie in (0, 1)");
    if (!(p.v2 > 0.0 && p.v2 <= 1.0)) throw std::invalid_argument("partition: v2 must lie in (0, 1]");
    if (!(p.v1 >= 1.0)) throw std::invalid_argument("partition: v1 must be at least 1");
}

PartitionParams hypercube_params(int dimension) {
    if (dimension < 1) throw std::invalid_argument("hypercube_params: dimension must be at least 1");
    const double d = dimension;
    // At depth kD + j the shortest side is 2^{-k-1} once j >= 1, so the
    // inscribed radius is rho^h * 2^{j/D - 2}; j = 1 is the binding case.
    return PartitionParams{std::pow(2.0, -1.0 / d), 2.0 * std::sqrt(d), std::pow(2.0, 1.0 / d) / 4.0};
}

NodeId parent_id(NodeId node) {
    if (node.depth <= 0) throw std::invalid_argument("root node has no parent");
    return {node.depth - 1, (node.index + 1) / 2};
}

std::pair<NodeId, NodeId> child_ids(NodeId node) {
    if (node.depth >= kMaxDepth) throw std::invalid_argument("partition depth limit reached");
    return {{node.depth + 1, 2 * node.index - 1}, {node.depth + 1, 2 * node.index}};
}

bool is_ancestor(NodeId ancestor, NodeId node) {
    if (ancestor.depth >= node.depth) return false;
    const int shift = node.depth - ancestor.depth;
    return ((node.index - 1) >> shift) + 1 == ancestor.index;
}

PartitionTree::PartitionTree(Box domain, PartitionParams params) : domain_(std::move(domain)), params_(params) {
    if (domain_.dimension() < 1) throw std::invalid_argument("partition: empty domain");
    for (Eigen::Index d = 0; d < domain_.dimension(); ++d) {
        if (!(domain_.upper[d] > domain_.lower[d])) throw std::invalid_argument("partition: degenerate domain box");
    }
    validate(params_);
    nodes_.emplace(NodeId{0, 1}, PartitionNode{{0, 1}, domain_.midpoint(), domain_});
}

const PartitionNode* PartitionTree::find(NodeId id) const {
    auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : &it->second;
}

const PartitionNode& PartitionTree::node(NodeId id) {
    if (id.depth < 0 || id.depth > kMaxDepth || id.index < 1 || id.index > (std::uint64_t{1} << id.depth)) {
        throw std::invalid_argument("partition: node (" + std::to_string(id.depth) + "," + std::to_string(id.index) +
                                    ") out of range");
    }
    if (const auto* n = find(id)) return *n;
    const NodeId up = parent_id(id);
    refine(up);
    return nodes_.at(id);
}

std::pair<const PartitionNode*, const PartitionNode*> PartitionTree::refine(NodeId id) {
    const auto [lo_id, hi_id] = child_ids(id);
    if (const auto* a = find(lo_id)) return {a, find(hi_id)};

    const Box cell = node(id).cell;
    const Eigen::VectorXd sides = cell.sides();
    Eigen::Index axis = 0;
    for (Eigen::Index d = 1; d < sides.size(); ++d) {
        if (sides[d] > sides[axis]) axis = d;
    }
    const double mid = 0.5 * (cell.lower[axis] + cell.upper[axis]);
    Box lower = cell;
    Box upper = cell;
    lower.upper[axis] = mid;
    upper.lower[axis] = mid;
    split_work_ += static_cast<std::uint64_t>(sides.size());

    const auto& a = nodes_.emplace(lo_id, PartitionNode{lo_id, lower.midpoint(), lower}).first->second;
    const auto& b = nodes_.emplace(hi_id, PartitionNode{hi_id, upper.midpoint(), upper}).first->second;
    return {&a, &b};
}

const PartitionNode& PartitionTree::parent(NodeId id) { return node(parent_id(id)); }

bool half_open_contains(const Box& domain, const Box& cell, const Point& x) {
    for (Eigen::Index d = 0; d < cell.dimension(); ++d) {
        if (x[d] < cell.lower[d]) return false;
        if (x[d] > cell.upper[d]) return false;
        if (x[d] == cell.upper[d] && cell.upper[d] != domain.upper[d]) return false;
    }
    return true;
}

bool PartitionTree::cell_contains(const Box& cell, const Point& x) const { return half_open_contains(domain_, cell, x); }

NodeId PartitionTree::locate(const Point& x, int depth) {
    NodeId cur{0, 1};
    if (!cell_contains(domain_, x)) throw std::invalid_argument("partition: point outside the domain");
    while (cur.depth < depth) {
        const auto [a, b] = refine(cur);
        cur = cell_contains(a->cell, x) ? a->id : b->id;
    }
    return cur;
}

X3Report verify_x3(PartitionTree& tree, int max_depth) {
    X3Report report;
    const auto& p = tree.params();
    for (int h = 0; h <= max_depth; ++h) {
        const double outer_r = p.v1 * std::pow(p.rho, h);
        const double inner_r = p.v2 * std::pow(p.rho, h);
        const std::uint64_t count = std::uint64_t{1} << h;
        for (std::uint64_t i = 1; i <= count; ++i) {
            const auto& n = tree.node({h, i});
            ++report.nodes_checked;
            // farthest corner from the center; nearest face for the inner ball
            const Eigen::VectorXd far = (n.cell.upper - n.center).cwiseAbs().cwiseMax((n.center - n.cell.lower).cwiseAbs());
            const double corner = far.norm();
            const double face = (n.center - n.cell.lower).cwiseMin(n.cell.upper - n.center).minCoeff();
            X3Failure f{n.id};
            if (corner > outer_r + kX3Tolerance) {
                f.outer = true;
                f.outer_excess = corner - outer_r;
            }
            if (inner_r > face + kX3Tolerance) {
                f.inner = true;
                f.inner_excess = inner_r - face;
            }
            if (f.outer || f.inner) report.failures.push_back(f);
        }
    }
    return report;
}

}  // namespace mlse
