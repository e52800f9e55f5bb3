#include "mlse/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "mlse/rng.hpp"

namespace mlse {

namespace {

constexpr double kGridTol = 1e-9;

// Closed [k_lo, k_hi] range of grid indices along one axis inside [a, b].
std::pair<long, long> axis_range(double lo, double hi, int m, double a, double b) {
    const double step = (hi - lo) / (m - 1);
    long k_lo = static_cast<long>(std::ceil((a - lo) / step - kGridTol));
    long k_hi = static_cast<long>(std::floor((b - lo) / step + kGridTol));
    k_lo = std::max(k_lo, 0L);
    k_hi = std::min(k_hi, static_cast<long>(m - 1));
    return {k_lo, k_hi};
}

double f_at(const GroundTruth& truth, const Point& x) {
    const double* v = truth.find(x);
    if (!v) throw std::logic_error("diagnostics: value at an evaluated center was never materialized");
    return *v;
}

}  // namespace

// ---------------------------------------------------------------------------

DiscrepancyReport discrepancy(const std::vector<double>& grid_values, const std::vector<char>& inside_s, double tau,
                              int grid_resolution) {
    if (grid_values.size() != inside_s.size()) throw std::invalid_argument("discrepancy: size mismatch");
    DiscrepancyReport r;
    r.grid_resolution = grid_resolution;
    r.grid_points = grid_values.size();
    std::size_t diff = 0;
    for (std::size_t g = 0; g < grid_values.size(); ++g) {
        const bool truly = grid_values[g] >= tau;
        if (truly != static_cast<bool>(inside_s[g])) {
            ++diff;
            r.l_value = std::max(r.l_value, std::abs(grid_values[g] - tau));
        }
    }
    r.sym_diff_fraction = grid_values.empty() ? 0.0 : static_cast<double>(diff) / static_cast<double>(grid_values.size());
    return r;
}

std::vector<std::size_t> grid_indices_in(const GroundTruth& truth, const Box& box) {
    std::vector<std::size_t> out;
    const int m = truth.grid_resolution();
    if (m < 2) return out;
    const Box& dom = truth.domain();
    const auto dim = static_cast<int>(dom.dimension());
    std::vector<std::pair<long, long>> ranges;
    for (int d = 0; d < dim; ++d) {
        ranges.push_back(axis_range(dom.lower[d], dom.upper[d], m, box.lower[d], box.upper[d]));
        if (ranges.back().first > ranges.back().second) return out;
    }
    std::vector<long> k(static_cast<std::size_t>(dim));
    for (int d = 0; d < dim; ++d) k[static_cast<std::size_t>(d)] = ranges[static_cast<std::size_t>(d)].first;
    while (true) {
        std::size_t lin = 0;
        std::size_t stride = 1;
        for (int d = 0; d < dim; ++d) {
            lin += static_cast<std::size_t>(k[static_cast<std::size_t>(d)]) * stride;
            stride *= static_cast<std::size_t>(m);
        }
        out.push_back(lin);
        int d = 0;
        for (; d < dim; ++d) {
            auto& kd = k[static_cast<std::size_t>(d)];
            if (++kd <= ranges[static_cast<std::size_t>(d)].second) break;
            kd = ranges[static_cast<std::size_t>(d)].first;
        }
        if (d == dim) break;
    }
    return out;
}

std::vector<char> grid_membership(const GroundTruth& truth, const std::vector<ClassifiedCell>& cells) {
    std::vector<char> inside(truth.grid_points().size(), 0);
    for (const auto& c : cells) {
        for (std::size_t g : grid_indices_in(truth, c.cell)) {
            if (half_open_contains(truth.domain(), c.cell, truth.grid_points()[g])) inside[g] = 1;
        }
    }
    return inside;
}

DiscrepancyReport discrepancy(const Classification& c, const GroundTruth& truth, double tau) {
    if (truth.grid_points().empty()) throw std::invalid_argument("discrepancy: ground truth has no grid");
    return discrepancy(truth.grid_values(), grid_membership(truth, c.s_hat), tau, truth.grid_resolution());
}

// ---------------------------------------------------------------------------

double mutual_information(const std::vector<Point>& points, const KernelSpec& kernel, double noise_var) {
    if (points.empty()) return 0.0;
    if (!(noise_var > 0.0)) throw std::invalid_argument("mutual_information: noise variance must be positive");
    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd a = gram_matrix(kernel, points) / noise_var;
    a.diagonal().array() += 1.0;
    const double jitter_unit = 1e-10 * a.trace() / static_cast<double>(n);
    for (int attempt = 0; attempt <= 3; ++attempt) {
        Eigen::LLT<Eigen::MatrixXd> llt(a);
        if (llt.info() == Eigen::Success) {
            return llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        }
        a.diagonal().array() += jitter_unit;
    }
    throw NumericalError("mutual_information: factorization failed after jitter");
}

double info_constant_c4(const KernelSpec& kernel, double noise_var) {
    const double z = prior_variance(kernel) / noise_var;
    return z / std::log1p(z);
}

InfoGainReport info_accounting(const Classification& c, const KernelSpec& kernel, double noise_var) {
    InfoGainReport r;
    r.c4 = info_constant_c4(kernel, noise_var);
    std::map<int, LevelInfo> levels;
    for (const auto& rec : c.trace) {
        if (rec.action != Action::Evaluate) continue;
        const double v = rec.sigma * rec.sigma;
        r.j_n += v;
        auto& li = levels[rec.depth];
        li.h = rec.depth;
        ++li.n_h;
        li.j_nh += v;
    }
    for (auto& [h, li] : levels) r.per_level.push_back(li);
    r.mutual_info = mutual_information(c.evaluated_points, kernel, noise_var);
    return r;
}

double info_level_term(const std::vector<double>& eigen_desc, int n_h, int t_h, std::uint64_t m_h, double noise_var) {
    double tail = 0.0;
    for (std::size_t i = static_cast<std::size_t>(t_h); i < eigen_desc.size(); ++i) tail += eigen_desc[i];
    double best = -std::numeric_limits<double>::infinity();
    for (int s = 1; s <= n_h; ++s) {
        const double v = t_h * std::log(s * static_cast<double>(m_h) / noise_var) + (n_h - s) / noise_var * tail;
        best = std::max(best, v);
    }
    return best;
}

int level_bound_check(InfoGainReport& report, const Classification& c, PartitionTree& tree,
                         const KernelSpec& kernel, double noise_var, double delta, int h_max,
                         const LevelBoundOptions& options) {
    const auto& p = tree.params();
    const int dim = tree.dimension();
    auto rng = make_rng(options.seed, Stream::NetSampling);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // distinct evaluated nodes per depth, in order of first evaluation
    std::map<int, std::vector<NodeId>> centers;
    for (const auto& rec : c.trace) {
        if (rec.action != Action::Evaluate) continue;
        auto& v = centers[rec.depth];
        const NodeId id{rec.depth, rec.index};
        if (std::find(v.begin(), v.end(), id) == v.end()) v.push_back(id);
    }

    int violations = 0;
    const double depth_split = std::max(h_max, 1);
    for (auto& li : report.per_level) {
        if (li.n_h <= 0) continue;
        const int h = li.h;
        const double two_h = std::ldexp(1.0, h);
        li.m_h = static_cast<std::uint64_t>(std::max(1.0, std::ceil(two_h * std::log(two_h * depth_split / delta))));
        li.samples = std::min(li.m_h, options.max_samples);
        li.subsampled = li.samples < li.m_h;
        li.eps_h = std::min(p.v2 * std::pow(p.rho, h), 1.0 / li.n_h);

        // eps_h <= v2 rho^h keeps every ball inside its cell, so no rejection step
        const auto& ids = centers[h];
        std::uniform_int_distribution<std::size_t> pick(0, ids.size() - 1);
        std::vector<Point> pts;
        pts.reserve(li.samples);
        for (std::uint64_t j = 0; j < li.samples; ++j) {
            const Point& center = tree.node(ids[pick(rng)]).center;
            Eigen::VectorXd dir(dim);
            for (int d = 0; d < dim; ++d) dir[d] = normal(rng);
            dir.normalize();
            const double radius = li.eps_h * std::pow(unif(rng), 1.0 / dim);
            pts.push_back(center + radius * dir);
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_matrix(kernel, pts), Eigen::EigenvaluesOnly);
        std::vector<double> eig(static_cast<std::size_t>(es.eigenvalues().size()));
        const double scale = static_cast<double>(li.m_h) / static_cast<double>(li.samples);
        for (std::size_t i = 0; i < eig.size(); ++i) {
            eig[i] = std::max(0.0, es.eigenvalues()[static_cast<Eigen::Index>(i)]) * scale;
        }
        std::sort(eig.begin(), eig.end(), std::greater<>());

        li.i_h = std::numeric_limits<double>::infinity();
        for (int t = 1; t <= li.n_h; ++t) {
            const double v = info_level_term(eig, li.n_h, t, li.m_h, noise_var);
            if (v < li.i_h) {
                li.i_h = v;
                li.best_t = t;
            }
        }
        li.bound = report.c4 * (li.i_h + li.n_h * li.eps_h);
        li.violated = li.j_nh > li.bound;
        if (li.violated) ++violations;
    }
    return violations;
}

// ---------------------------------------------------------------------------

int packing_estimate(const std::vector<Point>& points, double radius) {
    std::vector<const Point*> kept;
    for (const auto& x : points) {
        bool ok = true;
        for (const Point* y : kept) {
            if ((x - *y).norm() < radius) {
                ok = false;
                break;
            }
        }
        if (ok) kept.push_back(&x);
    }
    return static_cast<int>(kept.size());
}

RateFit rate_fit(const std::vector<double>& budgets, const std::vector<double>& median_errors, double alpha,
                 int dimension) {
    if (budgets.size() != median_errors.size()) throw std::invalid_argument("rate_fit: size mismatch");
    if (budgets.size() < 3) throw std::invalid_argument("rate_fit: need at least three budgets");
    RateFit f;
    f.budgets = budgets;
    f.median_errors = median_errors;
    f.theory_slope = -alpha / (dimension + 2.0 * alpha);
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < budgets.size(); ++i) {
        const bool drop = !(median_errors[i] > 0.0) || !(budgets[i] > 0.0);
        f.excluded.push_back(drop ? 1 : 0);
        if (drop) continue;
        lx.push_back(std::log(budgets[i]));
        ly.push_back(std::log(median_errors[i]));
    }
    if (lx.size() < 2) {
        f.slope = std::numeric_limits<double>::quiet_NaN();
        f.intercept = std::numeric_limits<double>::quiet_NaN();
        return f;
    }
    const double n = static_cast<double>(lx.size());
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

// ---------------------------------------------------------------------------

RunDiagnostics diagnose_run(const Classification& c, PartitionTree& tree, const GroundTruth& truth,
                            const AlgoParams& params) {
    RunDiagnostics r;
    r.slack = truth.grid_neighbor_slack();
    const auto& gv = truth.grid_values();

    struct CellStats {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
    };
    std::map<NodeId, CellStats> stats_cache;
    const auto cell_stats = [&](NodeId id) -> const CellStats& {
        auto it = stats_cache.find(id);
        if (it != stats_cache.end()) return it->second;
        const auto& node = tree.node(id);
        CellStats s;
        for (std::size_t g : grid_indices_in(truth, node.cell)) {
            s.lo = std::min(s.lo, gv[g]);
            s.hi = std::max(s.hi, gv[g]);
        }
        if (const double* fc = truth.find(node.center)) {
            s.lo = std::min(s.lo, *fc);
            s.hi = std::max(s.hi, *fc);
        }
        return stats_cache.emplace(id, s).first->second;
    };

    std::map<NodeId, std::uint64_t> evals;
    std::vector<NodeId> touched;
    double prev_a = std::numeric_limits<double>::infinity();
    for (const auto& rec : c.trace) {
        const NodeId id{rec.depth, rec.index};
        touched.push_back(id);
        if (rec.action == Action::Evaluate || rec.action == Action::Refine) {
            const double a = std::max(rec.u_bar - params.tau, params.tau - rec.l_bar);
            if (c.summary.variant == Variant::Core && a > prev_a) {
                r.a_t_monotone = false;
                r.a_t_max_increase = std::max(r.a_t_max_increase, a - prev_a);
            }
            prev_a = a;
        }
        if (rec.action != Action::Evaluate) continue;
        ++evals[id];
        const Point& x = tree.node(id).center;
        const double fx = f_at(truth, x);
        if (std::abs(fx - rec.mu) > params.beta_n * rec.sigma) ++r.e1_violations;

        const auto& s = cell_stats(id);
        const double dev = std::max(std::abs(s.hi - params.tau), std::abs(s.lo - params.tau));
        ++r.deviation_checked;
        if (dev > 10.0 * params.v(rec.depth)) ++r.deviation_v_failures;
        if (rec.depth < params.h_max && dev > 4.0 * params.beta_n * rec.sigma) ++r.deviation_sigma_failures;
    }
    for (const auto& e : c.unclassified) touched.push_back(e.node);

    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    for (const auto& id : touched) {
        const auto& s = cell_stats(id);
        if (s.hi >= s.lo && s.hi - s.lo > params.v(id.depth)) ++r.e2_violations;
    }

    for (const auto& [id, count] : evals) {
        if (id.depth < params.h_max && count > params.q(id.depth)) ++r.q_cap_violations;
    }

    for (const auto& cell : c.s_hat) {
        const auto& s = cell_stats(cell.node);
        if (s.hi >= s.lo && s.lo < params.tau - 2.0 * r.slack) ++r.soundness_failures;
    }
    for (const auto& cell : c.r_hat) {
        const auto& s = cell_stats(cell.node);
        if (s.hi >= s.lo && !(s.hi < params.tau + r.slack)) ++r.soundness_failures;
    }
    return r;
}

}  // namespace mlse
