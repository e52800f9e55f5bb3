#include "mlse/ground_truth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "mlse/rng.hpp"

namespace mlse {

namespace {

constexpr double kPivotRatio = 1e-9;
constexpr double kNegativeVarianceTolerance = 1e-10;

std::vector<double> key_of(const Point& x) { return {x.data(), x.data() + x.size()}; }

// Number of times 2 divides every coordinate of the multi-index (0 counts as
// divisible arbitrarily often). Larger means coarser.
int coarseness(const std::vector<int>& idx) {
    int level = 62;
    for (int k : idx) {
        if (k == 0) continue;
        int tz = 0;
        while ((k & 1) == 0) {
            k >>= 1;
            ++tz;
        }
        level = std::min(level, tz);
    }
    return level;
}

}  // namespace

std::vector<Point> make_grid(const Box& domain, int resolution) {
    std::vector<Point> out;
    if (resolution <= 0) return out;
    const auto dim = static_cast<int>(domain.dimension());
    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(resolution);
    out.reserve(total);
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    for (std::size_t lin = 0; lin < total; ++lin) {
        Point p(dim);
        for (int d = 0; d < dim; ++d) {
            const double lo = domain.lower[d];
            const double hi = domain.upper[d];
            const int k = idx[static_cast<std::size_t>(d)];
            p[d] = resolution == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * k / (resolution - 1);
        }
        out.push_back(std::move(p));
        for (int d = 0; d < dim; ++d) {
            if (++idx[static_cast<std::size_t>(d)] < resolution) break;
            idx[static_cast<std::size_t>(d)] = 0;
        }
    }
    return out;
}

GroundTruth::GroundTruth(KernelSpec kernel, double noise_var, Box domain, int grid_resolution, std::uint64_t seed)
    : kernel_(std::move(kernel)),
      noise_var_(noise_var),
      domain_(std::move(domain)),
      resolution_(grid_resolution),
      seed_(seed),
      prior_var_(0.0),
      path_rng_(make_rng(seed, Stream::Path)),
      noise_rng_(make_rng(seed, Stream::Noise)) {
    validate(kernel_);
    if (!(noise_var_ > 0.0)) throw std::invalid_argument("ground truth: noise variance must be positive");
    if (grid_resolution < 0 || grid_resolution == 1) {
        throw std::invalid_argument("ground truth: grid resolution must be 0 or at least 2");
    }
    prior_var_ = prior_variance(kernel_);

    grid_points_ = make_grid(domain_, resolution_);
    if (grid_points_.empty()) return;

    const auto dim = static_cast<int>(domain_.dimension());
    std::vector<int> level(grid_points_.size());
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    for (std::size_t lin = 0; lin < grid_points_.size(); ++lin) {
        level[lin] = coarseness(idx);
        for (int d = 0; d < dim; ++d) {
            if (++idx[static_cast<std::size_t>(d)] < resolution_) break;
            idx[static_cast<std::size_t>(d)] = 0;
        }
    }
    std::vector<std::size_t> order(grid_points_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return level[a] > level[b]; });

    grid_values_.assign(grid_points_.size(), 0.0);
    for (std::size_t lin : order) grid_values_[lin] = materialize(grid_points_[lin]);
}

const double* GroundTruth::find(const Point& x) const {
    auto it = index_.find(key_of(x));
    return it == index_.end() ? nullptr : &values_[it->second];
}

double GroundTruth::query(const Point& x, bool with_noise) {
    if (x.size() != domain_.dimension()) throw std::invalid_argument("ground truth: dimension mismatch");
    if (!domain_.contains_closed(x, 1e-12)) throw std::invalid_argument("ground truth: point outside the domain");
    double f;
    if (const double* known = find(x)) {
        f = *known;
    } else {
        f = materialize(x);
    }
    if (!with_noise) return f;
    return f + std::sqrt(noise_var_) * noise_normal_(noise_rng_);
}

double GroundTruth::materialize(const Point& x) {
    Eigen::VectorXd v(n_pivots_);
    for (Eigen::Index i = 0; i < n_pivots_; ++i) {
        v[i] = covariance(kernel_, points_[pivots_[static_cast<std::size_t>(i)]], x);
    }
    if (n_pivots_ > 0) chol_.topLeftCorner(n_pivots_, n_pivots_).triangularView<Eigen::Lower>().solveInPlace(v);
    const double mean = n_pivots_ > 0 ? v.dot(white_.head(n_pivots_)) : 0.0;
    double var = prior_var_ - v.squaredNorm();
    if (var < -kNegativeVarianceTolerance) {
        throw NumericalError("ground truth: conditional variance " + std::to_string(var) + " is negative");
    }
    var = std::max(var, 0.0);
    const double z = path_normal_(path_rng_);
    const double value = mean + std::sqrt(var) * z;

    const std::size_t id = values_.size();
    points_.push_back(x);
    values_.push_back(value);
    index_.emplace(key_of(x), id);

    if (var > kPivotRatio * prior_var_) {
        const Eigen::Index t = n_pivots_;
        if (chol_.rows() <= t) {
            const Eigen::Index cap = std::max<Eigen::Index>(64, 2 * chol_.rows());
            chol_.conservativeResize(cap, cap);
            white_.conservativeResize(cap);
        }
        chol_.row(t).head(t) = v.transpose();
        chol_.row(t).tail(chol_.cols() - t).setZero();
        chol_(t, t) = std::sqrt(var);
        white_[t] = z;
        pivots_.push_back(id);
        ++n_pivots_;
    }
    return value;
}

double GroundTruth::grid_neighbor_slack() const {
    if (grid_points_.empty()) return 0.0;
    const auto dim = static_cast<std::size_t>(domain_.dimension());
    const auto m = static_cast<std::size_t>(resolution_);
    double slack = 0.0;
    std::size_t stride = 1;
    for (std::size_t d = 0; d < dim; ++d) {
        for (std::size_t lin = 0; lin < grid_values_.size(); ++lin) {
            if ((lin / stride) % m + 1 < m) {
                slack = std::max(slack, std::abs(grid_values_[lin + stride] - grid_values_[lin]));
            }
        }
        stride *= m;
    }
    return slack;
}

}  // namespace mlse
