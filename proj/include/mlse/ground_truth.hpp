#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "mlse/kernel.hpp"
#include "mlse/types.hpp"

namespace mlse {

/// A single sample path of GP(0, k), realized lazily.
///
/// The dense grid (resolution points per axis) is drawn at construction in a
/// coarse-to-fine order; any other point is drawn on first query from its
/// Gaussian conditional given every value materialized so far and memoized.
/// Conditioning runs through an incremental Cholesky factor over a pivot set:
/// a point whose conditional variance falls below 1e-9 * k(x, x) is fully
/// determined by the earlier values and is not added to the pivot set.
class GroundTruth {
public:
    /// grid_resolution == 0 disables the grid (lazy queries only).
    GroundTruth(KernelSpec kernel, double noise_var, Box domain, int grid_resolution, std::uint64_t seed);

    /// f(x), plus fresh N(0, noise_var) noise when with_noise is set.
    double query(const Point& x, bool with_noise);

    /// Noise-free value of an already materialized point, if any.
    [[nodiscard]] const double* find(const Point& x) const;

    [[nodiscard]] const KernelSpec& kernel() const { return kernel_; }
    [[nodiscard]] double noise_var() const { return noise_var_; }
    [[nodiscard]] const Box& domain() const { return domain_; }
    [[nodiscard]] int grid_resolution() const { return resolution_; }
    [[nodiscard]] std::uint64_t seed() const { return seed_; }

    [[nodiscard]] const std::vector<Point>& grid_points() const { return grid_points_; }
    [[nodiscard]] const std::vector<double>& grid_values() const { return grid_values_; }

    /// Largest |f(g) - f(g')| over grid points adjacent along one axis.
    [[nodiscard]] double grid_neighbor_slack() const;

    [[nodiscard]] std::size_t materialized_count() const { return values_.size(); }
    [[nodiscard]] std::size_t pivot_count() const { return static_cast<std::size_t>(n_pivots_); }

private:
    double materialize(const Point& x);

    KernelSpec kernel_;
    double noise_var_;
    Box domain_;
    int resolution_;
    std::uint64_t seed_;
    double prior_var_;

    std::mt19937_64 path_rng_;
    std::mt19937_64 noise_rng_;
    std::normal_distribution<double> path_normal_;
    std::normal_distribution<double> noise_normal_;

    std::map<std::vector<double>, std::size_t> index_;
    std::vector<Point> points_;
    std::vector<double> values_;

    std::vector<std::size_t> pivots_;
    Eigen::Index n_pivots_ = 0;
    Eigen::MatrixXd chol_;
    Eigen::VectorXd white_;

    std::vector<Point> grid_points_;
    std::vector<double> grid_values_;
};

/// Grid points of a box with `resolution` points per axis, in row-major
/// (axis 0 fastest) order.
[[nodiscard]] std::vector<Point> make_grid(const Box& domain, int resolution);

}  // namespace mlse
