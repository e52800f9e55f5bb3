#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "mlse/kernel.hpp"
#include "mlse/types.hpp"

namespace mlse {

struct Dataset {
    std::vector<Point> points;
    std::vector<double> observations;
    double noise_var = 1.0;

    [[nodiscard]] std::size_t size() const { return points.size(); }
};

/// Posterior mean and standard deviation at a single point.
struct Estimate {
    double mean = 0.0;
    double stddev = 0.0;
};

/// Exact GP posterior under a zero-mean prior with homoscedastic noise.
///
/// Holds the lower Cholesky factor L of J = K + noise_var * I together with
/// L^{-1} y. Appending an observation extends L by one row in O(t^2). If the
/// new pivot is not positive the factor is rebuilt with diagonal jitter
/// 1e-10 * trace(J) / t, retried up to three times.
class PosteriorState {
public:
    PosteriorState(KernelSpec kernel, double noise_var, Eigen::Index dimension);

    /// Full factorization of an existing dataset.
    static PosteriorState from_dataset(KernelSpec kernel, const Dataset& data);

    [[nodiscard]] Estimate posterior(const Point& x) const;

    void update(const Point& x, double y);

    [[nodiscard]] const Dataset& dataset() const { return data_; }
    [[nodiscard]] const KernelSpec& kernel() const { return kernel_; }
    [[nodiscard]] std::size_t size() const { return data_.size(); }
    [[nodiscard]] Eigen::Index dimension() const { return dim_; }
    [[nodiscard]] double noise_var() const { return data_.noise_var; }
    [[nodiscard]] double jitter() const { return jitter_; }

    /// Copy of the active t x t lower factor.
    [[nodiscard]] Eigen::MatrixXd factor() const;

    /// Copy of L^{-1} y.
    [[nodiscard]] Eigen::VectorXd solved_observations() const;

private:
    void check_point(const Point& x) const;
    void ensure_capacity(Eigen::Index n);
    void refactor();

    KernelSpec kernel_;
    Dataset data_;
    Eigen::Index dim_ = 0;
    Eigen::Index n_ = 0;
    double jitter_ = 0.0;
    double prior_var_ = 1.0;
    Eigen::MatrixXd chol_;
    Eigen::VectorXd solved_;
};

}  // namespace mlse
