#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "mlse/types.hpp"

namespace mlse {

enum class KernelFamily { SquaredExponential, Matern, RationalQuadratic, WeightedSum };

enum class MaternNu { Half, ThreeHalves, FiveHalves };

[[nodiscard]] double nu_value(MaternNu nu);

struct WeightedKernel;

/// Stationary isotropic covariance function.
///
/// Parametrisation (r = euclidean distance):
///   SquaredExponential  scale * exp(-r^2 / length)
///   Matern(nu)          scale * m_nu(sqrt(2 nu) r / length)
///   RationalQuadratic   scale * (1 + r^2 / (shape * length))^(-shape)
///   WeightedSum         sum_i weight_i * k_i(r), weights > 0
///
/// The squared exponential uses `length` without squaring so that its
/// canonical metric is sqrt(2 scale (1 - exp(-r^2/length))).
struct KernelSpec {
    KernelFamily family = KernelFamily::SquaredExponential;
    double scale = 1.0;
    double length = 1.0;
    MaternNu nu = MaternNu::Half;
    double rq_shape = 1.0;
    std::vector<WeightedKernel> components;

    static KernelSpec squared_exponential(double scale, double length);
    static KernelSpec matern(MaternNu nu, double scale, double length);
    static KernelSpec rational_quadratic(double scale, double length, double shape);
    static KernelSpec weighted_sum(std::vector<WeightedKernel> components);
};

struct WeightedKernel {
    double weight = 1.0;
    KernelSpec kernel;
};

/// Throws std::invalid_argument on non-positive parameters or empty sums.
void validate(const KernelSpec& spec);

/// Short comma-free identifier, e.g. "se:1:1" or "0.5*se:1:1+0.5*matern12:1:1".
[[nodiscard]] std::string kernel_name(const KernelSpec& spec);

/// k as a function of the separation distance.
[[nodiscard]] double covariance_at(const KernelSpec& spec, double distance);

/// k(x, x); the same for every x.
[[nodiscard]] double prior_variance(const KernelSpec& spec);

/// Throws std::invalid_argument when the points differ in dimension.
[[nodiscard]] double covariance(const KernelSpec& spec, const Point& x1, const Point& x2);

/// d_k as a function of separation distance; throws NumericalError when the
/// radicand is below -1e-12 and clamps smaller negatives to zero.
[[nodiscard]] double canonical_metric_at(const KernelSpec& spec, double distance);

[[nodiscard]] double canonical_metric(const KernelSpec& spec, const Point& x1, const Point& x2);

[[nodiscard]] Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const std::vector<Point>& points);

/// Modulus g and Hoelder constants satisfying d_k(x, y) <= g(|x - y|) and
/// g(r) <= c_k r^alpha for r <= delta_k.
class SmoothnessProfile {
public:
    SmoothnessProfile() = default;

    [[nodiscard]] double alpha() const { return alpha_; }
    [[nodiscard]] double c_k() const { return c_k_; }
    [[nodiscard]] double delta_k() const { return delta_k_; }

    /// g(r): monotone envelope of d_k at separation <= r.
    [[nodiscard]] double modulus(double r) const;

    /// Radii on which the envelope is tabulated (log-spaced).
    [[nodiscard]] const std::vector<double>& radius_grid() const { return radii_; }

private:
    friend SmoothnessProfile smoothness_profile(const KernelSpec& spec, double domain_diameter);

    KernelSpec kernel_;
    double alpha_ = 1.0;
    double c_k_ = 0.0;
    double delta_k_ = 0.0;
    std::vector<double> radii_;
    std::vector<double> envelope_;
};

/// Hoelder exponent used for the kernel: 1 for SE and RQ, min(nu, 1) for
/// Matern, the minimum over components for sums.
[[nodiscard]] double holder_exponent(const KernelSpec& spec);

[[nodiscard]] SmoothnessProfile smoothness_profile(const KernelSpec& spec, double domain_diameter);

}  // namespace mlse
