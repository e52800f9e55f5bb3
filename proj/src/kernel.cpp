#include "mlse/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mlse {

namespace {

constexpr int kFitGridSize = 10000;
constexpr double kFitSafety = 1.05;
constexpr double kFitLowerRatio = 1e-8;
constexpr double kRadicandTolerance = 1e-12;

std::vector<double> log_spaced(double lo, double hi, int count) {
    std::vector<double> out(static_cast<std::size_t>(count));
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (int i = 0; i < count; ++i) {
        out[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (count - 1));
    }
    out.back() = hi;
    return out;
}

std::string format_number(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// max over the fit grid of d(r) / r^alpha where d is the metric of
// weight * k.
double fit_holder_constant(const KernelSpec& spec, double weight, double alpha, double delta_k) {
    const auto radii = log_spaced(delta_k * kFitLowerRatio, delta_k, kFitGridSize);
    double best = 0.0;
    const double root_w = std::sqrt(weight);
    for (double r : radii) {
        best = std::max(best, root_w * canonical_metric_at(spec, r) / std::pow(r, alpha));
    }
    return kFitSafety * best;
}

}  // namespace

double nu_value(MaternNu nu) {
    switch (nu) {
        case MaternNu::Half: return 0.5;
        case MaternNu::ThreeHalves: return 1.5;
        case MaternNu::FiveHalves: return 2.5;
    }
    return 0.5;
}

KernelSpec KernelSpec::squared_exponential(double scale, double length) {
    KernelSpec s;
    s.family = KernelFamily::SquaredExponential;
    s.scale = scale;
    s.length = length;
    return s;
}

KernelSpec KernelSpec::matern(MaternNu nu, double scale, double length) {
    KernelSpec s;
    s.family = KernelFamily::Matern;
    s.nu = nu;
    s.scale = scale;
    s.length = length;
    return s;
}

KernelSpec KernelSpec::rational_quadratic(double scale, double length, double shape) {
    KernelSpec s;
    s.family = KernelFamily::RationalQuadratic;
    s.scale = scale;
    s.length = length;
    s.rq_shape = shape;
    return s;
}

KernelSpec KernelSpec::weighted_sum(std::vector<WeightedKernel> components) {
    KernelSpec s;
    s.family = KernelFamily::WeightedSum;
    s.components = std::move(components);
    return s;
}

void validate(const KernelSpec& spec) {
    if (spec.family == KernelFamily::WeightedSum) {
        if (spec.components.empty()) throw std::invalid_argument("kernel sum has no components");
        for (const auto& c : spec.components) {
            if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
                throw std::invalid_argument("kernel sum weights must be positive");
            }
            validate(c.kernel);
        }
        return;
    }
    if (!(spec.scale > 0.0) || !std::isfinite(spec.scale)) throw std::invalid_argument("kernel scale must be positive");
    if (!(spec.length > 0.0) || !std::isfinite(spec.length)) throw std::invalid_argument("kernel length must be positive");
    if (spec.family == KernelFamily::RationalQuadratic && !(spec.rq_shape > 0.0)) {
        throw std::invalid_argument("rational quadratic shape must be positive");
    }
}

std::string kernel_name(const KernelSpec& spec) {
    const auto tail = [&] { return ":" + format_number(spec.scale) + ":" + format_number(spec.length); };
    switch (spec.family) {
        case KernelFamily::SquaredExponential: return "se" + tail();
        case KernelFamily::Matern:
            switch (spec.nu) {
                case MaternNu::Half: return "matern12" + tail();
                case MaternNu::ThreeHalves: return "matern32" + tail();
                case MaternNu::FiveHalves: return "matern52" + tail();
            }
            break;
        case KernelFamily::RationalQuadratic: return "rq" + tail() + ":" + format_number(spec.rq_shape);
        case KernelFamily::WeightedSum: {
            std::string out;
            for (const auto& c : spec.components) {
                if (!out.empty()) out += "+";
                out += format_number(c.weight) + "*" + kernel_name(c.kernel);
            }
            return out;
        }
    }
    return "unknown";
}

double covariance_at(const KernelSpec& spec, double distance) {
    const double r = std::abs(distance);
    switch (spec.family) {
        case KernelFamily::SquaredExponential:
            return spec.scale * std::exp(-r * r / spec.length);
        case KernelFamily::Matern: {
            switch (spec.nu) {
                case MaternNu::Half:
                    return spec.scale * std::exp(-r / spec.length);
                case MaternNu::ThreeHalves: {
                    const double z = std::sqrt(3.0) * r / spec.length;
                    return spec.scale * (1.0 + z) * std::exp(-z);
                }
                case MaternNu::FiveHalves: {
                    const double z = std::sqrt(5.0) * r / spec.length;
                    return spec.scale * (1.0 + z + z * z / 3.0) * std::exp(-z);
                }
            }
            break;
        }
        case KernelFamily::RationalQuadratic:
            return spec.scale * std::pow(1.0 + r * r / (spec.rq_shape * spec.length), -spec.rq_shape);
        case KernelFamily::WeightedSum: {
            double total = 0.0;
            for (const auto& c : spec.components) total += c.weight * covariance_at(c.kernel, r);
            return total;
        }
    }
    return 0.0;
}

double prior_variance(const KernelSpec& spec) { return covariance_at(spec, 0.0); }

double covariance(const KernelSpec& spec, const Point& x1, const Point& x2) {
    if (x1.size() != x2.size()) {
        throw std::invalid_argument("covariance: points have dimensions " + std::to_string(x1.size()) + " and " +
                                    std::to_string(x2.size()));
    }
    return covariance_at(spec, (x1 - x2).norm());
}

double canonical_metric_at(const KernelSpec& spec, double distance) {
    double radicand = 0.0;
    if (spec.family == KernelFamily::SquaredExponential) {
        // 1 - exp(-u) without cancellation at small separations
        radicand = -2.0 * spec.scale * std::expm1(-distance * distance / spec.length);
    } else if (spec.family == KernelFamily::WeightedSum) {
        for (const auto& c : spec.components) {
            const double d = canonical_metric_at(c.kernel, distance);
            radicand += c.weight * d * d;
        }
    } else {
        radicand = 2.0 * (prior_variance(spec) - covariance_at(spec, distance));
    }
    if (radicand < -kRadicandTolerance) {
        throw NumericalError("canonical metric radicand " + std::to_string(radicand) + " is negative");
    }
    return std::sqrt(std::max(radicand, 0.0));
}

double canonical_metric(const KernelSpec& spec, const Point& x1, const Point& x2) {
    if (x1.size() != x2.size()) throw std::invalid_argument("canonical_metric: dimension mismatch");
    const double k11 = covariance(spec, x1, x1);
    const double k22 = covariance(spec, x2, x2);
    const double k12 = covariance(spec, x1, x2);
    const double radicand = k11 + k22 - 2.0 * k12;
    if (radicand < -kRadicandTolerance) {
        throw NumericalError("canonical metric radicand " + std::to_string(radicand) + " is negative");
    }
    if (radicand <= 0.0) return 0.0;
    // the closed form avoids cancellation for nearby points
    return canonical_metric_at(spec, (x1 - x2).norm());
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const std::vector<Point>& points) {
    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = prior_variance(spec);
        for (Eigen::Index j = 0; j < i; ++j) {
            k(i, j) = covariance(spec, points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]);
            k(j, i) = k(i, j);
        }
    }
    return k;
}

double holder_exponent(const KernelSpec& spec) {
    switch (spec.family) {
        case KernelFamily::SquaredExponential: return 1.0;
        case KernelFamily::Matern: return std::min(nu_value(spec.nu), 1.0);
        case KernelFamily::RationalQuadratic: return 1.0;
        case KernelFamily::WeightedSum: {
            double a = 1.0;
            for (const auto& c : spec.components) a = std::min(a, holder_exponent(c.kernel));
            return a;
        }
    }
    return 1.0;
}

double SmoothnessProfile::modulus(double r) const {
    if (r <= 0.0) return 0.0;
    double g = canonical_metric_at(kernel_, r);
    // envelope value at the largest tabulated radius not exceeding r
    auto it = std::upper_bound(radii_.begin(), radii_.end(), r);
    if (it != radii_.begin()) {
        const auto idx = static_cast<std::size_t>(std::distance(radii_.begin(), it) - 1);
        g = std::max(g, envelope_[idx]);
    }
    return g;
}

SmoothnessProfile smoothness_profile(const KernelSpec& spec, double domain_diameter) {
    validate(spec);
    if (!(domain_diameter > 0.0)) throw std::invalid_argument("smoothness_profile: domain diameter must be positive");

    SmoothnessProfile p;
    p.kernel_ = spec;
    p.delta_k_ = domain_diameter;
    p.alpha_ = holder_exponent(spec);

    switch (spec.family) {
        case KernelFamily::SquaredExponential:
            p.c_k_ = std::sqrt(2.0 * spec.scale / spec.length);
            break;
        case KernelFamily::Matern:
        case KernelFamily::RationalQuadratic:
            p.c_k_ = fit_holder_constant(spec, 1.0, p.alpha_, p.delta_k_);
            break;
        case KernelFamily::WeightedSum:
            // d_k of a sum is at most the sum of the weighted component metrics
            p.c_k_ = 0.0;
            for (const auto& c : spec.components) {
                p.c_k_ += fit_holder_constant(c.kernel, c.weight, p.alpha_, p.delta_k_);
            }
            break;
    }

    // envelope tabulated well past the domain so that g(v1) is covered
    p.radii_ = log_spaced(domain_diameter * kFitLowerRatio, 4.0 * domain_diameter, kFitGridSize);
    p.envelope_.resize(p.radii_.size());
    double running = 0.0;
    for (std::size_t i = 0; i < p.radii_.size(); ++i) {
        running = std::max(running, canonical_metric_at(spec, p.radii_[i]));
        p.envelope_[i] = running;
    }
    return p;
}

}  // namespace mlse
