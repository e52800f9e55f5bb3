#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace mlse {

using Point = Eigen::VectorXd;

/// Raised when a factorization or conditional variance cannot be repaired.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration. The message starts with the offending
/// field path, e.g. "budgets[2]: ...".
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(field) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Axis-aligned box [lower, upper].
struct Box {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    [[nodiscard]] Eigen::Index dimension() const { return lower.size(); }
    [[nodiscard]] Point midpoint() const { return 0.5 * (lower + upper); }
    [[nodiscard]] Eigen::VectorXd sides() const { return upper - lower; }
    [[nodiscard]] double diameter() const { return (upper - lower).norm(); }
    [[nodiscard]] double volume() const { return (upper - lower).prod(); }

    /// Closed containment with an absolute slack on every face.
    [[nodiscard]] bool contains_closed(const Point& x, double slack = 0.0) const {
        for (Eigen::Index d = 0; d < lower.size(); ++d) {
            if (x[d] < lower[d] - slack || x[d] > upper[d] + slack) return false;
        }
        return true;
    }

    static Box unit(Eigen::Index dim) {
        return Box{Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)};
    }
};

}  // namespace mlse
