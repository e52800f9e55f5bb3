#pragma once
// Independent reference computations used only by tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mlse/kernel.hpp"

namespace oracle {

// Kernel closed forms written out directly, not through covariance_at.
inline double se(double scale, double length, double r) { return scale * std::exp(-r * r / length); }

inline double matern(double nu, double scale, double length, double r) {
    const double s = std::sqrt(2.0 * nu) * r / length;
    if (nu == 0.5) return scale * std::exp(-s);
    if (nu == 1.5) return scale * (1.0 + s) * std::exp(-s);
    return scale * (1.0 + s + s * s / 3.0) * std::exp(-s);
}

inline Eigen::MatrixXd gram(const mlse::KernelSpec& k, const std::vector<Eigen::VectorXd>& xs) {
    const auto n = static_cast<Eigen::Index>(xs.size());
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) g(i, j) = mlse::covariance(k, xs[i], xs[j]);
    return g;
}

struct MeanVar {
    double mean;
    double var;
};

// Posterior by a full-pivot LU solve of (K + s2 I), no Cholesky involved.
inline MeanVar brute_posterior(const mlse::KernelSpec& k, const std::vector<Eigen::VectorXd>& xs,
                               const std::vector<double>& ys, double s2, const Eigen::VectorXd& x) {
    if (xs.empty()) return {0.0, mlse::covariance(k, x, x)};
    const auto n = static_cast<Eigen::Index>(xs.size());
    Eigen::MatrixXd j = gram(k, xs) + s2 * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd kx(n), y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        kx[i] = mlse::covariance(k, xs[i], x);
        y[i] = ys[i];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(j);
    const Eigen::VectorXd a = lu.solve(y);
    const Eigen::VectorXd b = lu.solve(kx);
    return {kx.dot(a), mlse::covariance(k, x, x) - kx.dot(b)};
}

// 1/2 log det(I + K / s2) from eigenvalues.
inline double mutual_info_eig(const mlse::KernelSpec& k, const std::vector<Eigen::VectorXd>& xs, double s2) {
    if (xs.empty()) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram(k, xs));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) acc += std::log1p(std::max(es.eigenvalues()[i], 0.0) / s2);
    return 0.5 * acc;
}

// Largest r-separated subset by exhaustive search (n <= ~16).
inline int exhaustive_packing(const std::vector<Eigen::VectorXd>& pts, double r) {
    const int n = static_cast<int>(pts.size());
    int best = 0;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        const int c = __builtin_popcount(mask);
        if (c <= best) continue;
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
            if (!(mask >> i & 1u)) continue;
            for (int j = i + 1; j < n && ok; ++j)
                if ((mask >> j & 1u) && (pts[i] - pts[j]).norm() < r) ok = false;
        }
        if (ok) best = c;
    }
    return best;
}

inline Eigen::VectorXd uniform_point(std::mt19937_64& rng, int dim) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::VectorXd p(dim);
    for (int d = 0; d < dim; ++d) p[d] = u(rng);
    return p;
}

}  // namespace oracle
