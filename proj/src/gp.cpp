#include "mlse/gp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace mlse {

namespace {
constexpr int kJitterAttempts = 3;
constexpr double kJitterFactor = 1e-10;
}  // namespace

PosteriorState::PosteriorState(KernelSpec kernel, double noise_var, Eigen::Index dimension)
    : kernel_(std::move(kernel)), dim_(dimension) {
    validate(kernel_);
    if (!(noise_var > 0.0)) throw std::invalid_argument("noise variance must be positive");
    if (dimension < 1) throw std::invalid_argument("dimension must be at least 1");
    data_.noise_var = noise_var;
    prior_var_ = prior_variance(kernel_);
}

PosteriorState PosteriorState::from_dataset(KernelSpec kernel, const Dataset& data) {
    if (data.points.size() != data.observations.size()) {
        throw std::invalid_argument("dataset points and observations differ in length");
    }
    const Eigen::Index dim = data.points.empty() ? 1 : data.points.front().size();
    PosteriorState state(std::move(kernel), data.noise_var, dim);
    for (const auto& p : data.points) state.check_point(p);
    state.data_ = data;
    state.n_ = static_cast<Eigen::Index>(data.size());
    state.refactor();
    return state;
}

void PosteriorState::check_point(const Point& x) const {
    if (x.size() != dim_) {
        throw std::invalid_argument("point has dimension " + std::to_string(x.size()) + ", expected " +
                                    std::to_string(dim_));
    }
}

void PosteriorState::ensure_capacity(Eigen::Index n) {
    if (chol_.rows() >= n) return;
    const Eigen::Index cap = std::max<Eigen::Index>(16, std::max(n, 2 * chol_.rows()));
    chol_.conservativeResize(cap, cap);
    solved_.conservativeResize(cap);
}

Estimate PosteriorState::posterior(const Point& x) const {
    check_point(x);
    if (n_ == 0) return {0.0, std::sqrt(prior_var_)};
    Eigen::VectorXd kx(n_);
    for (Eigen::Index i = 0; i < n_; ++i) kx[i] = covariance(kernel_, data_.points[static_cast<std::size_t>(i)], x);
    chol_.topLeftCorner(n_, n_).triangularView<Eigen::Lower>().solveInPlace(kx);
    const double mean = kx.dot(solved_.head(n_));
    const double var = std::clamp(prior_var_ - kx.squaredNorm(), 0.0, prior_var_);
    return {mean, std::sqrt(var)};
}

void PosteriorState::update(const Point& x, double y) {
    check_point(x);
    data_.points.push_back(x);
    data_.observations.push_back(y);
    const Eigen::Index t = n_;
    ensure_capacity(t + 1);

    Eigen::VectorXd row(t);
    for (Eigen::Index i = 0; i < t; ++i) row[i] = covariance(kernel_, data_.points[static_cast<std::size_t>(i)], x);
    if (t > 0) chol_.topLeftCorner(t, t).triangularView<Eigen::Lower>().solveInPlace(row);
    const double pivot_sq = prior_var_ + data_.noise_var + jitter_ - row.squaredNorm();
    ++n_;
    if (!(pivot_sq > 0.0) || !std::isfinite(pivot_sq)) {
        refactor();
        return;
    }
    const double pivot = std::sqrt(pivot_sq);
    chol_.row(t).head(t) = row.transpose();
    chol_.row(t).tail(chol_.cols() - t).setZero();
    chol_(t, t) = pivot;
    solved_[t] = (y - row.dot(solved_.head(t))) / pivot;
}

void PosteriorState::refactor() {
    ensure_capacity(std::max<Eigen::Index>(n_, 1));
    if (n_ == 0) return;
    Eigen::MatrixXd j = gram_matrix(kernel_, data_.points);
    j.diagonal().array() += data_.noise_var;
    const double step = kJitterFactor * j.trace() / static_cast<double>(n_);
    const Eigen::Map<const Eigen::VectorXd> y(data_.observations.data(), n_);

    for (int attempt = 0; attempt <= kJitterAttempts; ++attempt) {
        Eigen::MatrixXd jj = j;
        jj.diagonal().array() += jitter_;
        Eigen::LLT<Eigen::MatrixXd> llt(jj);
        if (llt.info() == Eigen::Success) {
            chol_.setZero();
            chol_.topLeftCorner(n_, n_) = llt.matrixL();
            solved_.head(n_) = llt.matrixL().solve(y);
            return;
        }
        jitter_ += step;
    }
    throw NumericalError("posterior factorization failed after " + std::to_string(kJitterAttempts) +
                         " jitter retries");
}

Eigen::MatrixXd PosteriorState::factor() const {
    if (n_ == 0) return Eigen::MatrixXd(0, 0);
    return chol_.topLeftCorner(n_, n_).triangularView<Eigen::Lower>();
}

Eigen::VectorXd PosteriorState::solved_observations() const { return solved_.head(n_); }

}  // namespace mlse
