#include "mlse/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace mlse {

namespace {
constexpr int kC3Terms = 64;
constexpr double kQCap = 9007199254740992.0;  // 2^53

double real_depth(int n, double alpha, double rho_bar) {
    return std::log(static_cast<double>(n)) / (2.0 * alpha * std::log(1.0 / rho_bar));
}

void check_depth_inputs(int n, double alpha, double rho_bar) {
    if (n < 2) throw std::invalid_argument("schedule: budget must be at least 2");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("schedule: alpha must lie in (0, 1]");
    if (!(rho_bar > 0.0 && rho_bar < 1.0)) throw std::invalid_argument("schedule: rho_bar must lie in (0, 1)");
}
}  // namespace

double compute_beta_n(int n, double delta, double alpha, double rho_bar) {
    check_depth_inputs(n, alpha, rho_bar);
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("schedule: delta must lie in (0, 1)");
    const double h = real_depth(n, alpha, rho_bar);
    // log(2 n 2^{2h} / delta) expanded to avoid overflow for large h
    const double log_arg = std::log(2.0 * n) + 2.0 * h * std::numbers::ln2 - std::log(delta);
    return std::sqrt(2.0 * log_arg);
}

int compute_h_max(int n, double alpha, double rho_bar) {
    check_depth_inputs(n, alpha, rho_bar);
    // absorb rounding so exact integers (e.g. n = 4 at rho_bar = 1/2) stay put
    return static_cast<int>(std::ceil(real_depth(n, alpha, rho_bar) - 1e-12));
}

double default_covering_constant(int dimension) {
    return std::pow(1.0 + std::sqrt(static_cast<double>(dimension)), dimension);
}

VConstants compute_v_constants(const SmoothnessProfile& profile, double metric_dim, double covering_constant,
                               double domain_diameter) {
    VConstants c;
    const double alpha = profile.alpha();
    c.metric_dim_prime = metric_dim / alpha;
    // covering exponent 2 D_m' for (X, d_k) corresponds to a = 2 D_m for (X, d)
    const double a = 2.0 * metric_dim;
    const double e = a / alpha;
    c.covering_prime = covering_constant *
                       std::pow(std::pow(profile.c_k(), e) + domain_diameter / std::pow(profile.delta_k(), alpha), e);
    c.c2 = 2.0 * std::log(2.0 * c.covering_prime * std::numbers::pi * std::numbers::pi / 6.0);
    c.c3 = 0.0;
    for (int m = 1; m <= kC3Terms; ++m) {
        const double w = std::ldexp(1.0, -(m - 1));
        c.c3 += w * (std::sqrt(std::log(static_cast<double>(m))) +
                     std::sqrt(m * 2.0 * c.metric_dim_prime * std::numbers::ln2));
    }
    return c;
}

VSchedule compute_v_schedule(const SmoothnessProfile& profile, const PartitionParams& params, int h_max,
                             double delta, double metric_dim, double covering_constant, double v_scale,
                             double domain_diameter) {
    if (h_max < 0) throw std::invalid_argument("schedule: h_max must be non-negative");
    if (!(v_scale > 0.0)) throw std::invalid_argument("schedule: v_scale must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("schedule: delta must lie in (0, 1)");

    VSchedule s;
    s.constants = compute_v_constants(profile, metric_dim, covering_constant, domain_diameter);
    const int levels = h_max + 2;
    const double depth_split = std::max(h_max, 1);
    s.raw.resize(static_cast<std::size_t>(levels));
    for (int h = 0; h < levels; ++h) {
        const double radius = params.v1 * std::pow(params.rho, h);
        const double log_inv_delta_h = std::log(depth_split / delta) + h * std::numbers::ln2;
        const double log_inv_radius = std::max(0.0, -std::log(radius));
        const double inner = s.constants.c2 + 2.0 * log_inv_delta_h + 4.0 * s.constants.metric_dim_prime * log_inv_radius;
        s.raw[static_cast<std::size_t>(h)] =
            v_scale * profile.modulus(radius) * (std::sqrt(std::max(inner, 0.0)) + s.constants.c3);
    }
    s.values = s.raw;
    for (int h = levels - 2; h >= 0; --h) {
        auto& vh = s.values[static_cast<std::size_t>(h)];
        vh = std::min(vh, 2.0 * s.values[static_cast<std::size_t>(h + 1)]);
    }
    return s;
}

std::vector<std::uint64_t> compute_q_schedule(const std::vector<double>& v_schedule, double noise_var,
                                              double beta_n) {
    std::vector<std::uint64_t> q;
    q.reserve(v_schedule.size());
    for (double v : v_schedule) {
        const double ratio = noise_var * beta_n * beta_n / (v * v);
        const double c = std::ceil(std::min(ratio, kQCap));
        q.push_back(std::max<std::uint64_t>(1, static_cast<std::uint64_t>(c)));
    }
    return q;
}

double AlgoParams::v(int h) const {
    if (v_schedule.empty()) throw std::logic_error("empty V schedule");
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(std::max(h, 0)), v_schedule.size() - 1);
    return v_schedule[idx];
}

std::uint64_t AlgoParams::q(int h) const {
    if (q_schedule.empty()) throw std::logic_error("empty q schedule");
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(std::max(h, 0)), q_schedule.size() - 1);
    return q_schedule[idx];
}

AlgoParams make_algo_params(const ScheduleInputs& in, const SmoothnessProfile& profile, const PartitionTree& tree) {
    if (in.budget < 0) throw std::invalid_argument("schedule: budget must be non-negative");
    if (!(in.noise_var > 0.0)) throw std::invalid_argument("schedule: noise variance must be positive");
    AlgoParams p;
    p.budget = in.budget;
    p.tau = in.tau;
    p.delta = in.delta;
    p.noise_var = in.noise_var;
    p.v_scale = in.v_scale;
    p.alpha = profile.alpha();
    p.metric_dim = in.metric_dim > 0.0 ? in.metric_dim : tree.dimension();
    p.covering_constant = in.covering_constant > 0.0 ? in.covering_constant : default_covering_constant(tree.dimension());

    const int n = std::max(in.budget, 2);
    const double rho_bar = tree.params().rho_bar();
    p.beta_n = compute_beta_n(n, in.delta, p.alpha, rho_bar);
    p.h_max = compute_h_max(n, p.alpha, rho_bar);
    const auto vs = compute_v_schedule(profile, tree.params(), p.h_max, in.delta, p.metric_dim, p.covering_constant,
                                       in.v_scale, tree.domain().diameter());
    p.v_schedule = vs.values;
    p.q_schedule = compute_q_schedule(p.v_schedule, p.noise_var, p.beta_n);
    return p;
}

std::vector<std::string> check_algo_params(const AlgoParams& p) {
    std::vector<std::string> out;
    const auto fail = [&](const std::string& msg) { out.push_back(msg); };
    if (p.v_schedule.size() < static_cast<std::size_t>(p.h_max) + 1) {
        fail("v_schedule shorter than h_max + 1");
    }
    for (std::size_t h = 0; h < p.v_schedule.size(); ++h) {
        if (!(p.v_schedule[h] > 0.0)) {
            std::ostringstream os;
            os << "V_" << h << " = " << p.v_schedule[h] << " is not positive";
            fail(os.str());
        }
        if (h + 1 < p.v_schedule.size() && p.v_schedule[h] > 2.0 * p.v_schedule[h + 1]) {
            std::ostringstream os;
            os << "V_" << h << " = " << p.v_schedule[h] << " exceeds 2 V_" << h + 1 << " = " << 2.0 * p.v_schedule[h + 1];
            fail(os.str());
        }
    }
    if (p.q_schedule.size() != p.v_schedule.size()) fail("q_schedule and v_schedule differ in length");
    for (std::size_t h = 0; h < std::min(p.q_schedule.size(), p.v_schedule.size()); ++h) {
        const double expected = std::max(1.0, std::ceil(p.noise_var * p.beta_n * p.beta_n /
                                                        (p.v_schedule[h] * p.v_schedule[h])));
        if (p.q_schedule[h] < 1 || static_cast<double>(p.q_schedule[h]) != std::min(expected, kQCap)) {
            std::ostringstream os;
            os << "q_" << h << " = " << p.q_schedule[h] << " differs from ceil(noise_var beta^2 / V^2) = " << expected;
            fail(os.str());
        }
    }
    if (!(p.beta_n > 0.0)) fail("beta_n is not positive");
    if (!(p.delta > 0.0 && p.delta < 1.0)) fail("delta outside (0, 1)");
    return out;
}

}  // namespace mlse
