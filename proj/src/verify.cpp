#include "mlse/verify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/LU>

#include "mlse/rng.hpp"

namespace mlse {

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

Point uniform_point(std::mt19937_64& rng, int dim) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Point x(dim);
    for (int d = 0; d < dim; ++d) x[d] = u(rng);
    return x;
}

CheckResult count_check(std::string name, std::uint64_t checked, std::uint64_t failed, std::string detail = {}) {
    CheckResult c;
    c.name = std::move(name);
    c.checked = checked;
    c.failed = failed;
    c.passed = failed == 0;
    c.detail = std::move(detail);
    return c;
}

CheckResult skipped(std::string name, std::string why) {
    CheckResult c;
    c.name = std::move(name);
    c.detail = "skipped: " + why;
    return c;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

}  // namespace

bool VerifyReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult* VerifyReport::find(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

OracleCheck posterior_oracle_check(const KernelSpec& kernel, int dimension, double noise_var, int datasets,
                                   std::uint64_t seed) {
    OracleCheck out;
    auto rng = make_rng(seed, Stream::Scratch);
    std::uniform_int_distribution<int> size_dist(1, 40);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int ds = 0; ds < datasets; ++ds) {
        const int n = size_dist(rng);
        std::vector<Point> xs;
        Eigen::VectorXd y(n);
        PosteriorState post(kernel, noise_var, dimension);
        for (int i = 0; i < n; ++i) {
            xs.push_back(uniform_point(rng, dimension));
            y[i] = normal(rng);
            post.update(xs.back(), y[i]);
        }
        Eigen::MatrixXd j = gram_matrix(kernel, xs);
        j.diagonal().array() += noise_var;
        const Eigen::FullPivLU<Eigen::MatrixXd> lu(j);
        const Eigen::VectorXd alpha = lu.solve(y);
        for (int q = 0; q < 5; ++q) {
            const Point x = uniform_point(rng, dimension);
            Eigen::VectorXd kx(n);
            for (int i = 0; i < n; ++i) kx[i] = covariance(kernel, xs[static_cast<std::size_t>(i)], x);
            const double mean = kx.dot(alpha);
            const double var = std::max(covariance(kernel, x, x) - kx.dot(lu.solve(kx)), 0.0);
            const Estimate e = post.posterior(x);
            out.max_rel_error = std::max({out.max_rel_error, rel_err(e.mean, mean), rel_err(e.stddev * e.stddev, var)});
            ++out.comparisons;
        }
    }
    return out;
}

bool info_inequality_holds(const InfoGainReport& info, double noise_var, double factor, double tol) {
    return info.j_n <= factor * info.c4 * noise_var * info.mutual_info * (1.0 + tol);
}

VerifyReport verify_runs(const ExperimentConfig& config, std::vector<RunRecord> runs, const VerifyOptions& options) {
    VerifyReport rep;
    const int dim = config.dimension;

    {
        const auto oc = posterior_oracle_check(config.kernel, dim, config.noise_var, options.posterior_datasets,
                                               options.seed_offset);
        auto c = count_check("posterior_oracle", oc.comparisons, oc.max_rel_error > 1e-8 ? 1 : 0,
                             "max relative error " + fmt(oc.max_rel_error));
        rep.checks.push_back(c);
    }
    {
        PartitionTree tree(Box::unit(dim), hypercube_params(dim));
        const X3Report x3 = verify_x3(tree, options.x3_depth);
        rep.checks.push_back(count_check("partition_x3", x3.nodes_checked, x3.failures.size(),
                                         "depth " + std::to_string(options.x3_depth)));
    }
    {
        const Box domain = Box::unit(dim);
        const SmoothnessProfile profile = smoothness_profile(config.kernel, domain.diameter());
        const PartitionTree tree(domain, hypercube_params(dim));
        std::uint64_t bad = 0;
        std::string first;
        AlgoParams sample;
        for (int b : config.budgets) {
            const AlgoParams p = make_run_params(config, b, tree, profile);
            const auto v = check_algo_params(p);
            if (!v.empty()) {
                ++bad;
                if (first.empty()) first = "budget " + std::to_string(b) + ": " + v.front();
            }
            sample = p;
        }
        rep.checks.push_back(count_check("algo_params", config.budgets.size(), bad, first));

        // a non-monotone V schedule must be rejected
        AlgoParams corrupt = sample;
        if (corrupt.v_schedule.size() >= 2) corrupt.v_schedule[0] = 3.0 * corrupt.v_schedule[1];
        const auto v = check_algo_params(corrupt);
        auto c = count_check("algo_params_negative_control", 1, v.empty() ? 1 : 0,
                             v.empty() ? "corrupted schedule accepted" : "rejected: " + v.front());
        rep.checks.push_back(c);
    }

    const auto n_runs = runs.size();
    std::uint64_t tiling = 0, active = 0, at = 0, qcap = 0, info1 = 0, info2 = 0, e1 = 0;
    std::uint64_t vfree = 0, sound_fail = 0, deviation_fail = 0;
    for (const auto& r : runs) {
        tiling += r.tiling_failures > 0;
        active += r.active_bound_failures > 0;
        at += !r.diagnostics.a_t_monotone;
        qcap += r.diagnostics.q_cap_violations > 0;
        info1 += !info_inequality_holds(r.info, config.noise_var, 1.0, 1e-6);
        info2 += !info_inequality_holds(r.info, config.noise_var, 2.0, 1e-9);
        e1 += r.diagnostics.e1_violations > 0;
        if (r.diagnostics.violation_free()) {
            ++vfree;
            sound_fail += r.diagnostics.soundness_failures > 0;
            deviation_fail += (r.diagnostics.deviation_v_failures + r.diagnostics.deviation_sigma_failures) > 0;
        }
    }
    rep.checks.push_back(count_check("tiling", n_runs, tiling));
    if (config.variant == Variant::Fast) {
        rep.checks.push_back(count_check("active_set_bound", n_runs, active));
        rep.checks.push_back(skipped("a_t_monotone", "core variant only"));
    } else {
        rep.checks.push_back(skipped("active_set_bound", "fast variant only"));
        rep.checks.push_back(count_check("a_t_monotone", n_runs, at));
    }
    rep.checks.push_back(count_check("q_cap", n_runs, qcap));
    rep.checks.push_back(count_check("info_inequality", n_runs, info1, "J_n <= C_4 noise_var I"));
    rep.checks.push_back(count_check("info_inequality_2c4", n_runs, info2, "J_n <= 2 C_4 noise_var I"));
    {
        const double limit =
            config.delta + 3.0 * std::sqrt(config.delta * (1.0 - config.delta) / std::max<double>(1.0, n_runs));
        const double rate = n_runs ? static_cast<double>(e1) / static_cast<double>(n_runs) : 0.0;
        auto c = count_check("e1_rate", n_runs, e1, "rate " + fmt(rate) + " limit " + fmt(limit));
        c.passed = rate <= limit;
        rep.checks.push_back(c);
    }
    if (config.grid_resolution == 0) {
        rep.checks.push_back(skipped("soundness", "no grid"));
        rep.checks.push_back(skipped("deviation_bounds", "no grid"));
    } else {
        const auto gate = [&](const char* name, std::uint64_t failed) {
            const double ok = vfree ? 1.0 - static_cast<double>(failed) / static_cast<double>(vfree) : 1.0;
            auto c = count_check(name, vfree, failed, "pass fraction " + fmt(ok) + " over violation-free runs");
            c.passed = ok >= 0.98;
            return c;
        };
        rep.checks.push_back(gate("soundness", sound_fail));
        rep.checks.push_back(gate("deviation_bounds", deviation_fail));
    }
    rep.runs = std::move(runs);
    return rep;
}

VerifyReport verify_suite(const ExperimentConfig& config, const VerifyOptions& options) {
    RunnerOptions ro;
    ro.threads = options.threads;
    ro.seed_offset = options.seed_offset;
    ro.write_files = false;
    SweepResult sweep = run_experiment(config, ro);
    return verify_runs(sweep.config, std::move(sweep.rows), options);
}

void print_report(std::ostream& os, const VerifyReport& report) {
    for (const auto& c : report.checks) {
        os << (c.passed ? "PASS " : "FAIL ") << c.name << ' ' << c.failed << '/' << c.checked;
        if (!c.detail.empty()) os << "  " << c.detail;
        os << '\n';
    }
}

}  // namespace mlse
