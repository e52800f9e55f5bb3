#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "mlse/eval.hpp"
#include "mlse/lse.hpp"

using namespace mlse;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

AlgoParams manual_params(int budget, double tau, double beta, int h_max, std::vector<double> v, double s2 = 0.01) {
    AlgoParams p;
    p.budget = budget;
    p.tau = tau;
    p.noise_var = s2;
    p.beta_n = beta;
    p.h_max = h_max;
    p.v_schedule = std::move(v);
    p.q_schedule = compute_q_schedule(p.v_schedule, s2, beta);
    return p;
}

struct Setup {
    KernelSpec kernel = KernelSpec::squared_exponential(1.0, 1.0);
    PartitionTree tree{Box::unit(1), hypercube_params(1)};
    GroundTruth truth;
    AlgoParams params;

    Setup(int budget, std::uint64_t seed, double v_scale = 1.0, int grid = 0, double tau = 0.0)
        : truth(kernel, 0.01, Box::unit(1), grid, seed) {
        ScheduleInputs in;
        in.budget = budget;
        in.tau = tau;
        in.v_scale = v_scale;
        params = make_algo_params(in, smoothness_profile(kernel, 1.0), tree);
    }
};

std::vector<NodeId> partition_of(const LevelSetRun& run) {
    std::vector<NodeId> ids;
    for (const auto& e : run.active()) ids.push_back(e.node);
    for (const auto& c : run.s_hat()) ids.push_back(c.node);
    for (const auto& c : run.r_hat()) ids.push_back(c.node);
    return ids;
}

std::string trace_text(const std::vector<TraceRecord>& t) {
    std::ostringstream os;
    write_trace(os, t);
    return os.str();
}

}  // namespace

TEST_CASE("bounds_update on the prior at the root") {
    const ActiveEntry fresh{{0, 1}, kInf, -kInf, 0};
    const NodeEstimates est{{0.0, 1.0}, std::nullopt};
    const auto e = bounds_update(fresh, est, 4.0, 2.5, 0.0);
    CHECK(e.l_bar == -4.0 - 2.5);
    CHECK(e.u_bar == 4.0 + 2.5);
}

TEST_CASE("bounds_update parent branch and running extrema") {
    const ActiveEntry fresh{{1, 2}, kInf, -kInf, 0};
    // own: [0.5 - 2, 0.5 + 2]; parent: [1 - 0.4 - 0.3, 1 + 0.4 + 0.3]
    const NodeEstimates est{{0.5, 1.0}, Estimate{1.0, 0.2}};
    const auto e = bounds_update(fresh, est, 2.0, 0.1, 0.3);
    CHECK(e.l_bar == doctest::Approx(std::max(0.5 - 2.0, 1.0 - 0.4 - 0.3) - 0.1));
    CHECK(e.u_bar == doctest::Approx(std::min(0.5 + 2.0, 1.0 + 0.4 + 0.3) + 0.1));

    // a looser estimate later cannot widen the running bounds
    const NodeEstimates loose{{0.0, 5.0}, Estimate{0.0, 5.0}};
    const auto f = bounds_update(e, loose, 2.0, 0.1, 0.3);
    CHECK(f.l_bar == e.l_bar);
    CHECK(f.u_bar == e.u_bar);
}

TEST_CASE("bounds width never exceeds 2 beta sigma + 2 V") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.01, 2.0);
    for (int k = 0; k < 1000; ++k) {
        ActiveEntry e{{2, 3}, kInf, -kInf, 0};
        const double beta = u(rng), v = u(rng), vp = 2.0 * v;
        for (int r = 0; r < 5; ++r) {
            const NodeEstimates est{{n(rng), u(rng)}, Estimate{n(rng), u(rng)}};
            const double u_prev = e.u_bar, l_prev = e.l_bar;
            e = bounds_update(e, est, beta, v, vp);
            CHECK(e.u_bar - e.l_bar <= 2.0 * beta * est.own.stddev + 2.0 * v + 1e-12);
            CHECK(e.u_bar <= u_prev);
            CHECK(e.l_bar >= l_prev);
        }
    }
}

TEST_CASE("selection examples") {
    std::vector<ActiveEntry> a{{{0, 1}, 1.0, -0.5, 0}};
    CHECK(select_candidate(a, 0.0) == 0u);
    CHECK_FALSE(select_candidate({}, 0.0).has_value());

    // indices 1.0 and 3.0
    a = {{{1, 1}, 1.0, -0.5, 0}, {{1, 2}, 3.0, 0.0, 0}};
    CHECK(select_candidate(a, 0.0) == 1u);
    CHECK(selection_index(a[1], 0.0) == 3.0);

    // equal indices, depths 3 and 2
    a = {{{3, 1}, 2.0, 0.0, 0}, {{2, 4}, 2.0, 0.0, 0}};
    CHECK(select_candidate(a, 0.0) == 1u);
    // equal depth, lower index wins
    a = {{{2, 3}, 2.0, 0.0, 0}, {{2, 2}, 2.0, 0.0, 0}};
    CHECK(select_candidate(a, 0.0) == 1u);
}

TEST_CASE("classification is inclusive for S and strict for R") {
    const double beta = 3.0, v0 = 0.5;
    PartitionTree tree(Box::unit(1), hypercube_params(1));
    GroundTruth truth(KernelSpec::squared_exponential(1.0, 1.0), 0.01, Box::unit(1), 0, 1);

    SUBCASE("l_bar == tau goes to S") {
        LevelSetRun run(manual_params(10, -beta - v0, beta, 1, {v0, v0, v0}), tree, truth);
        CHECK(run.s_hat().size() == 1);
        CHECK(run.active().empty());
        CHECK(run.finished());
        REQUIRE(run.trace().size() == 1);
        CHECK(run.trace()[0].action == Action::ClassifyS);
    }
    SUBCASE("u_bar == tau stays active") {
        LevelSetRun run(manual_params(10, beta + v0, beta, 1, {v0, v0, v0}), tree, truth);
        CHECK(run.active().size() == 1);
        CHECK(run.r_hat().empty());
    }
    SUBCASE("u_bar just below tau goes to R") {
        LevelSetRun run(manual_params(10, std::nextafter(beta + v0, 10.0), beta, 1, {v0, v0, v0}), tree, truth);
        CHECK(run.r_hat().size() == 1);
    }
}

TEST_CASE("refine-or-evaluate rule") {
    PartitionTree tree(Box::unit(1), hypercube_params(1));
    GroundTruth truth(KernelSpec::squared_exponential(1.0, 1.0), 0.01, Box::unit(1), 0, 2);

    SUBCASE("V_0 <= beta sigma_prior evaluates") {
        LevelSetRun run(manual_params(5, 0.0, 3.0, 2, {3.0, 3.0, 3.0, 3.0}), tree, truth);
        REQUIRE(run.step());
        CHECK(run.trace().front().action == Action::Evaluate);
        CHECK(run.n_e() == 1);
    }
    SUBCASE("V_0 > beta sigma_prior refines") {
        LevelSetRun run(manual_params(5, 0.0, 3.0, 2, {3.5, 3.5, 3.5, 3.5}), tree, truth);
        REQUIRE(run.step());
        CHECK(run.trace().front().action == Action::Refine);
        CHECK(run.n_e() == 0);
        CHECK(run.active().size() == 2);
    }
    SUBCASE("depth h_max + 1 is never refined") {
        // h_max = 0: the root refines, its children only evaluate
        LevelSetRun run(manual_params(30, 0.0, 3.0, 0, {100.0, 100.0}), tree, truth);
        run.run();
        int refines = 0;
        for (const auto& r : run.trace()) {
            if (r.action == Action::Refine) {
                ++refines;
                CHECK(r.depth == 0);
            }
            CHECK(r.depth <= 1);
        }
        CHECK(refines == 1);
    }
}

TEST_CASE("q_h evaluations force refinement") {
    const double s2 = 0.01, beta = 4.0;
    const double v0 = beta * std::sqrt(s2 / 3.0) * (1.0 + 1e-9);
    const auto p0 = manual_params(20, 0.0, beta, 3, {v0, v0, v0, v0, v0}, s2);
    REQUIRE(p0.q(0) == 3);

    PartitionTree tree(Box::unit(1), hypercube_params(1));
    GroundTruth truth(KernelSpec::squared_exponential(1.0, 1.0), s2, Box::unit(1), 0, 9);
    // put tau at the root value so the root cannot be classified early
    auto p = p0;
    p.tau = truth.query(tree.root().center, false);
    LevelSetRun run(p, tree, truth);
    for (int k = 0; k < 4; ++k) REQUIRE(run.step());
    const auto& t = run.trace();
    CHECK(t[0].action == Action::Evaluate);
    CHECK(t[1].action == Action::Evaluate);
    CHECK(t[2].action == Action::Evaluate);
    CHECK(t[3].action == Action::Refine);
    CHECK(t[3].sigma <= std::sqrt(s2 / 3.0) + 1e-10);
}

TEST_CASE("zero budget returns at once") {
    Setup s(0, 4);
    LevelSetRun run(s.params, s.tree, s.truth);
    CHECK(run.finished());
    CHECK_FALSE(run.step());
    const auto c = run.classification();
    CHECK(c.evaluated_points.empty());
    CHECK(c.summary.steps == 0);
    CHECK(c.s_hat.size() + c.r_hat.size() + c.unclassified.size() == 1);
}

TEST_CASE("tau far below the path leaves R empty") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Setup s(40, seed, 1.0, 201);
        const double lo = *std::min_element(s.truth.grid_values().begin(), s.truth.grid_values().end());
        s.params.tau = lo - 5.0;
        const auto c = run_level_set(s.params, s.tree, s.truth);
        CHECK(c.r_hat.empty());
    }
}

TEST_CASE("run state invariants at every step") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        for (double vs : {1.0, 0.1}) {
            Setup s(40, seed, vs);
            LevelSetRun run(s.params, s.tree, s.truth);
            CHECK(nodes_tile_domain(partition_of(run)));
            while (run.step()) {
                CHECK(nodes_tile_domain(partition_of(run)));
                CHECK(run.n_e() <= s.params.budget);
                for (const auto& e : run.active()) {
                    CHECK(e.node.depth <= s.params.h_max + 1);
                    if (vs == 1.0) CHECK(e.l_bar <= e.u_bar + 1e-10);
                }
            }
            const auto c = run.classification();
            std::vector<NodeId> ids;
            for (const auto* set : {&c.s_hat, &c.r_hat, &c.unclassified}) {
                for (const auto& cell : *set) ids.push_back(cell.node);
            }
            CHECK(nodes_tile_domain(ids));
        }
    }
}

TEST_CASE("A_t is non-increasing at v_scale 1") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Setup s(40, seed, 1.0, 201);
        const auto c = run_level_set(s.params, s.tree, s.truth);
        const auto d = diagnose_run(c, s.tree, s.truth, s.params);
        CHECK(d.a_t_monotone);
        CHECK(d.q_cap_violations == 0);
    }
}

TEST_CASE("A_t is non-increasing with inherited child bounds") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Setup s(80, seed, 0.1, 201);
        RunOptions o;
        o.inherit_parent_bounds = true;
        const auto c = run_level_set(s.params, s.tree, s.truth, o);
        const auto d = diagnose_run(c, s.tree, s.truth, s.params);
        CHECK(d.a_t_monotone);
    }
}

TEST_CASE("identical seeds give identical traces") {
    Setup a(60, 12, 0.1), b(60, 12, 0.1);
    const auto ca = run_level_set(a.params, a.tree, a.truth);
    const auto cb = run_level_set(b.params, b.tree, b.truth);
    CHECK(trace_text(ca.trace) == trace_text(cb.trace));
    Setup c(60, 13, 0.1);
    CHECK(trace_text(run_level_set(c.params, c.tree, c.truth).trace) != trace_text(ca.trace));
}

TEST_CASE("trace round trip") {
    Setup s(40, 5, 0.1);
    const auto c = run_level_set(s.params, s.tree, s.truth);
    const std::string text = trace_text(c.trace);
    CHECK(text.rfind(kTraceHeader, 0) == 0);
    std::istringstream is(text);
    const auto back = read_trace(is);
    REQUIRE(back.size() == c.trace.size());
    for (std::size_t k = 0; k < back.size(); ++k) {
        CHECK(back[k].step == c.trace[k].step);
        CHECK(back[k].action == c.trace[k].action);
        CHECK(back[k].index == c.trace[k].index);
        CHECK(back[k].mu == c.trace[k].mu);
        CHECK(back[k].sigma == c.trace[k].sigma);
        CHECK(back[k].l_bar == c.trace[k].l_bar);
        CHECK(back[k].n_e == c.trace[k].n_e);
    }
    std::istringstream bad("step,action\n");
    CHECK_THROWS_AS((void)read_trace(bad), std::invalid_argument);
}

TEST_CASE("evaluate records count n_e") {
    Setup s(25, 8, 0.1);
    const auto c = run_level_set(s.params, s.tree, s.truth);
    int n = 0;
    for (const auto& r : c.trace) {
        if (r.action == Action::Evaluate) CHECK(r.n_e == ++n);
    }
    CHECK(n == c.summary.n_e);
    CHECK(static_cast<std::size_t>(n) == c.evaluated_points.size());
}

TEST_CASE("tiling predicate") {
    CHECK(nodes_tile_domain({{0, 1}}));
    CHECK(nodes_tile_domain({{1, 1}, {1, 2}}));
    CHECK(nodes_tile_domain({{1, 2}, {2, 1}, {2, 2}}));
    CHECK_FALSE(nodes_tile_domain({{1, 1}}));
    CHECK_FALSE(nodes_tile_domain({{0, 1}, {1, 1}}));
    CHECK_FALSE(nodes_tile_domain({{1, 1}, {1, 1}, {1, 2}}));
    CHECK_FALSE(nodes_tile_domain({}));
}
