#include <doctest.h>

#include <string>

#include "mlse/config.hpp"
#include "mlse/types.hpp"

using namespace mlse;

namespace {

std::string field_of(const std::string& json) {
    try {
        (void)parse_config(json);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "<none>";
}

}  // namespace

TEST_CASE("defaults") {
    const auto c = parse_config("{}");
    CHECK(c.dimension == 1);
    CHECK(c.noise_var == 0.01);
    CHECK(c.budgets == std::vector<int>{40});
    CHECK(c.seeds == std::vector<std::uint64_t>{0});
    CHECK(c.variant == Variant::Core);
    CHECK(c.grid_resolution == 201);
    CHECK(parse_config(R"({"dimension": 2})").grid_resolution == 101);
    CHECK(parse_config(R"({"dimension": 3})").grid_resolution == 31);
    CHECK(parse_config(R"({"dimension": 8})").grid_resolution == 0);
}

TEST_CASE("full config") {
    const auto c = parse_config(R"({
        "kernel": {"family": "sum", "components": [
            {"weight": 0.5, "kernel": {"family": "se", "scale": 1, "length": 0.5}},
            {"weight": 0.5, "kernel": {"family": "matern", "nu": 2.5, "scale": 1, "length": 0.2}}]},
        "dimension": 2, "noise_var": 0.05, "tau": 0.25, "delta": 0.05,
        "budgets": [10, 20], "seeds": {"start": 3, "count": 4}, "variant": "fast",
        "v_scale": 0.2, "grid_resolution": 21, "covering_constant": 9, "metric_dim": 2,
        "output_dir": "x", "inherit_parent_bounds": true, "level_bound": true, "write_traces": true,
        "level_bound_max_samples": 100, "v_schedule_override": [0.5, 0.25]})");
    CHECK(c.kernel.family == KernelFamily::WeightedSum);
    CHECK(c.kernel.components.size() == 2);
    CHECK(c.kernel.components[1].kernel.nu == MaternNu::FiveHalves);
    CHECK(c.seeds == std::vector<std::uint64_t>{3, 4, 5, 6});
    CHECK(c.variant == Variant::Fast);
    CHECK(c.grid_resolution == 21);
    CHECK(c.inherit_parent_bounds);
    CHECK(c.v_schedule_override.size() == 2);
}

TEST_CASE("errors carry the field path") {
    CHECK(field_of(R"({"budgets": [10, 10]})") == "budgets[1]");
    CHECK(field_of(R"({"budgets": [10, "x"]})") == "budgets[1]");
    CHECK(field_of(R"({"seeds": [1, 2, 1]})") == "seeds");
    CHECK(field_of(R"({"seeds": {"count": 0}})") == "seeds.count");
    CHECK(field_of(R"({"noise_var": 0})") == "noise_var");
    CHECK(field_of(R"({"delta": 1.0})") == "delta");
    CHECK(field_of(R"({"v_scale": -1})") == "v_scale");
    CHECK(field_of(R"({"variant": "slow"})") == "variant");
    CHECK(field_of(R"({"kernel": {"family": "se", "length": 0}})") == "kernel");
    CHECK(field_of(R"({"kernel": {"family": "matern", "nu": 1.0}})") == "kernel.nu");
    CHECK(field_of(R"({"kernel": {"family": "cosine"}})") == "kernel.family");
    CHECK(field_of(R"({"kernel": {"family": "sum", "components": [{"weight": -1, "kernel": {"family": "se"}}]}})") ==
          "kernel.components[0].weight");
    CHECK(field_of(R"({"budget": [10]})") == "budget");
    CHECK(field_of(R"({"grid_resolution": 1})") == "grid_resolution");
    CHECK(field_of(R"({"dimension": 3, "grid_resolution": 101})") == "grid_resolution");
    CHECK(field_of("[1, 2]") == "<root>");
    CHECK(field_of("{") == "<root>");
    CHECK_THROWS_AS((void)load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("materialized JSON parses back to the same config") {
    const auto c = parse_config(R"({"kernel": {"family": "rq", "scale": 2, "length": 0.5, "shape": 3},
                                   "budgets": [5, 7], "seeds": [9, 4]})");
    const std::string text = to_json(c);
    CHECK(text.find("\"covering_constant\"") != std::string::npos);
    const auto back = parse_config(text);
    CHECK(to_json(back) == text);
    CHECK(back.kernel.rq_shape == 3.0);
    CHECK(back.seeds == std::vector<std::uint64_t>{9, 4});
}
