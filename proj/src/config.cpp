#include "mlse/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mlse/types.hpp"

namespace mlse {

using nlohmann::json;

namespace {

const std::set<std::string> kTopKeys = {
    "kernel",       "dimension",       "noise_var",   "tau",          "delta",
    "budgets",      "seeds",           "variant",     "v_scale",      "grid_resolution",
    "covering_constant", "metric_dim", "output_dir",  "inherit_parent_bounds",
    "level_bound",     "write_traces",    "level_bound_max_samples", "v_schedule_override",
};

double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
    return v;
}

long long get_integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
    return j.get<long long>();
}

bool get_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
    return j.get<bool>();
}

KernelSpec parse_kernel(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path, "expected an object");
    for (const auto& [k, v] : j.items()) {
        static const std::set<std::string> keys = {"family", "scale", "length", "nu", "shape", "components"};
        if (!keys.count(k)) throw ConfigError(path + "." + k, "unknown key");
    }
    if (!j.contains("family") || !j["family"].is_string()) throw ConfigError(path + ".family", "expected a string");
    const std::string fam = j["family"].get<std::string>();
    const auto num = [&](const char* key, double def) {
        return j.contains(key) ? get_number(j[key], path + "." + key) : def;
    };
    KernelSpec spec;
    if (fam == "se") {
        spec = KernelSpec::squared_exponential(num("scale", 1.0), num("length", 1.0));
    } else if (fam == "matern") {
        const double nu = num("nu", 0.5);
        MaternNu n;
        if (nu == 0.5) n = MaternNu::Half;
        else if (nu == 1.5) n = MaternNu::ThreeHalves;
        else if (nu == 2.5) n = MaternNu::FiveHalves;
        else throw ConfigError(path + ".nu", "must be 0.5, 1.5 or 2.5");
        spec = KernelSpec::matern(n, num("scale", 1.0), num("length", 1.0));
    } else if (fam == "rq") {
        spec = KernelSpec::rational_quadratic(num("scale", 1.0), num("length", 1.0), num("shape", 1.0));
    } else if (fam == "sum") {
        if (!j.contains("components") || !j["components"].is_array() || j["components"].empty()) {
            throw ConfigError(path + ".components", "expected a non-empty array");
        }
        std::vector<WeightedKernel> parts;
        for (std::size_t i = 0; i < j["components"].size(); ++i) {
            const std::string p = path + ".components[" + std::to_string(i) + "]";
            const auto& c = j["components"][i];
            if (!c.is_object() || !c.contains("weight") || !c.contains("kernel")) {
                throw ConfigError(p, "expected {\"weight\": w, \"kernel\": {...}}");
            }
            const double w = get_number(c["weight"], p + ".weight");
            if (!(w > 0.0)) throw ConfigError(p + ".weight", "must be positive");
            parts.push_back({w, parse_kernel(c["kernel"], p + ".kernel")});
        }
        spec = KernelSpec::weighted_sum(std::move(parts));
    } else {
        throw ConfigError(path + ".family", "unknown family '" + fam + "' (se, matern, rq, sum)");
    }
    try {
        validate(spec);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
    return spec;
}

json kernel_json(const KernelSpec& k) {
    switch (k.family) {
        case KernelFamily::SquaredExponential: return {{"family", "se"}, {"scale", k.scale}, {"length", k.length}};
        case KernelFamily::Matern:
            return {{"family", "matern"}, {"nu", nu_value(k.nu)}, {"scale", k.scale}, {"length", k.length}};
        case KernelFamily::RationalQuadratic:
            return {{"family", "rq"}, {"scale", k.scale}, {"length", k.length}, {"shape", k.rq_shape}};
        case KernelFamily::WeightedSum: {
            json parts = json::array();
            for (const auto& c : k.components) parts.push_back({{"weight", c.weight}, {"kernel", kernel_json(c.kernel)}});
            return {{"family", "sum"}, {"components", parts}};
        }
    }
    return {};
}

}  // namespace

int default_grid_resolution(int dimension) {
    switch (dimension) {
        case 1: return 201;
        case 2: return 101;
        case 3: return 31;
        default: return 0;
    }
}

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
    for (const auto& [k, v] : j.items()) {
        if (!kTopKeys.count(k)) throw ConfigError(k, "unknown key");
    }

    ExperimentConfig c;
    if (j.contains("kernel")) c.kernel = parse_kernel(j["kernel"], "kernel");
    if (j.contains("dimension")) c.dimension = static_cast<int>(get_integer(j["dimension"], "dimension"));
    if (j.contains("noise_var")) c.noise_var = get_number(j["noise_var"], "noise_var");
    if (j.contains("tau")) c.tau = get_number(j["tau"], "tau");
    if (j.contains("delta")) c.delta = get_number(j["delta"], "delta");
    if (j.contains("budgets")) {
        if (!j["budgets"].is_array()) throw ConfigError("budgets", "expected an array");
        c.budgets.clear();
        for (std::size_t i = 0; i < j["budgets"].size(); ++i) {
            c.budgets.push_back(static_cast<int>(get_integer(j["budgets"][i], "budgets[" + std::to_string(i) + "]")));
        }
    }
    if (j.contains("seeds")) {
        const auto& s = j["seeds"];
        c.seeds.clear();
        if (s.is_array()) {
            for (std::size_t i = 0; i < s.size(); ++i) {
                const auto v = get_integer(s[i], "seeds[" + std::to_string(i) + "]");
                if (v < 0) throw ConfigError("seeds[" + std::to_string(i) + "]", "must be non-negative");
                c.seeds.push_back(static_cast<std::uint64_t>(v));
            }
        } else if (s.is_object()) {
            for (const auto& [k, v] : s.items()) {
                if (k != "start" && k != "count") throw ConfigError("seeds." + k, "unknown key");
            }
            const auto start = s.contains("start") ? get_integer(s["start"], "seeds.start") : 0;
            if (!s.contains("count")) throw ConfigError("seeds.count", "missing");
            const auto count = get_integer(s["count"], "seeds.count");
            if (start < 0) throw ConfigError("seeds.start", "must be non-negative");
            if (count < 1) throw ConfigError("seeds.count", "must be at least 1");
            for (long long i = 0; i < count; ++i) c.seeds.push_back(static_cast<std::uint64_t>(start + i));
        } else {
            throw ConfigError("seeds", "expected an array or {\"start\", \"count\"}");
        }
    }
    if (j.contains("variant")) {
        if (!j["variant"].is_string()) throw ConfigError("variant", "expected a string");
        try {
            c.variant = parse_variant(j["variant"].get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw ConfigError("variant", e.what());
        }
    }
    if (j.contains("v_scale")) c.v_scale = get_number(j["v_scale"], "v_scale");
    c.grid_resolution = j.contains("grid_resolution")
                            ? static_cast<int>(get_integer(j["grid_resolution"], "grid_resolution"))
                            : default_grid_resolution(c.dimension);
    if (j.contains("covering_constant") && !j["covering_constant"].is_null()) {
        c.covering_constant = get_number(j["covering_constant"], "covering_constant");
    }
    if (j.contains("metric_dim") && !j["metric_dim"].is_null()) c.metric_dim = get_number(j["metric_dim"], "metric_dim");
    if (j.contains("output_dir")) {
        if (!j["output_dir"].is_string()) throw ConfigError("output_dir", "expected a string");
        c.output_dir = j["output_dir"].get<std::string>();
    }
    if (j.contains("inherit_parent_bounds")) {
        c.inherit_parent_bounds = get_bool(j["inherit_parent_bounds"], "inherit_parent_bounds");
    }
    if (j.contains("level_bound")) c.level_bound = get_bool(j["level_bound"], "level_bound");
    if (j.contains("write_traces")) c.write_traces = get_bool(j["write_traces"], "write_traces");
    if (j.contains("level_bound_max_samples")) {
        const auto v = get_integer(j["level_bound_max_samples"], "level_bound_max_samples");
        if (v < 1) throw ConfigError("level_bound_max_samples", "must be at least 1");
        c.level_bound_max_samples = static_cast<std::uint64_t>(v);
    }
    if (j.contains("v_schedule_override")) {
        const auto& v = j["v_schedule_override"];
        if (!v.is_array()) throw ConfigError("v_schedule_override", "expected an array");
        for (std::size_t i = 0; i < v.size(); ++i) {
            c.v_schedule_override.push_back(get_number(v[i], "v_schedule_override[" + std::to_string(i) + "]"));
        }
    }
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void validate(const ExperimentConfig& c) {
    try {
        validate(c.kernel);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("kernel", e.what());
    }
    if (c.dimension < 1 || c.dimension > 16) throw ConfigError("dimension", "must lie in [1, 16]");
    if (!(c.noise_var > 0.0)) throw ConfigError("noise_var", "must be positive");
    if (!(c.delta > 0.0 && c.delta < 1.0)) throw ConfigError("delta", "must lie in (0, 1)");
    if (c.budgets.empty()) throw ConfigError("budgets", "must not be empty");
    for (std::size_t i = 0; i < c.budgets.size(); ++i) {
        const std::string p = "budgets[" + std::to_string(i) + "]";
        if (c.budgets[i] < 0) throw ConfigError(p, "must be non-negative");
        if (i > 0 && c.budgets[i] <= c.budgets[i - 1]) throw ConfigError(p, "budgets must be strictly increasing");
    }
    if (c.seeds.empty()) throw ConfigError("seeds", "must not be empty");
    std::set<std::uint64_t> distinct(c.seeds.begin(), c.seeds.end());
    if (distinct.size() != c.seeds.size()) throw ConfigError("seeds", "seeds must be distinct");
    if (!(c.v_scale > 0.0)) throw ConfigError("v_scale", "must be positive");
    if (c.grid_resolution < 0 || c.grid_resolution == 1) throw ConfigError("grid_resolution", "must be 0 or at least 2");
    double points = 1.0;
    for (int d = 0; d < c.dimension; ++d) points *= c.grid_resolution;
    if (points > 2.0e5) throw ConfigError("grid_resolution", "grid exceeds 200000 points");
    if (c.covering_constant < 0.0) throw ConfigError("covering_constant", "must be positive (or 0 for the default)");
    if (c.metric_dim < 0.0) throw ConfigError("metric_dim", "must be positive (or 0 for the dimension)");
    if (c.output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
    for (std::size_t i = 0; i < c.v_schedule_override.size(); ++i) {
        if (!(c.v_schedule_override[i] > 0.0)) {
            throw ConfigError("v_schedule_override[" + std::to_string(i) + "]", "must be positive");
        }
    }
}

std::string to_json(const ExperimentConfig& c) {
    json j;
    j["kernel"] = kernel_json(c.kernel);
    j["dimension"] = c.dimension;
    j["noise_var"] = c.noise_var;
    j["tau"] = c.tau;
    j["delta"] = c.delta;
    j["budgets"] = c.budgets;
    j["seeds"] = c.seeds;
    j["variant"] = variant_name(c.variant);
    j["v_scale"] = c.v_scale;
    j["grid_resolution"] = c.grid_resolution;
    j["covering_constant"] = c.covering_constant > 0.0 ? c.covering_constant : default_covering_constant(c.dimension);
    j["metric_dim"] = c.metric_dim > 0.0 ? c.metric_dim : static_cast<double>(c.dimension);
    j["output_dir"] = c.output_dir;
    j["inherit_parent_bounds"] = c.inherit_parent_bounds;
    j["level_bound"] = c.level_bound;
    j["write_traces"] = c.write_traces;
    j["level_bound_max_samples"] = c.level_bound_max_samples;
    j["v_schedule_override"] = c.v_schedule_override;
    return j.dump(2) + "\n";
}

}  // namespace mlse
