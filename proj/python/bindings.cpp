#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mlse/config.hpp"
#include "mlse/eval.hpp"
#include "mlse/experiment.hpp"
#include "mlse/gp.hpp"
#include "mlse/verify.hpp"

namespace py = pybind11;
using namespace mlse;

namespace {

MaternNu nu_from(double nu) {
    if (nu == 0.5) return MaternNu::Half;
    if (nu == 1.5) return MaternNu::ThreeHalves;
    if (nu == 2.5) return MaternNu::FiveHalves;
    throw std::invalid_argument("nu must be 0.5, 1.5 or 2.5");
}

// Rows of an (n, D) array.
std::vector<Point> rows_of(const Eigen::Ref<const Eigen::MatrixXd>& x) {
    std::vector<Point> out;
    out.reserve(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) out.emplace_back(x.row(i).transpose());
    return out;
}

py::dict row_dict(const RunRecord& r) {
    py::dict d;
    d["budget"] = r.budget;
    d["seed"] = r.seed;
    d["variant"] = variant_name(r.variant);
    d["D"] = r.dimension;
    d["kernel"] = r.kernel;
    d["tau"] = r.tau;
    d["v_scale"] = r.v_scale;
    d["l_value"] = r.discrepancy.l_value;
    d["sym_diff_fraction"] = r.discrepancy.sym_diff_fraction;
    d["j_n"] = r.info.j_n;
    d["mutual_info"] = r.info.mutual_info;
    d["n_refinements"] = r.summary.n_refinements;
    d["max_depth"] = r.summary.max_depth;
    d["e1_violations"] = r.diagnostics.e1_violations;
    d["e2_violations"] = r.diagnostics.e2_violations;
    d["wall_ms"] = r.wall_ms;
    d["n_e"] = r.summary.n_e;
    d["steps"] = r.summary.steps;
    d["ops"] = r.summary.ops.total();
    d["c4"] = r.info.c4;
    d["level_bound_violations"] = r.level_bound_violations;
    return d;
}

}  // namespace

PYBIND11_MODULE(_mlse, m) {
    m.doc() = "Level set estimation on hierarchical partitions";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<KernelSpec>(m, "Kernel")
        .def_static("se", &KernelSpec::squared_exponential, py::arg("scale") = 1.0, py::arg("length") = 1.0)
        .def_static(
            "matern",
            [](double nu, double scale, double length) { return KernelSpec::matern(nu_from(nu), scale, length); },
            py::arg("nu"), py::arg("scale") = 1.0, py::arg("length") = 1.0)
        .def_static("rq", &KernelSpec::rational_quadratic, py::arg("scale") = 1.0, py::arg("length") = 1.0,
                    py::arg("shape") = 1.0)
        .def_static(
            "sum",
            [](const std::vector<std::pair<double, KernelSpec>>& parts) {
                std::vector<WeightedKernel> c;
                for (const auto& [w, k] : parts) c.push_back({w, k});
                return KernelSpec::weighted_sum(std::move(c));
            },
            py::arg("components"))
        .def_property_readonly("name", [](const KernelSpec& k) { return kernel_name(k); })
        .def("__call__",
             [](const KernelSpec& k, const Point& a, const Point& b) { return covariance(k, a, b); })
        .def("at", [](const KernelSpec& k, double r) { return covariance_at(k, r); }, py::arg("distance"))
        .def("gram", [](const KernelSpec& k, const Eigen::MatrixXd& x) { return gram_matrix(k, rows_of(x)); })
        .def("__repr__", [](const KernelSpec& k) { return "Kernel(" + kernel_name(k) + ")"; });

    py::class_<PosteriorState>(m, "GaussianProcess")
        .def(py::init([](const KernelSpec& k, double noise_var, int dim) {
                 validate(k);
                 return PosteriorState(k, noise_var, dim);
             }),
             py::arg("kernel"), py::arg("noise_var"), py::arg("dimension"))
        .def("update", &PosteriorState::update, py::arg("x"), py::arg("y"))
        .def(
            "posterior",
            [](const PosteriorState& s, const Point& x) {
                const Estimate e = s.posterior(x);
                return py::make_tuple(e.mean, e.stddev);
            },
            py::arg("x"))
        .def("__len__", &PosteriorState::size);

    py::class_<ExperimentConfig>(m, "Config")
        .def_readwrite("dimension", &ExperimentConfig::dimension)
        .def_readwrite("noise_var", &ExperimentConfig::noise_var)
        .def_readwrite("tau", &ExperimentConfig::tau)
        .def_readwrite("delta", &ExperimentConfig::delta)
        .def_readwrite("budgets", &ExperimentConfig::budgets)
        .def_readwrite("seeds", &ExperimentConfig::seeds)
        .def_readwrite("v_scale", &ExperimentConfig::v_scale)
        .def_readwrite("grid_resolution", &ExperimentConfig::grid_resolution)
        .def_readwrite("output_dir", &ExperimentConfig::output_dir)
        .def_readwrite("kernel", &ExperimentConfig::kernel)
        .def_property(
            "variant", [](const ExperimentConfig& c) { return variant_name(c.variant); },
            [](ExperimentConfig& c, const std::string& v) { c.variant = parse_variant(v); })
        .def("to_json", [](const ExperimentConfig& c) { return to_json(c); })
        .def("validate", [](const ExperimentConfig& c) { validate(c); });

    m.def("parse_config", &parse_config, py::arg("text"));
    m.def("load_config", &load_config, py::arg("path"));

    m.def(
        "run",
        [](const ExperimentConfig& c, int threads, std::uint64_t seed_offset, bool write_files) {
            RunnerOptions o;
            o.threads = threads;
            o.seed_offset = seed_offset;
            o.write_files = write_files;
            SweepResult s;
            {
                py::gil_scoped_release release;
                s = run_experiment(c, o);
            }
            py::list rows;
            for (const auto& r : s.rows) rows.append(row_dict(r));
            return rows;
        },
        py::arg("config"), py::arg("threads") = 1, py::arg("seed_offset") = 0, py::arg("write_files") = false,
        "Runs the sweep; one dict per (budget, seed).");

    m.def(
        "verify",
        [](const ExperimentConfig& c, int threads, std::uint64_t seed_offset) {
            VerifyOptions o;
            o.threads = threads;
            o.seed_offset = seed_offset;
            VerifyReport rep;
            {
                py::gil_scoped_release release;
                rep = verify_suite(c, o);
            }
            py::list checks;
            for (const auto& ch : rep.checks) {
                py::dict d;
                d["name"] = ch.name;
                d["passed"] = ch.passed;
                d["checked"] = ch.checked;
                d["failed"] = ch.failed;
                d["detail"] = ch.detail;
                checks.append(d);
            }
            return checks;
        },
        py::arg("config"), py::arg("threads") = 1, py::arg("seed_offset") = 0);

    m.def(
        "mutual_information",
        [](const Eigen::MatrixXd& x, const KernelSpec& k, double noise_var) {
            return mutual_information(rows_of(x), k, noise_var);
        },
        py::arg("points"), py::arg("kernel"), py::arg("noise_var"));
    m.def("info_constant_c4", &info_constant_c4, py::arg("kernel"), py::arg("noise_var"));
    m.def("quantile", &quantile, py::arg("values"), py::arg("q"));

    m.attr("RESULTS_HEADER") = std::string(kResultsHeader);
    m.attr("__version__") = "0.1.0";
}
