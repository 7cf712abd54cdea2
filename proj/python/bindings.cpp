#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>

#include "gheat/expectation.hpp"
#include "gheat/grid.hpp"
#include "gheat/kernels.hpp"
#include "gheat/linear_she.hpp"
#include "gheat/noise.hpp"
#include "gheat/parallel.hpp"
#include "gheat/rng.hpp"
#include "gheat/runner.hpp"

namespace py = pybind11;
using namespace gheat;

namespace {

// Guard for C++ parallel regions that call back into Python: the worker
// threads do not hold the GIL, so force single-threaded execution for the
// duration of the call.
struct SingleThreadScope {
    int saved;
    SingleThreadScope() : saved(parallel::thread_count_storage()) {
        parallel::set_thread_count(1);
    }
    ~SingleThreadScope() { parallel::set_thread_count(saved); }
};

nlohmann::json to_json(const py::dict& d) {
    return nlohmann::json::parse(
        py::module_::import("json").attr("dumps")(d).cast<std::string>());
}

py::object from_json(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

noise::ControlKind kind_from_string(const std::string& s) {
    if (s == "constant") return noise::ControlKind::constant;
    if (s == "bang_bang_random") return noise::ControlKind::bang_bang_random;
    if (s == "feedback") return noise::ControlKind::feedback;
    throw std::invalid_argument("unknown control kind: " + s);
}

}  // namespace

PYBIND11_MODULE(_gheat, m) {
    m.doc() = "stochastic heat equation laboratory (C++ core bindings)";

    py::class_<GridSpec>(m, "GridSpec")
        .def_readonly("t_end", &GridSpec::t_end)
        .def_readonly("x_lo", &GridSpec::x_lo)
        .def_readonly("x_hi", &GridSpec::x_hi)
        .def_readonly("nt", &GridSpec::nt)
        .def_readonly("nx", &GridSpec::nx)
        .def_readonly("dt", &GridSpec::dt)
        .def_readonly("dx", &GridSpec::dx)
        .def("t", &GridSpec::t)
        .def("x", &GridSpec::x)
        .def("__repr__", [](const GridSpec& g) {
            std::ostringstream os;
            os << "GridSpec(t_end=" << g.t_end << ", x_lo=" << g.x_lo
               << ", x_hi=" << g.x_hi << ", nt=" << g.nt << ", nx=" << g.nx
               << ")";
            return os.str();
        });
    m.def("make_grid", &make_grid, py::arg("t_end"), py::arg("x_lo"),
          py::arg("x_hi"), py::arg("nt"), py::arg("nx"));

    py::class_<noise::SigmaBounds>(m, "SigmaBounds")
        .def(py::init(&noise::make_bounds), py::arg("lo"), py::arg("hi"))
        .def_readonly("lo", &noise::SigmaBounds::lo)
        .def_readonly("hi", &noise::SigmaBounds::hi);

    py::class_<noise::VolatilityControl>(m, "VolatilityControl")
        .def_readonly("id", &noise::VolatilityControl::id)
        .def_readonly("constant_value", &noise::VolatilityControl::constant_value);
    m.def(
        "make_control",
        [](const GridSpec& g, const noise::SigmaBounds& b, const std::string& kind,
           double constant_value, std::uint64_t seed) {
            return noise::make_control(g, b, kind_from_string(kind),
                                       constant_value, seed);
        },
        py::arg("grid"), py::arg("bounds"), py::arg("kind"),
        py::arg("constant_value") = 0.0, py::arg("seed") = 0);
    m.def("default_dictionary", &noise::default_dictionary, py::arg("grid"),
          py::arg("bounds"), py::arg("seed"));

    py::class_<noise::NoiseRealization>(m, "NoiseRealization")
        .def_readonly("control_id", &noise::NoiseRealization::control_id)
        .def_readonly("increments", &noise::NoiseRealization::increments)
        .def_readonly("sigma", &noise::NoiseRealization::sigma)
        .def("at", &noise::NoiseRealization::at)
        .def("sigma_at", &noise::NoiseRealization::sigma_at);
    m.def(
        "sample_noise",
        [](const GridSpec& g, const noise::VolatilityControl& c,
           std::uint64_t master, std::uint64_t scenario, std::uint64_t realization) {
            return noise::sample_noise(g, c, {master, scenario, realization});
        },
        py::arg("grid"), py::arg("control"), py::arg("master_seed"),
        py::arg("scenario") = 0, py::arg("realization") = 0);

    m.def("heat_kernel", &kernels::heat_kernel, py::arg("t"), py::arg("x"));
    m.def("p_increment_x_sq_integral", &kernels::p_increment_x_sq_integral,
          py::arg("t"), py::arg("delta"));
    m.def("p_increment_t_sq_integral", &kernels::p_increment_t_sq_integral,
          py::arg("delta"));
    m.def("p_tail_sq_integral", &kernels::p_tail_sq_integral, py::arg("delta"));
    m.def("normal_icdf", &rng::normal_icdf, py::arg("p"));

    m.def(
        "g_function",
        [](double lo, double hi, double a) {
            return expectation::g_function(noise::make_bounds(lo, hi), a);
        },
        py::arg("sigma_lo"), py::arg("sigma_hi"), py::arg("a"));
    m.def(
        "solve_g_heat_pde",
        [](const std::function<double(double)>& payoff, double t_end, double lo,
           double hi, double half_width, int nx, double cfl) {
            expectation::PdeGrid1d grid{half_width, nx, cfl};
            return expectation::solve_g_heat_pde(payoff, t_end,
                                                 noise::make_bounds(lo, hi), grid);
        },
        py::arg("payoff"), py::arg("t_end"), py::arg("sigma_lo"),
        py::arg("sigma_hi"), py::arg("half_width"), py::arg("nx"),
        py::arg("cfl") = 0.9);

    py::class_<expectation::ScenarioEnsemble>(m, "ScenarioEnsemble")
        .def_readonly("upper_estimate", &expectation::ScenarioEnsemble::upper_estimate)
        .def_readonly("lower_estimate", &expectation::ScenarioEnsemble::lower_estimate)
        .def_readonly("upper_stderr", &expectation::ScenarioEnsemble::upper_stderr)
        .def_readonly("lower_stderr", &expectation::ScenarioEnsemble::lower_stderr);
    m.def(
        "envelope",
        [](const expectation::Functional& f, const GridSpec& g,
           const std::vector<noise::VolatilityControl>& controls, int realizations,
           std::uint64_t master_seed) {
            SingleThreadScope st;  // functional is a Python callable
            integrals::EnsembleSpec es{g, controls, realizations, master_seed};
            return expectation::envelope(f, es);
        },
        py::arg("functional"), py::arg("grid"), py::arg("controls"),
        py::arg("realizations"), py::arg("master_seed"));

    m.def("set_thread_count", &parallel::set_thread_count, py::arg("n"));
    m.def("commands", [] { return runner::commands(); });
    m.def(
        "default_config",
        [](const std::string& command) {
            return from_json(runner::default_config(command));
        },
        py::arg("command"));
    m.def(
        "run",
        [](const py::dict& config) {
            const nlohmann::json cfg = to_json(config);
            std::ostringstream log;
            runner::RunResult res;
            {
                py::gil_scoped_release release;
                res = runner::run(cfg, log);
            }
            py::list checks;
            for (const auto& c : res.checks) {
                py::dict d;
                d["module"] = c.module;
                d["name"] = c.name;
                d["scenario"] = c.scenario;
                d["statistic"] = c.statistic;
                d["bound"] = c.bound;
                d["stderr"] = c.stderr_;
                d["pass"] = c.pass;
                checks.append(d);
            }
            py::dict out;
            out["checks"] = checks;
            out["summary"] = from_json(res.summary);
            out["all_passed"] = res.all_passed();
            out["exit_code"] = runner::exit_code(res);
            out["log"] = log.str();
            return out;
        },
        py::arg("config"));
}
