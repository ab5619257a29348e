#include "hybridfp/config.hpp"
#include "hybridfp/trace_io.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace hybridfp;

namespace {

SpaceDescriptor space_for(int dim, double p) {
    return p == 2.0 ? SpaceDescriptor::hilbert(dim) : SpaceDescriptor::lp(dim, p);
}

py::dict run_text(const std::string& text, const std::string& base_dir, std::optional<std::uint64_t> seed) {
    RunConfig cfg = parse_config(text, base_dir);
    if (seed) cfg.settings.rng_seed = *seed;
    const IterationTrace trace = [&] {
        py::gil_scoped_release release;
        return run(cfg.instance, cfg.params, cfg.settings);
    }();
    py::dict out;
    out["name"] = cfg.name;
    out["status"] = std::string(to_string(trace.status));
    out["message"] = trace.message;
    out["final_point"] = trace.final_point.coords();
    out["iterations"] = trace.records.size();
    out["csv"] = trace_csv(trace);
    out["summary_json"] = summary_json(trace);
    return out;
}

py::list verify_text(const std::string& text, int samples, std::uint64_t seed) {
    const RunConfig cfg = parse_config(text);
    const VerificationReport rep = verify_problem(cfg.instance, samples, seed);
    py::list out;
    for (const auto& c : rep.checks)
        out.append(py::make_tuple(c.name, c.passed, c.worst_slack, c.tolerance));
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Hybrid projection iteration in finite-dimensional l_p spaces";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    m.def("run_config", &run_text, py::arg("text"), py::arg("base_dir") = "", py::arg("seed") = py::none(),
          "Run one JSON config. Returns status, final point, trace CSV and summary JSON.");
    m.def("verify_config", &verify_text, py::arg("text"), py::arg("samples") = 1000, py::arg("seed") = 0,
          "Sampled structural checks as (name, passed, worst_slack, tolerance) tuples.");

    m.def(
        "duality_map",
        [](const Vector& x, double p) { return duality_map(Point(space_for(int(x.size()), p), x)).coords(); },
        py::arg("x"), py::arg("p") = 2.0);
    m.def(
        "inverse_duality_map",
        [](const Vector& w, double p) {
            return inverse_duality_map(DualPoint(space_for(int(w.size()), p), w)).coords();
        },
        py::arg("w"), py::arg("p") = 2.0);
    m.def(
        "lyapunov",
        [](const Vector& x, const Vector& y, double p) {
            const auto sp = space_for(int(x.size()), p);
            return lyapunov(Point(sp, x), Point(sp, y));
        },
        py::arg("x"), py::arg("y"), py::arg("p") = 2.0);
}
