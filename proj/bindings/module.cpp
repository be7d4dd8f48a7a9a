#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ncentre/errors.hpp"
#include "ncentre/experiment.hpp"
#include "ncentre/functionals.hpp"
#include "ncentre/homotopy.hpp"
#include "ncentre/kepler.hpp"
#include "ncentre/levi_civita.hpp"
#include "ncentre/minimizer.hpp"
#include "ncentre/path.hpp"
#include "ncentre/potential.hpp"

namespace py = pybind11;
using namespace ncentre;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<Vec3> points_from(const Array& a) {
  const auto buf = a.request();
  if (buf.ndim != 2 || (buf.shape[1] != 2 && buf.shape[1] != 3))
    throw Error(ErrorCode::invalid_argument, "expected an (n, 2) or (n, 3) array of points");
  const auto* p = static_cast<const double*>(buf.ptr);
  const auto cols = buf.shape[1];
  std::vector<Vec3> out(static_cast<std::size_t>(buf.shape[0]));
  for (py::ssize_t i = 0; i < buf.shape[0]; ++i)
    out[i] = Vec3(p[i * cols], p[i * cols + 1], cols == 3 ? p[i * cols + 2] : 0.0);
  return out;
}

Vec3 point_from(const std::vector<double>& xs) {
  if (xs.size() != 2 && xs.size() != 3) throw Error(ErrorCode::invalid_argument, "expected [x, y] or [x, y, z]");
  return {xs[0], xs[1], xs.size() == 3 ? xs[2] : 0.0};
}

Array to_array(const std::vector<Vec3>& pts) {
  Array out({static_cast<py::ssize_t>(pts.size()), py::ssize_t{3}});
  auto m = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (int c = 0; c < 3; ++c) m(static_cast<py::ssize_t>(i), c) = pts[i][c];
  return out;
}

PotentialSpec spec_from(const std::string& text) { return potential_from_json(nlohmann::json::parse(text)); }

DiscretePath path_from(const PotentialSpec& spec, const Array& nodes) { return {spec.mode(), points_from(nodes)}; }

}  // namespace

PYBIND11_MODULE(_ncentre, m) {
  m.doc() = "Fixed-energy N-centre problem: discrete Maupertuis minimization and diagnostics";

  // The module attribute keeps the type alive for the translator.
  static PyObject* error_type = py::exception<Error>(m, "NcentreError", PyExc_ValueError).ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(error_type, (std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  m.def("evaluate", [](const std::string& spec, const Array& points) {
    const auto s = spec_from(spec);
    std::vector<double> out;
    for (const auto& q : points_from(points)) out.push_back(evaluate(s, q));
    return out;
  }, py::arg("potential_json"), py::arg("points"));

  m.def("maupertuis", [](const std::string& spec, const Array& nodes, double h, double delta) {
    const auto s = spec_from(spec);
    return to_json(maupertuis(path_from(s, nodes), s, h, delta)).dump();
  }, py::arg("potential_json"), py::arg("nodes"), py::arg("h"), py::arg("delta") = 0.0);

  m.def("jacobi_length", [](const std::string& spec, const Array& nodes, double h) {
    const auto s = spec_from(spec);
    return jacobi_length(path_from(s, nodes), s, h);
  }, py::arg("potential_json"), py::arg("nodes"), py::arg("h"));

  m.def("winding_vector", [](const std::string& spec, const Array& nodes) {
    const auto s = spec_from(spec);
    const auto path = path_from(s, nodes);
    return winding_vector(path, ClosurePath::canonical(s, path.start(), path.end()), s);
  }, py::arg("potential_json"), py::arg("nodes"));

  m.def("spiral_path", [](const std::vector<double>& p1, const std::vector<double>& p2,
                          const std::vector<double>& centre, double angle, int segments) {
    return to_array(spiral_path(point_from(p1), point_from(p2), point_from(centre), angle, segments).nodes());
  }, py::arg("p1"), py::arg("p2"), py::arg("centre"), py::arg("angle"), py::arg("segments"));

  m.def("parabolic_angle_quadrature", &parabolic_angle_quadrature, py::arg("alpha"));
  m.def("min_total_angle", &min_total_angle, py::arg("alpha"));

  m.def("lc_diagnostics", [](const std::string& spec, const Array& nodes, double h, int centre) {
    const auto s = spec_from(spec);
    return to_json(lc_diagnostics(path_from(s, nodes), s, h, centre)).dump();
  }, py::arg("potential_json"), py::arg("nodes"), py::arg("h"), py::arg("centre"));

  m.def("solve", [](const std::string& config, int jobs) {
    const auto cfg = experiment_from_json(nlohmann::json::parse(config));
    std::vector<SolveRun> runs;
    {
      py::gil_scoped_release release;
      runs = run_solve(cfg, jobs);
    }
    py::list out;
    for (const auto& run : runs) {
      py::dict d;
      d["start"] = run.start;
      d["seed"] = run.seed;
      d["error"] = run.error;
      if (run.result) {
        d["result"] = to_json(*run.result).dump();
        d["nodes"] = to_array(run.result->path.nodes());
      }
      out.append(d);
    }
    return out;
  }, py::arg("config_json"), py::arg("jobs") = 1);

  m.def("run_command", [](const std::string& command, const std::string& config, const std::string& out, int jobs) {
    const auto cfg = experiment_from_json(nlohmann::json::parse(config));
    py::gil_scoped_release release;
    if (command == "solve") return cmd_solve(cfg, out, jobs);
    if (command == "sweep-eps") return cmd_sweep_eps(cfg, out, jobs);
    if (command == "oracle") return cmd_oracle(cfg, out);
    if (command == "lc-check") return cmd_lc_check(cfg, out, jobs);
    throw Error(ErrorCode::invalid_argument, "unknown command '" + command + "'");
  }, py::arg("command"), py::arg("config_json"), py::arg("out"), py::arg("jobs") = 1);
}
