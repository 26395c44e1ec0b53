#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "conoflow/cli.hpp"
#include "conoflow/error.hpp"
#include "conoflow/flow.hpp"
#include "conoflow/geometry.hpp"
#include "conoflow/measure.hpp"
#include "conoflow/potentials.hpp"
#include "conoflow/quantum.hpp"

namespace py = pybind11;
using namespace conoflow;

namespace {

py::array_t<std::complex<double>> amplitudes(const WaveState& s) {
  const auto& g = s.grid;
  std::vector<py::ssize_t> shape = {static_cast<py::ssize_t>(g.points[0])};
  if (g.dimension == 2) shape.push_back(static_cast<py::ssize_t>(g.points[1]));
  py::array_t<std::complex<double>> out(shape);
  std::copy(s.psi.begin(), s.psi.end(), out.mutable_data());
  return out;
}

py::dict report_dict(const Report& r) {
  py::dict d;
  d["status"] = r.status;
  d["exit_code"] = r.exit_code();
  d["error_code"] = r.error_code;
  d["message"] = r.message;
  d["observables"] = r.observables;
  d["notes"] = r.notes;
  d["artifacts"] = r.artifacts;
  d["config"] = serialize(r.config);
  return d;
}

}  // namespace

PYBIND11_MODULE(_conoflow, m) {
  m.doc() = "Hamiltonian flows and semiclassical measures for conormal potentials";

  static py::exception<Error> error(m, "ConoflowError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      std::string msg = std::string(to_string(e.code())) + ": " + e.what();
      for (const auto& v : e.violations()) msg += "\n  " + v;
      PyErr_SetString(error.ptr(), msg.c_str());
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), (std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  py::enum_<Side>(m, "Side").value("Right", Side::Right).value("Left", Side::Left);

  py::class_<PhasePoint>(m, "PhasePoint")
      .def(py::init<double, double, double, double>(), py::arg("x") = 0.0, py::arg("xi") = 0.0,
           py::arg("y") = 0.0, py::arg("eta") = 0.0)
      .def_readwrite("x", &PhasePoint::x)
      .def_readwrite("xi", &PhasePoint::xi)
      .def_readwrite("y", &PhasePoint::y)
      .def_readwrite("eta", &PhasePoint::eta)
      .def("__eq__", [](const PhasePoint& a, const PhasePoint& b) { return a == b; })
      .def("__repr__", [](const PhasePoint& r) {
        return "PhasePoint(" + std::to_string(r.x) + ", " + std::to_string(r.xi) + ", " +
               std::to_string(r.y) + ", " + std::to_string(r.eta) + ")";
      });
  m.def("distance", &distance);

  py::class_<Interval>(m, "Interval")
      .def(py::init<double, double>(), py::arg("lo") = 0.0, py::arg("hi") = 0.0)
      .def_readwrite("lo", &Interval::lo)
      .def_readwrite("hi", &Interval::hi);
  py::class_<PhaseSpaceBox>(m, "PhaseSpaceBox")
      .def(py::init<Interval, Interval, Interval, Interval>(), py::arg("x"), py::arg("xi"),
           py::arg("y") = Interval{}, py::arg("eta") = Interval{})
      .def_readwrite("x", &PhaseSpaceBox::x)
      .def_readwrite("xi", &PhaseSpaceBox::xi)
      .def_readwrite("y", &PhaseSpaceBox::y)
      .def_readwrite("eta", &PhaseSpaceBox::eta)
      .def("inflated", &PhaseSpaceBox::inflated);

  py::class_<SmoothPart>(m, "SmoothPart")
      .def_static("zero", &SmoothPart::zero)
      .def_static("poly", &SmoothPart::poly, py::arg("v0"), py::arg("v1") = 0.0,
                  py::arg("v2") = 0.0, py::arg("vy") = 0.0, py::arg("vyy") = 0.0,
                  py::arg("vxy") = 0.0)
      .def_static("cosy", &SmoothPart::cosy, py::arg("v0"), py::arg("v1"), py::arg("v2"),
                  py::arg("a"), py::arg("k"));
  py::class_<SingularPart>(m, "SingularPart")
      .def_static("none", &SingularPart::none)
      .def_static("step", &SingularPart::step, py::arg("c"))
      .def_static("kink", &SingularPart::kink, py::arg("c"))
      .def_static("powkink", &SingularPart::powkink, py::arg("c"))
      .def_static("power", &SingularPart::power, py::arg("c"), py::arg("alpha"))
      .def_static("xlog", &SingularPart::xlog, py::arg("c"))
      .def("with_y", &SingularPart::with_y, py::arg("slope"), py::arg("curvature"));

  py::class_<ConormalPotential>(m, "ConormalPotential")
      .def(py::init<SmoothPart, SingularPart>(), py::arg("smooth"),
           py::arg("singular") = SingularPart::none())
      .def("eval", &ConormalPotential::eval, py::arg("x"), py::arg("y") = 0.0,
           py::arg("dx_order") = 0, py::arg("dy_order") = 0, py::arg("side") = Side::Right)
      .def("__call__", &ConormalPotential::value, py::arg("x"), py::arg("y") = 0.0)
      .def_property_readonly("regularity",
                             [](const ConormalPotential& V) { return std::string(to_string(V.regularity())); })
      .def("__repr__", &ConormalPotential::describe);
  m.def("mollify", &mollify, py::arg("V"), py::arg("epsilon"));

  py::class_<MetricModel>(m, "MetricModel")
      .def_static("flat", &MetricModel::flat, py::arg("dimension") = 2)
      .def_static("power", &MetricModel::power, py::arg("a"), py::arg("dimension") = 2)
      .def_static("exponential", &MetricModel::exponential, py::arg("k"), py::arg("b") = 0.0,
                  py::arg("dimension") = 2)
      .def_property_readonly("dimension", &MetricModel::dimension)
      .def("__repr__", &MetricModel::name);
  m.def("principal_curvatures", &principal_curvatures, py::arg("metric"), py::arg("y"));
  m.def(
      "curvature_condition",
      [](const MetricModel& g, const ConormalPotential& V, double y, Side side) {
        const CurvatureCheck c = curvature_condition(g, V, y, side);
        return py::make_tuple(c.holds, c.vacuous);
      },
      py::arg("metric"), py::arg("V"), py::arg("y"), py::arg("side") = Side::Right);

  py::class_<FlowOptions>(m, "FlowOptions")
      .def(py::init<>())
      .def_readwrite("tol", &FlowOptions::tol)
      .def_readwrite("xi_min", &FlowOptions::xi_min)
      .def_readwrite("t_inner", &FlowOptions::t_inner)
      .def_readwrite("window", &FlowOptions::window)
      .def_readwrite("glancing_span", &FlowOptions::glancing_span)
      .def_readwrite("r1_threshold", &FlowOptions::r1_threshold)
      .def_readwrite("exit_band", &FlowOptions::exit_band);

  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly("t",
                             [](const Trajectory& tr) {
                               std::vector<double> t;
                               for (const auto& s : tr.samples) t.push_back(s.t);
                               return py::array_t<double>(t.size(), t.data());
                             })
      .def_property_readonly("points",
                             [](const Trajectory& tr) {
                               py::array_t<double> a({tr.samples.size(), std::size_t{4}});
                               auto v = a.mutable_unchecked<2>();
                               for (std::size_t i = 0; i < tr.samples.size(); ++i) {
                                 const auto& r = tr.samples[i].rho;
                                 v(i, 0) = r.x, v(i, 1) = r.xi, v(i, 2) = r.y, v(i, 3) = r.eta;
                               }
                               return a;
                             })
      .def_property_readonly("final_point", &Trajectory::final_point)
      .def_readonly("energy_drift", &Trajectory::energy_drift)
      .def_property_readonly("regimes", [](const Trajectory& tr) {
        std::vector<std::tuple<double, double, std::string>> out;
        for (const auto& s : tr.segments) out.emplace_back(s.t0, s.t1, std::string(to_string(s.regime)));
        return out;
      });

  m.def("p", &p, py::arg("V"), py::arg("metric"), py::arg("rho"));
  m.def("R1", &R1, py::arg("V"), py::arg("metric"), py::arg("rho0"), py::arg("t"),
        py::arg("window") = 0.5);
  m.def("integrate", &integrate, py::arg("V"), py::arg("metric"), py::arg("rho0"), py::arg("T"),
        py::arg("options") = FlowOptions{});

  py::class_<Grid>(m, "Grid")
      .def_static("line", &Grid::line, py::arg("extent"), py::arg("points"))
      .def_static("plane", &Grid::plane, py::arg("extent_x"), py::arg("nx"), py::arg("extent_y"),
                  py::arg("ny"))
      .def_readonly("dimension", &Grid::dimension)
      .def_property_readonly("size", &Grid::size)
      .def("coordinates", [](const Grid& g, int axis) {
        std::vector<double> c(g.points[axis]);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = g.coordinate(axis, i);
        return py::array_t<double>(c.size(), c.data());
      }, py::arg("axis") = 0);

  py::class_<WaveState>(m, "WaveState")
      .def_readonly("grid", &WaveState::grid)
      .def_readonly("h", &WaveState::h)
      .def_readonly("t", &WaveState::t)
      .def_property_readonly("psi", &amplitudes)
      .def("norm", &WaveState::norm);

  m.def("coherent_state", &coherent_state, py::arg("grid"), py::arg("h"), py::arg("rho0"),
        py::arg("sigma"));
  m.def("propagate", &propagate, py::arg("psi"), py::arg("V"), py::arg("T"), py::arg("dt") = 0.0,
        py::call_guard<py::gil_scoped_release>());
  m.def("husimi_center", &husimi_center, py::arg("psi"));
  m.def("write_snapshot", &write_snapshot, py::arg("path"), py::arg("psi"));
  m.def("read_snapshot", &read_snapshot, py::arg("path"));

  m.def("husimi", &husimi, py::arg("u"), py::arg("rho"), py::arg("sigma") = 0.0);
  m.def("box_mass", &box_mass, py::arg("u"), py::arg("box"), py::arg("sigma") = 0.0,
        py::arg("resolution") = 8);
  m.def("shell_concentration", &shell_concentration, py::arg("u"), py::arg("V"), py::arg("E"),
        py::arg("delta"), py::arg("sigma") = 0.0, py::arg("resolution") = 8,
        py::arg("window") = std::nullopt);

  m.def("validate", [](const std::string& text) { return serialize(validate(text)); },
        py::arg("text"), "Validated config in canonical form.");
  m.def(
      "run",
      [](const std::string& text, const std::string& out_dir) {
        const ExperimentConfig c = validate(text);
        Report r;
        {
          py::gil_scoped_release release;
          r = run(c, out_dir);
        }
        return report_dict(r);
      },
      py::arg("config_text"), py::arg("out_dir"));
}
