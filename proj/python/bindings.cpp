#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <string>

#include "anomex/errors.hpp"
#include "anomex/grid_solver.hpp"
#include "anomex/parabolic.hpp"
#include "anomex/shooting.hpp"
#include "anomex/verification.hpp"

namespace py = pybind11;
using namespace anomex;

namespace {

py::array_t<double> to_numpy(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

py::array_t<double> nodes(const RadialGrid& g) {
  py::array_t<double> out(g.nodes());
  auto r = out.mutable_unchecked<1>();
  for (std::size_t i = 0; i < g.nodes(); ++i) r(i) = g.r(i);
  return out;
}

ProfileField field(const RadialGrid& g, py::array_t<double, py::array::c_style | py::array::forcecast> v) {
  return ProfileField(g, std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace

PYBIND11_MODULE(_anomex, m) {
  m.doc() = "Anomalous exponents and self-similar profiles of u_t + F(D^2 u) = 0";

  static py::exception<Error> exc(m, "AnomexError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      exc((std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  py::class_<OperatorSpec>(m, "Operator")
      .def(py::init([](const std::string& text) { return parse_operator(text); }), py::arg("spec"))
      .def_static("pucci_plus", &OperatorSpec::pucci_plus, py::arg("lam"), py::arg("Lam"))
      .def_static("pucci_minus", &OperatorSpec::pucci_minus, py::arg("lam"), py::arg("Lam"))
      .def_static("barenblatt", &OperatorSpec::barenblatt, py::arg("gamma"))
      .def_static("linear", &OperatorSpec::linear, py::arg("c"))
      .def_static("max_of_linear", &OperatorSpec::max_of_linear, py::arg("coeffs"))
      .def_property_readonly("lam", [](const OperatorSpec& s) { return s.bounds().lambda; })
      .def_property_readonly("Lam", [](const OperatorSpec& s) { return s.bounds().Lambda; })
      .def("__call__",
           [](const OperatorSpec& s, std::vector<double> eig) { return eval_operator(s, HessianSpectrum{eig}); },
           py::arg("eigenvalues"), "F evaluated on a Hessian spectrum.")
      .def("__eq__", [](const OperatorSpec& a, const OperatorSpec& b) { return a == b; })
      .def("__str__", [](const OperatorSpec& s) { return to_string(s); })
      .def("__repr__", [](const OperatorSpec& s) { return "Operator(\"" + to_string(s) + "\")"; });

  m.def("dual", &dual, py::arg("op"));

  py::class_<RadialGrid>(m, "RadialGrid")
      .def(py::init<double, std::size_t, int>(), py::arg("R_max"), py::arg("N"), py::arg("n"))
      .def_static("with_spacing", &RadialGrid::with_spacing, py::arg("R_max"), py::arg("h"), py::arg("n"))
      .def_property_readonly("R_max", &RadialGrid::R_max)
      .def_property_readonly("N", &RadialGrid::intervals)
      .def_property_readonly("h", &RadialGrid::h)
      .def_property_readonly("n", &RadialGrid::dim)
      .def_property_readonly("r", &nodes);

  py::class_<EigenResult>(m, "EigenResult")
      .def_readonly("alpha", &EigenResult::alpha)
      .def_property_readonly("method", [](const EigenResult& e) { return std::string(to_string(e.method)); })
      .def_readonly("iterations", &EigenResult::iterations)
      .def_readonly("residual", &EigenResult::residual)
      .def_readonly("bracket", &EigenResult::bracket)
      .def_property_readonly("grid", [](const EigenResult& e) { return e.profile.grid; })
      .def_property_readonly("r", [](const EigenResult& e) { return nodes(e.profile.grid); })
      .def_property_readonly("phi", [](const EigenResult& e) { return to_numpy(e.profile.values); })
      .def("__repr__", [](const EigenResult& e) {
        return "EigenResult(alpha=" + std::to_string(e.alpha) + ", method=" + std::string(to_string(e.method)) + ")";
      });

  m.def("exponent_bounds",
        [](double lam, double Lam, int n) { return exponent_bounds(EllipticityBounds::make(lam, Lam), n); },
        py::arg("lam"), py::arg("Lam"), py::arg("n"));

  m.def(
      "shoot",
      [](const OperatorSpec& op, const RadialGrid& g, double alpha) {
        const ShootingOutcome s = shoot(op, g, alpha);
        static const char* names[] = {"CrossesZero", "SlowDecay", "FastDecay"};
        py::dict d;
        d["classification"] = names[static_cast<int>(s.classification)];
        d["r_cross"] = s.r_cross;
        d["final_r"] = s.final_r;
        d["final_log_derivative"] = s.final_log_derivative;
        d["phi"] = to_numpy(s.values);
        return d;
      },
      py::arg("op"), py::arg("grid"), py::arg("alpha"));

  m.def(
      "find_alpha_shooting", [](const OperatorSpec& op, const RadialGrid& g, double tol) {
        return find_alpha_shooting(op, g, tol);
      },
      py::arg("op"), py::arg("grid"), py::arg("tol") = 1e-8);
  m.def("inverse_power_iteration", &inverse_power_iteration, py::arg("op"), py::arg("grid"), py::arg("tol") = 1e-8,
        py::arg("max_iter") = 2000, py::call_guard<py::gil_scoped_release>());
  m.def("normalized_rescaled_flow", &normalized_rescaled_flow, py::arg("op"), py::arg("grid"),
        py::arg("s_final") = 20.0, py::arg("tol") = 1e-6, py::call_guard<py::gil_scoped_release>());
  m.def(
      "exponent_pair",
      [](const OperatorSpec& op, const RadialGrid& g, double tol) {
        const ExponentPair p = exponent_pair(op, g, tol);
        return py::make_tuple(p.alpha_plus, p.alpha_minus);
      },
      py::arg("op"), py::arg("grid"), py::arg("tol") = 1e-8);

  m.def(
      "apply_resolvent",
      [](const OperatorSpec& op, const RadialGrid& g, py::array_t<double, py::array::c_style | py::array::forcecast> v) {
        return to_numpy(apply_resolvent(op, g, field(g, v)).u.values);
      },
      py::arg("op"), py::arg("grid"), py::arg("v"));

  m.def(
      "evolve_cauchy",
      [](const OperatorSpec& op, const RadialGrid& g, py::array_t<double, py::array::c_style | py::array::forcecast> u0,
         double t_final, std::vector<double> snapshot_times, double alpha) {
        EvolveOptions opt;
        opt.alpha = alpha;
        ParabolicTrace tr;
        const ProfileField data = field(g, u0);
        {
          py::gil_scoped_release release;
          tr = evolve_cauchy(op, data, t_final, snapshot_times, opt);
        }
        py::dict d;
        d["snapshots"] = tr.snapshots;
        d["cstar_estimates"] = tr.cstar_estimates;
        py::list profiles;
        for (const auto& s : tr.profile_snapshots) {
          profiles.append(py::make_tuple(s.t, nodes(s.u.grid), to_numpy(s.u.values)));
        }
        d["profiles"] = profiles;
        return d;
      },
      py::arg("op"), py::arg("grid"), py::arg("u0"), py::arg("t_final"), py::arg("snapshot_times") = std::vector<double>{},
      py::arg("alpha") = std::nan(""));

  py::class_<ConvergenceReport>(m, "ConvergenceReport")
      .def_readonly("sigmas", &ConvergenceReport::sigmas)
      .def_readonly("cstar", &ConvergenceReport::cstar)
      .def_readonly("sup_rel_err", &ConvergenceReport::sup_rel_err)
      .def_readonly("cauchy_diff", &ConvergenceReport::cauchy_diff);

  m.def(
      "convergence_report",
      [](const OperatorSpec& op, py::array_t<double, py::array::c_style | py::array::forcecast> g,
         const EigenResult& eig, std::vector<double> sigmas, const RadialGrid* data_grid) {
        const ProfileField data = field(data_grid ? *data_grid : eig.profile.grid, g);
        py::gil_scoped_release release;
        return convergence_report(op, data, eig.alpha, eig.profile, sigmas);
      },
      py::arg("op"), py::arg("g"), py::arg("eig"), py::arg("sigmas"), py::arg("data_grid") = nullptr,
      "Evolves g (on data_grid, default the profile's grid) and compares T_sigma u with C* phi.");

  py::class_<CheckResult>(m, "CheckResult")
      .def_readonly("name", &CheckResult::name)
      .def_readonly("passed", &CheckResult::passed)
      .def_readonly("worst_slack", &CheckResult::worst_slack)
      .def_readonly("location", &CheckResult::location)
      .def_readonly("tolerance", &CheckResult::tolerance)
      .def_property_readonly("details",
                             [](const CheckResult& c) {
                               py::dict d;
                               for (const auto& [k, v] : c.details) d[py::str(k)] = v;
                               return d;
                             })
      .def("__repr__", [](const CheckResult& c) {
        return "CheckResult(" + c.name + ", passed=" + (c.passed ? "True" : "False") + ")";
      });

  m.def(
      "check_gaussian_bounds",
      [](double lam, double Lam, int n, std::size_t samples) {
        const auto b = EllipticityBounds::make(lam, Lam);
        return check_gaussian_bounds(b, n, gaussian_bounds_samples(b, samples));
      },
      py::arg("lam"), py::arg("Lam"), py::arg("n"), py::arg("samples") = 1000);
  m.def(
      "check_special_subsolution",
      [](double lam, double Lam, int n, std::size_t samples, std::uint64_t seed) {
        const auto b = EllipticityBounds::make(lam, Lam);
        return check_special_subsolution(b, n, subsolution_samples(b, n, samples, seed));
      },
      py::arg("lam"), py::arg("Lam"), py::arg("n"), py::arg("samples") = 500, py::arg("seed") = 7);
  m.def("run_verification_suite", &run_verification_suite, py::arg("op"), py::arg("grid"), py::arg("tol") = 1e-8,
        py::call_guard<py::gil_scoped_release>());
}
