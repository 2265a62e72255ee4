// Python bindings for the main operations: group arithmetic, homogeneous
// norms, surface presets, measures, blow-ups and the inequality checks.
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "carnot/blowup.hpp"
#include "carnot/inequalities.hpp"
#include "carnot/parallel.hpp"
#include "carnot/presets.hpp"
#include "carnot/runner.hpp"

namespace py = pybind11;
using namespace carnot;

namespace {

py::dict report_dict(const InequalityReport& r) {
  py::dict d;
  d["check"] = r.check;
  d["equation"] = r.equation;
  d["lhs"] = r.lhs;
  d["rhs"] = r.rhs;
  d["lhs_err"] = r.lhs_err;
  d["rhs_err"] = r.rhs_err;
  d["slack"] = r.slack();
  d["tolerance"] = r.tolerance;
  d["verdict"] = r.verdict_name();
  py::dict consts;
  for (const auto& [k, v] : r.constants) consts[py::str(k)] = v;
  d["constants"] = consts;
  d["warnings"] = r.warnings;
  return d;
}

}  // namespace

PYBIND11_MODULE(_carnot, m) {
  m.doc() = "Carnot-group hypersurface geometry: group law, homogeneous norms, "
            "h-perimeter quadrature, blow-ups and inequality checks";

  py::register_exception<Error>(m, "CarnotError");

  py::class_<StructureReport>(m, "StructureReport")
      .def_readonly("skew_ok", &StructureReport::skew_ok)
      .def_readonly("jacobi_ok", &StructureReport::jacobi_ok)
      .def_readonly("grading_ok", &StructureReport::grading_ok)
      .def_readonly("generation_ok", &StructureReport::generation_ok)
      .def_readonly("Q", &StructureReport::Q)
      .def_readonly("failures", &StructureReport::failures)
      .def("ok", &StructureReport::ok);

  py::class_<StratifiedAlgebra, std::shared_ptr<StratifiedAlgebra>>(m, "StratifiedAlgebra")
      .def_static("heisenberg", &StratifiedAlgebra::heisenberg, py::arg("n") = 1)
      .def_static("engel", &StratifiedAlgebra::engel)
      .def_static("from_file", &StratifiedAlgebra::from_file)
      .def_property_readonly("name", &StratifiedAlgebra::name)
      .def_property_readonly("dim", &StratifiedAlgebra::dim)
      .def_property_readonly("step", &StratifiedAlgebra::step)
      .def_property_readonly("Q", &StratifiedAlgebra::homogeneous_dimension)
      .def("verify", &StratifiedAlgebra::verify)
      .def("mul", &StratifiedAlgebra::mul)
      .def("inverse", &StratifiedAlgebra::inverse)
      .def("dilate", &StratifiedAlgebra::dilate)
      .def("frame", &StratifiedAlgebra::frame)
      .def("dilation_generator", &StratifiedAlgebra::dilation_generator)
      .def("bracket", [](const StratifiedAlgebra& a, const Vec& v, const Vec& w) {
        std::vector<double> vv(v.data(), v.data() + v.size());
        std::vector<double> ww(w.data(), w.data() + w.size());
        auto out = a.bracket_coeffs(vv, ww);
        return Vec(Eigen::Map<const Vec>(out.data(), static_cast<Eigen::Index>(out.size())));
      });

  py::class_<HomogeneousNorm, std::shared_ptr<HomogeneousNorm>>(m, "HomogeneousNorm")
      .def_static("korany",
                  [](std::shared_ptr<StratifiedAlgebra> a) {
                    return std::shared_ptr<HomogeneousNorm>(
                        new HomogeneousNorm(HomogeneousNorm::korany(*a)));
                  },
                  py::keep_alive<0, 1>())
      .def_static("power_lambda",
                  [](std::shared_ptr<StratifiedAlgebra> a, int lam) {
                    return std::shared_ptr<HomogeneousNorm>(
                        new HomogeneousNorm(HomogeneousNorm::power_lambda(*a, lam)));
                  },
                  py::keep_alive<0, 1>())
      .def("__call__", &HomogeneousNorm::eval)
      .def("distance", &HomogeneousNorm::distance)
      .def("gradient", &HomogeneousNorm::gradient)
      .def("layer_constants",
           [](const HomogeneousNorm& n, int samples) {
             auto lc = n.layer_constants(samples);
             return lc.c;
           },
           py::arg("samples") = 32768)
      .def("metric_factor_bounds", [](const HomogeneousNorm& n, int samples) {
        auto mf = n.metric_factor_bounds(samples);
        return py::make_tuple(mf.k1, mf.k2);
      }, py::arg("samples") = 32768);

  py::class_<GraphSurface>(m, "GraphSurface")
      .def_property_readonly("name", [](const GraphSurface& s) { return s.name; })
      .def_property_readonly("closed", [](const GraphSurface& s) { return s.closed; })
      .def_property_readonly("num_patches",
                             [](const GraphSurface& s) { return s.patches.size(); })
      .def("dilated", &GraphSurface::dilated);

  m.def("make_surface",
        [](std::shared_ptr<StratifiedAlgebra> alg, const std::string& preset, double radius) {
          return make_surface(*alg, preset, radius);
        },
        py::arg("algebra"), py::arg("preset"), py::arg("radius") = 1.0, py::keep_alive<0, 1>());

  py::class_<QuadratureSpec>(m, "QuadratureSpec")
      .def(py::init<int, int, double>(), py::arg("order") = 5, py::arg("depth") = 10,
           py::arg("rel_tol") = 1e-7)
      .def_readwrite("order", &QuadratureSpec::base_order)
      .def_readwrite("depth", &QuadratureSpec::max_depth)
      .def_readwrite("rel_tol", &QuadratureSpec::rel_tol);

  m.def("h_perimeter",
        [](const GraphSurface& S, const QuadratureSpec& spec,
           std::shared_ptr<HomogeneousNorm> norm, std::optional<Vec> center,
           std::optional<double> radius) {
          Region region = Region::all();
          if (norm && center && radius) region = Region::in_ball(*norm, *center, *radius);
          auto est = h_perimeter(S, region, spec);
          return py::make_tuple(est.value, est.error);
        },
        py::arg("surface"), py::arg("spec") = QuadratureSpec(),
        py::arg("norm") = nullptr, py::arg("center") = std::nullopt,
        py::arg("radius") = std::nullopt);

  m.def("horizontal_mean_curvature",
        [](const GraphSurface& S, int patch, const Vec& zeta) {
          return horizontal_mean_curvature(S.patches.at(patch), zeta);
        },
        py::arg("surface"), py::arg("patch"), py::arg("zeta"));

  m.def("blowup_density",
        [](const GraphSurface& S, int patch, const Vec& zeta,
           std::shared_ptr<HomogeneousNorm> norm, const QuadratureSpec& spec) {
          auto res = blowup_density(S, patch, zeta, *norm, spec);
          py::dict d;
          d["kind"] = res.kind_name();
          d["kappa"] = res.kappa;
          d["kappa_err"] = res.kappa_estimate.error;
          d["order"] = res.aniso_order;
          return d;
        },
        py::arg("surface"), py::arg("patch"), py::arg("zeta"), py::arg("norm"),
        py::arg("spec") = QuadratureSpec());

  m.def("blowup_scan",
        [](const GraphSurface& S, int patch, const Vec& zeta,
           std::shared_ptr<HomogeneousNorm> norm, const std::vector<double>& radii,
           const QuadratureSpec& spec) { return blowup_scan(S, patch, zeta, *norm, radii, spec); },
        py::arg("surface"), py::arg("patch"), py::arg("zeta"), py::arg("norm"), py::arg("radii"),
        py::arg("spec") = QuadratureSpec());

  py::class_<LabContext, std::shared_ptr<LabContext>>(m, "LabContext");
  m.def("make_context",
        [](std::shared_ptr<StratifiedAlgebra> alg, std::shared_ptr<HomogeneousNorm> norm,
           int samples) {
          return std::make_shared<LabContext>(LabContext::make(*alg, *norm, samples));
        },
        py::arg("algebra"), py::arg("norm"), py::arg("samples") = 16384, py::keep_alive<0, 1>(),
        py::keep_alive<0, 2>());

  m.def("isoperimetric_report",
        [](std::shared_ptr<LabContext> ctx, const GraphSurface& S, const QuadratureSpec& spec) {
          return report_dict(isoperimetric_report(*ctx, S, spec));
        },
        py::arg("ctx"), py::arg("surface"), py::arg("spec") = QuadratureSpec(4, 6, 1e-4));

  m.def("linear_isoperimetric_check",
        [](std::shared_ptr<LabContext> ctx, const GraphSurface& S, const QuadratureSpec& spec) {
          return report_dict(linear_isoperimetric_check(*ctx, S, spec));
        },
        py::arg("ctx"), py::arg("surface"), py::arg("spec") = QuadratureSpec(4, 7, 1e-5));

  m.def("monotonicity_scan",
        [](std::shared_ptr<LabContext> ctx, const GraphSurface& S, int patch, const Vec& zeta,
           const std::vector<double>& grid, const QuadratureSpec& spec) {
          auto res = monotonicity_scan(*ctx, S, patch, zeta, grid, spec);
          py::list strong;
          for (const auto& r : res.strong) strong.append(report_dict(r));
          py::list weak;
          for (const auto& r : res.weak) weak.append(report_dict(r));
          py::dict d;
          d["strong"] = strong;
          d["weak"] = weak;
          return d;
        },
        py::arg("ctx"), py::arg("surface"), py::arg("patch"), py::arg("zeta"), py::arg("t_grid"),
        py::arg("spec") = QuadratureSpec(5, 8, 1e-6));

  m.def("run_config_file",
        [](const std::string& path, const std::string& out_dir) {
          Runner runner = Runner::from_file(path);
          if (!out_dir.empty()) runner.set_output_dir(out_dir);
          return runner.run();
        },
        py::arg("path"), py::arg("out_dir") = "");

  m.def("set_worker_count", &set_worker_count);
}
