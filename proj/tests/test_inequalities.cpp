#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "carnot/inequalities.hpp"
#include "carnot/presets.hpp"
#include "doctest.h"

using namespace carnot;

namespace {

Vec pt(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

struct Fixture {
  StratifiedAlgebra h1 = StratifiedAlgebra::heisenberg(1);
  HomogeneousNorm kor = HomogeneousNorm::korany(h1);
  LabContext ctx = LabContext::make(h1, kor, 8192);
};

Fixture& fx() {
  static Fixture f;
  return f;
}

}  // namespace

TEST_CASE("dilation generator pairing holds along surfaces") {
  auto& f = fx();
  DilationGenerator Z(f.h1, pt({0.2, -0.1, 0.3}));
  std::mt19937 rng(101);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int it = 0; it < 200; ++it) {
    Vec y = pt({u(rng), u(rng), u(rng)});
    double r = f.kor.distance(Z.center, y);
    if (r < 0.2) continue;
    CHECK(Z.frame_field(y).dot(f.kor.distance_gradient(Z.center, y)) ==
          doctest::Approx(r).epsilon(1e-9));
  }
}

TEST_CASE("coarea identity on the vertical plane") {
  auto& f = fx();
  auto S = make_surface(f.h1, "h1-vertical-plane");
  QuadratureSpec spec(5, 8, 1e-8);

  auto rep = coarea_check(f.ctx, S, coordinate_scalar(1), spec);  // phi = x2
  CHECK(rep.lhs == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(std::abs(rep.rhs - 4.0) < 1e-4);
  CHECK(std::abs(rep.lhs - rep.rhs) < 1e-4);
  CHECK(rep.verdict == InequalityReport::Verdict::Holds);

  auto repc = coarea_check(f.ctx, S, constant_scalar(2.5), spec);
  CHECK(repc.lhs == doctest::Approx(0.0));
  CHECK(repc.rhs == doctest::Approx(0.0));

  auto rept = coarea_check(f.ctx, S, coordinate_scalar(2), spec);  // phi = t
  CHECK(std::abs(rept.lhs) < 1e-6);
  CHECK(std::abs(rept.rhs) < 1e-6);
}

TEST_CASE("coarea identity on random polynomials") {
  auto& f = fx();
  auto S = make_surface(f.h1, "h1-vertical-plane");
  QuadratureSpec spec(5, 8, 1e-8);
  std::mt19937 rng(103);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int it = 0; it < 10; ++it) {
    double a1 = u(rng), a2 = u(rng), a3 = u(rng), a4 = u(rng), a5 = u(rng);
    SurfaceScalar phi{"poly", [=](const Vec& y) {
                        return a1 * y[1] + a2 * y[2] + a3 * y[1] * y[1] + a4 * y[1] * y[2] +
                               a5 * y[2] * y[2] * y[1];
                      }};
    auto rep = coarea_check(f.ctx, S, phi, spec);
    double scale = std::max({std::abs(rep.lhs), std::abs(rep.rhs), 1e-6});
    CHECK(std::abs(rep.lhs - rep.rhs) / scale < 1e-3);
  }
}

TEST_CASE("divergence residual closes and halves under refinement") {
  auto& f = fx();
  auto S = make_surface(f.h1, "h1-vertical-plane");
  auto X = bump_frame_field(f.kor, 1, f.h1.identity(), 0.8);  // bump * X2
  Vec w = pt({0.0, 1.0, 0.0});

  QuadratureSpec coarse(4, 5, 1e-5);
  auto pair_coarse = variation_divergence_check(f.ctx, S, X, w, coarse);
  double res_coarse = std::abs(pair_coarse.divergence.lhs - pair_coarse.divergence.rhs);
  CHECK(res_coarse < 1e-3);

  auto pair_fine = variation_divergence_check(f.ctx, S, X, w, coarse.refined());
  double res_fine = std::abs(pair_fine.divergence.lhs - pair_fine.divergence.rhs);
  CHECK(res_fine <= std::max(res_coarse / 2.0, 5e-9));

  CHECK(std::abs(pair_coarse.first_variation.lhs - pair_coarse.first_variation.rhs) < 1e-3);

  // X = 0: every term vanishes.
  HorizontalField zero{"zero", [&](const SurfacePointData&) { return Vec(Vec::Zero(3)); }};
  auto pair_zero = variation_divergence_check(f.ctx, S, zero, pt({0, 0, 0}), coarse);
  CHECK(pair_zero.divergence.lhs == doctest::Approx(0.0));
  CHECK(pair_zero.divergence.rhs == doctest::Approx(0.0));
  CHECK(pair_zero.first_variation.lhs == doctest::Approx(0.0));
  CHECK(pair_zero.first_variation.rhs == doctest::Approx(0.0));
}

TEST_CASE("Minkowsky identity on the unit disk") {
  auto& f = fx();
  auto S = make_surface(f.h1, "h1-disk");
  QuadratureSpec spec(5, 9, 1e-7);
  auto rep = minkowsky_check(f.ctx, S, spec);
  // (h-1) sigma + int <C_H nu_H, x_HS> sigma = pi/3 + 2 pi/3 = pi;
  // boundary side integrates <x_H, eta_HS> over the rim, also pi.
  CHECK(rep.lhs == doctest::Approx(M_PI).epsilon(1e-4));
  CHECK(rep.rhs == doctest::Approx(M_PI).epsilon(1e-4));
  CHECK(std::abs(rep.lhs - rep.rhs) < 1e-3);
  CHECK(rep.verdict == InequalityReport::Verdict::Holds);
}

TEST_CASE("linear isoperimetric inequality") {
  auto& f = fx();
  QuadratureSpec spec(5, 9, 1e-7);

  auto disk = make_surface(f.h1, "h1-disk");
  auto rep = linear_isoperimetric_check(f.ctx, disk, spec);
  CHECK(rep.lhs == doctest::Approx(M_PI / 3.0).epsilon(1e-5));
  // H = 0 on the disk, so the curvature integral is int |C_H nu_H| sigma = pi.
  CHECK(rep.constants["curvature_integral"] == doctest::Approx(M_PI).epsilon(1e-4));
  CHECK(rep.constants["boundary_measure"] == doctest::Approx(M_PI).epsilon(1e-4));
  CHECK(rep.constants["R"] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(rep.verdict == InequalityReport::Verdict::Holds);
  CHECK(rep.slack() > 0.5);

  auto plane = make_surface(f.h1, "h1-vertical-plane");
  auto repp = linear_isoperimetric_check(f.ctx, plane, spec);
  CHECK(repp.verdict == InequalityReport::Verdict::Holds);

  // Verdicts are dilation invariant.
  for (double t : {0.5, 2.0}) {
    auto repd = linear_isoperimetric_check(f.ctx, disk.dilated(t), spec);
    CHECK(repd.verdict == InequalityReport::Verdict::Holds);
  }
}

TEST_CASE("monotonicity scans hold on the presets") {
  auto& f = fx();
  QuadratureSpec spec(5, 11, 1e-8);

  auto plane = make_surface(f.h1, "h1-vertical-plane");
  auto mono = monotonicity_scan(f.ctx, plane, 0, pt({0, 0}), {0.3, 0.45, 0.6, 0.75, 0.9}, spec);
  for (const auto& r : mono.strong) {
    CHECK(r.verdict != InequalityReport::Verdict::Violated);
    CHECK(std::abs(r.lhs) < 1e-6);  // planes are exactly scale invariant
  }
  for (const auto& r : mono.weak) CHECK(r.verdict != InequalityReport::Verdict::Violated);

  auto t0 = make_surface(f.h1, "h1-t0-plane");
  auto mono_c = monotonicity_scan(f.ctx, t0, 0, pt({0, 0}), {0.3, 0.45, 0.6, 0.75, 0.9}, spec);
  for (const auto& r : mono_c.strong) {
    CHECK(r.verdict != InequalityReport::Verdict::Violated);
    CHECK(std::abs(r.lhs) < 1e-6);
  }

  QuadratureSpec loose(5, 8, 1e-6);
  auto cyl = make_surface(f.h1, "h1-cylinder");
  auto mono_cyl =
      monotonicity_scan(f.ctx, cyl, 0, pt({0.0, 0.0}), {0.05, 0.1, 0.2, 0.3, 0.4}, loose);
  for (const auto& r : mono_cyl.strong) CHECK(r.verdict != InequalityReport::Verdict::Violated);

  auto para = make_surface(f.h1, "h1-paraboloid");
  auto mono_p =
      monotonicity_scan(f.ctx, para, 0, pt({0.3, 0.2}), {0.05, 0.1, 0.15, 0.2}, loose);
  for (const auto& r : mono_p.strong) CHECK(r.verdict != InequalityReport::Verdict::Violated);
}

TEST_CASE("monotonicity scope guard at characteristic points") {
  auto engel = StratifiedAlgebra::engel();
  auto rho = HomogeneousNorm::power_lambda(engel, 12);
  auto ctx = LabContext::make(engel, rho, 4096);
  auto S = surface_from_json_text(
      engel, R"({"alpha": 4, "domain": [[-1, -1, -1], [1, 1, 1]], "height": []})");
  QuadratureSpec spec(4, 5, 1e-4);
  // x4-graph with psi = 0: the origin is characteristic; Engel is outside the
  // characteristic-monotonicity scope.
  CHECK_THROWS_AS(monotonicity_scan(ctx, S, 0, pt({0, 0, 0}), {0.1, 0.2, 0.3}, spec),
                  PreconditionError);
}

TEST_CASE("global isoperimetric inequality with the pinned constant") {
  auto& f = fx();
  QuadratureSpec spec(5, 9, 1e-7);

  auto disk = make_surface(f.h1, "h1-disk");
  auto rep = isoperimetric_report(f.ctx, disk, spec);
  CHECK(rep.lhs == doctest::Approx(std::pow(M_PI / 3.0, 2.0 / 3.0)).epsilon(1e-4));
  CHECK(rep.constants["C_I"] ==
        doctest::Approx(64.0 / std::sqrt(f.ctx.mf.k1)).epsilon(1e-12));
  CHECK(rep.verdict == InequalityReport::Verdict::Holds);

  auto closed = make_surface(f.h1, "h1-capped-cylinder");
  auto repc = isoperimetric_report(f.ctx, closed, spec);
  CHECK(repc.constants["B_infty"] == doctest::Approx(0.0));
  CHECK(repc.verdict == InequalityReport::Verdict::Holds);

  for (double t : {0.5, 2.0}) {
    CHECK(isoperimetric_report(f.ctx, disk.dilated(t), spec).verdict ==
          InequalityReport::Verdict::Holds);
    CHECK(isoperimetric_report(f.ctx, closed.dilated(t), spec).verdict ==
          InequalityReport::Verdict::Holds);
  }
}

TEST_CASE("Poincare inequality for bump test functions") {
  auto& f = fx();
  QuadratureSpec spec(5, 8, 1e-7);
  auto plane = make_surface(f.h1, "h1-vertical-plane");

  for (double p : {1.0, 2.0}) {
    auto rep = poincare_check(f.ctx, plane, 0, pt({0, 0}), 0.5,
                              p, radial_bump(f.kor, f.h1.identity(), 0.4), spec);
    CHECK(rep.verdict == InequalityReport::Verdict::Holds);
    CHECK(rep.constants["C_p"] == doctest::Approx(2.0 * p));
  }

  auto zero = poincare_check(f.ctx, plane, 0, pt({0, 0}), 0.5, 1.0, constant_scalar(0.0), spec);
  CHECK(zero.lhs == doctest::Approx(0.0));
  CHECK(zero.rhs == doctest::Approx(0.0));
  CHECK(zero.verdict == InequalityReport::Verdict::Holds);

  // Cylinder patch at p = 2: R_U = 1/(2(max H + C max varpi)) = 1/2.
  auto cyl = make_surface(f.h1, "h1-cylinder");
  Vec x = cyl.patches[0].embed(pt({0, 0}));
  auto repc = poincare_check(f.ctx, cyl, 0, pt({0, 0}), 0.3, 2.0,
                             radial_bump(f.kor, x, 0.25), spec);
  CHECK(repc.verdict == InequalityReport::Verdict::Holds);
  CHECK(repc.constants["R_U"] == doctest::Approx(0.5).epsilon(1e-3));

  CHECK_THROWS_AS(poincare_check(f.ctx, cyl, 0, pt({0, 0}), 0.8, 2.0,
                                 radial_bump(f.kor, x, 0.25), spec),
                  PreconditionError);
}

TEST_CASE("Rayleigh quotients and the cutoff family") {
  auto& f = fx();
  QuadratureSpec spec(4, 7, 1e-6);
  auto plane = make_surface(f.h1, "h1-vertical-plane");

  // Split by {x2 = 0}: sigma^1(N) = 2, each half has sigma = 2.
  std::vector<SurfaceScalar> tests;
  tests.push_back(SurfaceScalar{"tent", [](const Vec& y) {
                                  return std::max(0.0, 1.0 - std::abs(y[1])) *
                                         std::max(0.0, 1.0 - std::abs(y[2]));
                                }});
  auto res = rayleigh_isop_estimate(f.ctx, plane, {{1, 0.0}}, tests, {0.2, 0.1, 0.05}, spec);
  CHECK(res.geometric == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(res.lambda1_lower == doctest::Approx(0.25).epsilon(1e-2));

  // Cutoff quotients decrease monotonically toward the geometric quotient.
  REQUIRE(res.cutoff.size() == 3);
  CHECK(res.cutoff[0].second > res.cutoff[1].second);
  CHECK(res.cutoff[1].second > res.cutoff[2].second);
  CHECK(res.cutoff[2].second > res.geometric - 1e-3);
  CHECK(res.cutoff[2].second - res.geometric < 0.05);
  // Against the closed-form family value 2/(2 - eps).
  CHECK(res.cutoff[0].second == doctest::Approx(2.0 / 1.8).epsilon(0.02));

  // Both estimates are upper bounds for the infimum; record the gap only.
  CHECK(std::isfinite(res.analytic));
  CHECK(res.analytic >= res.geometric - 0.05);

  // Constant test functions are inadmissible when the boundary is nonempty.
  std::vector<SurfaceScalar> bad = {constant_scalar(1.0)};
  CHECK_THROWS_AS(rayleigh_isop_estimate(f.ctx, plane, {{1, 0.0}}, bad, {}, spec),
                  AdmissibilityError);
}

TEST_CASE("asymptotic lower bound") {
  auto& f = fx();
  QuadratureSpec spec(5, 10, 1e-7);

  auto plane = make_surface(f.h1, "h1-vertical-plane");
  auto res = asymptotic_check(f.ctx, plane, 0, pt({0, 0}), {0.2, 0.35, 0.5}, spec);
  for (const auto& r : res.reports) {
    CHECK(r.verdict != InequalityReport::Verdict::Violated);
    // Minimal plane: sigma(S_t) = kappa t^3 exactly; the bound is an equality.
    CHECK(r.lhs == doctest::Approx(r.rhs).epsilon(1e-5));
  }

  auto cyl = make_surface(f.h1, "h1-cylinder");
  auto resc = asymptotic_check(f.ctx, cyl, 0, pt({0, 0}), {0.05, 0.1, 0.2, 0.3}, spec);
  CHECK(resc.h0 == doctest::Approx(1.0).epsilon(1e-4));
  for (const auto& r : resc.reports) CHECK(r.verdict != InequalityReport::Verdict::Violated);

  auto t0 = make_surface(f.h1, "h1-t0-plane");
  auto rest = asymptotic_check(f.ctx, t0, 0, pt({0, 0}), {0.2, 0.4, 0.6}, spec);
  CHECK(rest.kappa == doctest::Approx(M_PI / 3.0).epsilon(1e-4));
  for (const auto& r : rest.reports) {
    CHECK(r.verdict != InequalityReport::Verdict::Violated);
    CHECK(r.lhs == doctest::Approx(r.rhs).epsilon(1e-4));  // H0 = 0: equality again
  }
}

TEST_CASE("Sobolev inequality on the closed preset") {
  auto& f = fx();
  QuadratureSpec spec(4, 7, 1e-6);
  auto closed = make_surface(f.h1, "h1-capped-cylinder");
  auto psi = coordinate_bump(2, 0.3);  // supported on the cylinder side

  auto rep = sobolev_check(f.ctx, closed, psi, spec);
  CHECK(rep.verdict == InequalityReport::Verdict::Holds);
  CHECK(rep.constants["H0_supp"] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(rep.constants["chi_bound_2"] == doctest::Approx(2.0).epsilon(1e-3));

  // psi = 0 degenerates to 0 <= 0.
  auto zero = sobolev_check(f.ctx, closed, constant_scalar(0.0), spec);
  CHECK(zero.lhs == doctest::Approx(0.0));
  CHECK(zero.verdict == InequalityReport::Verdict::Holds);

  // Scaling invariance: both sides are 1-homogeneous in psi.
  SurfaceScalar five{"5psi", [psi](const Vec& y) { return 5.0 * psi.value(y); }};
  auto rep5 = sobolev_check(f.ctx, closed, five, spec);
  CHECK(rep5.rhs / rep5.lhs == doctest::Approx(rep.rhs / rep.lhs).epsilon(1e-9));
  CHECK((rep5.verdict == InequalityReport::Verdict::Holds));

  // Full layer-gradient form.
  auto full = sobolev_check(f.ctx, closed, psi, spec, true);
  CHECK(full.verdict == InequalityReport::Verdict::Holds);

  auto open_surface = make_surface(f.h1, "h1-disk");
  CHECK_THROWS_AS(sobolev_check(f.ctx, open_surface, psi, spec), PreconditionError);
}

TEST_CASE("curvature cross-check via the divergence route") {
  // Cor. IPPH with compactly supported X recovers the direct H_cc on a
  // smooth patch: int{div_HS X + <C_H nu_H, X>} sigma = -int H <X, nu_H> sigma.
  auto& f = fx();
  QuadratureSpec spec(5, 7, 1e-7);
  auto cyl = make_surface(f.h1, "h1-cylinder");
  Vec x0 = cyl.patches[0].embed(pt({0, 0}));
  SurfaceScalar bump = radial_bump(f.kor, x0, 0.35);
  // X = bump * nu_H -- horizontal, compactly supported in the patch interior.
  HorizontalField X{"bump*nuH", [bump](const SurfacePointData& d) {
                      return Vec(bump.value(d.point) * d.nu_h);
                    }};
  GraphSurface patch_only;
  patch_only.name = "cyl-patch0";
  patch_only.patches = {cyl.patches[0]};
  auto interior = surface_integral_raw(patch_only, Region::all(), spec,
                                       [&](const SurfacePointData& d) {
                                         auto cn = ch_nu(d, f.h1);
                                         return (div_hs_at(*d.patch, d, X.frame_value) +
                                                 cn.vec.dot(X.frame_value(d))) *
                                                d.area_weighted_density;
                                       });
  auto mass = surface_integral_raw(patch_only, Region::all(), spec,
                                   [&](const SurfacePointData& d) {
                                     return X.frame_value(d).dot(d.nu_h) *
                                            d.area_weighted_density;
                                   });
  // Under the cylinder-positive convention the identity reads
  // int{div_HS X + <C_H nu_H, X>} sigma = +int H <X, nu_H> sigma.
  double h_from_identity = interior.value / mass.value;
  double h_direct = horizontal_mean_curvature(cyl.patches[0], pt({0, 0}));
  CHECK(h_from_identity == doctest::Approx(h_direct).epsilon(1e-3));
}
