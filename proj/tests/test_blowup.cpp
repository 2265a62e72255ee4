#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "carnot/blowup.hpp"
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

double korany_slice_oracle() {
  const int N = 100000;
  double h = 1.0 / N;
  auto f = [](double u) { return std::sqrt(std::max(0.0, 1.0 - u * u * u * u)); };
  double s = f(0.0) + f(1.0);
  for (int i = 1; i < N; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("case (a): vertical plane density equals the 1D slice oracle") {
  auto h1 = StratifiedAlgebra::heisenberg(1);
  auto kor = HomogeneousNorm::korany(h1);
  auto S = make_surface(h1, "h1-vertical-plane");
  QuadratureSpec spec(6, 12, 1e-9);
  auto res = blowup_density(S, 0, pt({0, 0}), kor, spec);
  CHECK(res.kind == BlowupResult::Kind::CaseA);
  CHECK(std::abs(res.kappa - korany_slice_oracle()) < 1e-5);

  auto mf = kor.metric_factor_bounds();
  CHECK(res.kappa >= mf.k1);
  CHECK(res.kappa <= mf.k2);
}

TEST_CASE("case (b): characteristic origin of the t = 0 plane gives pi/3") {
  auto h1 = StratifiedAlgebra::heisenberg(1);
  auto kor = HomogeneousNorm::korany(h1);
  auto S = make_surface(h1, "h1-t0-plane");
  QuadratureSpec spec(6, 12, 1e-9);
  auto res = blowup_density(S, 0, pt({0, 0}), kor, spec);
  CHECK(res.kind == BlowupResult::Kind::CaseB);
  CHECK(res.aniso_order == 2);
  CHECK(std::abs(res.kappa - M_PI / 3.0) < 1e-5);
  // psi vanishes identically, so every recorded Taylor coefficient is 0.
  for (const auto& [beta, a] : res.taylor) CHECK(a == 0.0);
  REQUIRE(res.limit_surface.has_value());
  CHECK(res.limit_surface->patches[0].height.value(pt({0.3, -0.4})) == doctest::Approx(0.0));
}

TEST_CASE("case (b): paraboloid keeps its quadratic limit and matches the scan") {
  auto h1 = StratifiedAlgebra::heisenberg(1);
  auto kor = HomogeneousNorm::korany(h1);
  auto S = make_surface(h1, "h1-paraboloid");
  QuadratureSpec spec(6, 11, 1e-8);
  auto res = blowup_density(S, 0, pt({0, 0}), kor, spec);
  CHECK(res.kind == BlowupResult::Kind::CaseB);
  // psi-tilde = x1^2 + x2^2: pure quadratic Taylor data.
  REQUIRE(res.limit_surface.has_value());
  const Height& ht = res.limit_surface->patches[0].height;
  CHECK(ht.value(pt({0.5, 0.5})) == doctest::Approx(0.5));
  CHECK(ht.value(pt({1.0, 0.0})) == doctest::Approx(1.0));

  auto scan = blowup_scan(S, 0, pt({0, 0}), kor, {0.4, 0.2, 0.1, 0.05}, spec);
  // Ratios approach kappa with decreasing increments.
  double prev_gap = std::abs(scan[0].second - res.kappa);
  for (size_t k = 1; k < scan.size(); ++k) {
    double gap = std::abs(scan[k].second - res.kappa);
    CHECK(gap <= prev_gap * 1.05);
    prev_gap = gap;
  }
  CHECK(std::abs(scan.back().second - res.kappa) < 0.01 * res.kappa);
}

TEST_CASE("scan ratios are constant on scale-invariant planes") {
  auto h1 = StratifiedAlgebra::heisenberg(1);
  auto kor = HomogeneousNorm::korany(h1);
  QuadratureSpec spec(6, 12, 1e-9);

  auto vp = make_surface(h1, "h1-vertical-plane");
  auto scan_v = blowup_scan(vp, 0, pt({0, 0}), kor, {0.8, 0.6, 0.4, 0.2}, spec);
  for (const auto& [R, ratio] : scan_v) CHECK(std::abs(ratio - scan_v[0].second) < 1e-6);

  auto t0 = make_surface(h1, "h1-t0-plane");
  auto scan_t = blowup_scan(t0, 0, pt({0, 0}), kor, {0.8, 0.5, 0.3}, spec);
  for (const auto& [R, ratio] : scan_t) {
    CHECK(std::abs(ratio - M_PI / 3.0) < 1e-6);
  }
}

TEST_CASE("scan guards") {
  auto h1 = StratifiedAlgebra::heisenberg(1);
  auto kor = HomogeneousNorm::korany(h1);
  auto vp = make_surface(h1, "h1-vertical-plane");
  QuadratureSpec spec(5, 8, 1e-6);
  CHECK_THROWS_AS(blowup_scan(vp, 0, pt({0, 0}), kor, {5.0}, spec), DomainError);
  CHECK_THROWS_AS(blowup_scan(vp, 0, pt({1.0, 0.0}), kor, {0.1}, spec), DomainError);
  CHECK_THROWS_AS(blowup_density(vp, 0, pt({1.0, 0.0}), kor, spec), DomainError);
}

TEST_CASE("degenerate verdict and brute-force agreement of the condition checker") {
  auto engel = StratifiedAlgebra::engel();
  auto rho = HomogeneousNorm::power_lambda(engel, 12);
  QuadratureSpec spec(4, 6, 1e-4);

  // x4-graph psi = x1^2: characteristic at 0, but the second horizontal
  // derivative has weighted order 2 < ord(alpha) = 3.
  auto S = surface_from_json_text(
      engel, R"({"alpha": 4, "domain": [[-1, -1, -1], [1, 1, 1]], "height": [[[2, 0, 0], 1.0]]})");
  auto res = blowup_density(S, 0, pt({0, 0, 0}), rho, spec);
  CHECK(res.kind == BlowupResult::Kind::Degenerate);
  CHECK(res.kappa == 0.0);

  // Brute force: psi(delta_R zeta) / R^i diverges pointwise iff the checker
  // rejects; converges iff it accepts.
  auto dilation_limit_converges = [&](const GraphPatch& p, double& limit_at) {
    Vec z = pt({0.5, 0.4, 0.3});
    double prev = 0.0;
    bool first = true;
    for (double R : {1e-1, 1e-2, 1e-3, 1e-4}) {
      Vec zr(3);
      for (int j = 0; j < 3; ++j)
        zr[j] = std::pow(R, engel.ord(p.ambient_index(j))) * z[j];
      double v = p.height.value(zr) / std::pow(R, engel.ord(p.alpha));
      if (!first && std::abs(v - prev) > 1e-3 * std::max(1.0, std::abs(prev))) return false;
      if (!first && std::abs(v) > 1e6) return false;
      prev = v;
      first = false;
    }
    limit_at = prev;
    return true;
  };
  double lim = 0.0;
  CHECK_FALSE(dilation_limit_converges(S.patches[0], lim));

  // An admissible cubic: psi = x1^3 has weighted order 3 = ord(alpha).
  auto S3 = surface_from_json_text(
      engel, R"({"alpha": 4, "domain": [[-1, -1, -1], [1, 1, 1]], "height": [[[3, 0, 0], 1.0]]})");
  auto res3 = blowup_density(S3, 0, pt({0, 0, 0}), rho, spec);
  CHECK(res3.kind == BlowupResult::Kind::CaseB);
  CHECK(dilation_limit_converges(S3.patches[0], lim));
  CHECK(res3.limit_surface->patches[0].height.value(pt({0.5, 0.4, 0.3})) ==
        doctest::Approx(lim).epsilon(1e-6));
}

TEST_CASE("case (b) away from the group identity via the translated height") {
  auto h1 = StratifiedAlgebra::heisenberg(1);
  auto kor = HomogeneousNorm::korany(h1);
  QuadratureSpec spec(6, 11, 1e-8);

  // S = {t = x1 x2 / 2}: the frame pairing gives <X1,N> = -x2, <X2,N> = 0,
  // so the whole x1-axis is characteristic.
  auto S = surface_from_json_text(
      h1, R"({"alpha": 3, "domain": [[-1, -1], [1, 1]], "height": [[[1, 1], 0.5]]})");
  Vec z0 = pt({0.5, 0.0});
  auto d = surface_frame(S.patches[0], z0);
  REQUIRE(d.characteristic);
  auto res = blowup_density(S, 0, z0, kor, spec);
  CHECK(res.kind == BlowupResult::Kind::CaseB);
  // Cross-check the analytic density against the empirical scan.
  auto scan = blowup_scan(S, 0, z0, kor, {0.2, 0.1, 0.05}, spec);
  CHECK(std::abs(scan.back().second - res.kappa) < 0.02 * res.kappa);
}
