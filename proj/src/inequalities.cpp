#include "carnot/inequalities.hpp"

#include <algorithm>
#include <cmath>

namespace carnot {

namespace {

constexpr double kExcise = 1e-6;  // |P_H nu| below this is treated as characteristic

double sq(double x) { return x * x; }

// Curvature with stencil-failure treated as excision (stencils can cross the
// characteristic locus even when the center point is clear of it).
bool curvature_or_excise(const SurfacePointData& d, double& H) {
  if (d.p_h_nu < kExcise) return false;
  try {
    H = horizontal_mean_curvature(*d.patch, d.zeta);
    return true;
  } catch (const SingularityError&) {
    return false;
  }
}

// Extension of an ambient scalar, constant along the graph direction.
double extended_value(const GraphPatch& p, const std::function<double(const Vec&)>& fn,
                      const Vec& ambient) {
  return fn(p.embed(p.params_of(ambient)));
}

// Orthonormal basis of HS at a point: horizontal vectors orthogonal to nu_H.
std::vector<Vec> hs_basis(const StratifiedAlgebra& alg, const SurfacePointData& d) {
  const int h = alg.h();
  const int n = alg.dim();
  std::vector<Vec> basis;
  Vec u = d.nu_h.head(h);
  Mat Q = Mat::Identity(h, h);
  Vec e0 = Vec::Zero(h);
  e0[0] = 1.0;
  Vec w = u - e0;
  if (w.norm() > 1e-14) {
    w.normalize();
    Q -= 2.0 * w * w.transpose();
  }
  for (int j = 1; j < h; ++j) {
    Vec v = Vec::Zero(n);
    v.head(h) = Q.col(j);
    basis.push_back(v);
  }
  return basis;
}

double layer_block_norm(const StratifiedAlgebra& alg, const Vec& v, int layer) {
  double s = 0.0;
  for (int I = alg.layer_begin(layer); I < alg.layer_end(layer); ++I) s += v[I] * v[I];
  return std::sqrt(s);
}

// |C_H nu_H| sigma-density in the bounded product form |sum_a c_a C^a nu_H|.
double ch_density(const StratifiedAlgebra& alg, const SurfacePointData& d) {
  if (alg.step() < 2 || d.p_h_nu < 1e-13) return 0.0;
  const int h = alg.h();
  Vec acc = Vec::Zero(h);
  for (int a = alg.layer_begin(2); a < alg.layer_end(2); ++a) {
    for (int i = 0; i < h; ++i) {
      double s = 0.0;
      for (int j = 0; j < h; ++j) s += alg.C(a, i, j) * d.nu_h[j];
      acc[i] += d.c[a] * s;
    }
  }
  return acc.norm();
}

// Deterministic grid sampling of surface data within an optional ball.
void sample_surface(const GraphSurface& S, const Region& region, int per_axis,
                    const std::function<void(const SurfacePointData&)>& visit) {
  for (const auto& p : S.patches) {
    for (const auto& box : p.domain) {
      const int d = box.dim();
      std::vector<int> idx(d, 0);
      while (true) {
        Vec z(d);
        for (int j = 0; j < d; ++j)
          z[j] = box.lo[j] + (box.hi[j] - box.lo[j]) * (idx[j] + 0.5) / per_axis;
        bool ok = !p.param_clip || p.param_clip(z) <= 0.0;
        if (ok && region.param_box && !region.param_box->contains(z)) ok = false;
        if (ok) {
          SurfacePointData data = surface_frame_unchecked(p, z);
          if (region.ball &&
              region.ball->norm->distance(region.ball->center, data.point) > region.ball->radius)
            ok = false;
          if (ok) visit(data);
        }
        int j = 0;
        for (; j < d; ++j) {
          if (++idx[j] < per_axis) break;
          idx[j] = 0;
        }
        if (j == d) break;
      }
    }
  }
}

struct SurfaceStats {
  double max_h = 0.0;       // max |H_cc| away from characteristic points
  double max_varpi = 0.0;   // max |varpi|
  std::vector<double> max_varpi_layer;  // per layer >= 2
  double max_rho = 0.0;     // max rho(y) from the identity
  bool characteristic = false;
  int count = 0;
};

SurfaceStats surface_stats(const LabContext& ctx, const GraphSurface& S, const Region& region,
                           int per_axis) {
  SurfaceStats st;
  st.max_varpi_layer.assign(std::max(0, ctx.alg->step() - 1), 0.0);
  sample_surface(S, region, per_axis, [&](const SurfacePointData& d) {
    ++st.count;
    st.max_rho = std::max(st.max_rho, ctx.norm->eval(d.point));
    if (d.p_h_nu < kExcise) {
      st.characteristic = true;
      return;
    }
    st.max_varpi = std::max(st.max_varpi, d.varpi.norm());
    for (int layer = 2; layer <= ctx.alg->step(); ++layer)
      st.max_varpi_layer[layer - 2] =
          std::max(st.max_varpi_layer[layer - 2], layer_block_norm(*ctx.alg, d.varpi, layer));
    double H = 0.0;
    if (curvature_or_excise(d, H))
      st.max_h = std::max(st.max_h, std::abs(H));
    else
      st.characteristic = true;
  });
  return st;
}

double surface_diameter(const LabContext& ctx, const GraphSurface& S, int per_axis = 12) {
  std::vector<Vec> pts;
  sample_surface(S, Region::all(), per_axis,
                 [&](const SurfacePointData& d) { pts.push_back(d.point); });
  double diam = 0.0;
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j)
      diam = std::max(diam, ctx.norm->distance(pts[i], pts[j]));
  return diam;
}

// A_infty-type interior integrand against d zeta: |H| (|c_H| + sum_i i c_i
// rho_w^{i-1} |c_{(i)}|), with rho_w the weight distance (from a point or the
// constant rho_S) and characteristic excision.
double a_infty_density(const LabContext& ctx, const SurfacePointData& d,
                       const std::function<double(const Vec&)>& rho_weight, bool* excised) {
  double Hval = 0.0;
  if (!curvature_or_excise(d, Hval)) {
    if (excised) *excised = true;
    return 0.0;
  }
  double H = std::abs(Hval);
  double w = d.area_weighted_density;
  double r = rho_weight(d.point);
  for (int layer = 2; layer <= ctx.alg->step(); ++layer)
    w += layer * ctx.lc.for_layer(layer) * std::pow(r, layer - 1) *
         layer_block_norm(*ctx.alg, d.c, layer);
  return H * w;
}

// B_infty-type boundary integrand against d u (bounded product form).
double b_infty_density(const LabContext& ctx, const BoundaryPointData& b,
                       const std::function<double(const Vec&)>& rho_weight) {
  double w = b.p_hs_eta;
  double r = rho_weight(b.surf.point);
  for (int layer = 2; layer <= ctx.alg->step(); ++layer)
    w += layer * ctx.lc.for_layer(layer) * std::pow(r, layer - 1) *
         b.chi_layers.at(static_cast<size_t>(layer) - 2).norm();
  return b.surf.p_h_nu * w * b.riem_area;
}

QuadratureSpec coarse_inner(const QuadratureSpec& spec) {
  return QuadratureSpec(std::min(spec.base_order, 4), std::min(spec.max_depth, 7),
                        std::max(spec.rel_tol, 1e-5));
}

void stamp(InequalityReport& r, const LabContext& ctx, const GraphSurface& S) {
  r.group = ctx.alg->name();
  r.norm = ctx.norm->description();
  r.surface = S.name;
}

}  // namespace

// ---- test fields ------------------------------------------------------------

SurfaceScalar coordinate_scalar(int ambient_index) {
  return {"coordinate#" + std::to_string(ambient_index + 1),
          [ambient_index](const Vec& y) { return y[ambient_index]; }};
}

SurfaceScalar constant_scalar(double c) {
  return {"constant", [c](const Vec&) { return c; }};
}

SurfaceScalar radial_bump(const HomogeneousNorm& rho, Vec center, double radius) {
  const HomogeneousNorm* n = &rho;
  Vec c = std::move(center);
  return {"radial-bump", [n, c, radius](const Vec& y) {
            double d = n->distance(c, y) / radius;
            return sq(std::max(0.0, 1.0 - d * d));
          }};
}

SurfaceScalar coordinate_bump(int ambient_index, double halfwidth) {
  return {"coordinate-bump#" + std::to_string(ambient_index + 1),
          [ambient_index, halfwidth](const Vec& y) {
            double u = y[ambient_index] / halfwidth;
            return sq(std::max(0.0, 1.0 - u * u));
          }};
}

HorizontalField horizontal_position_field(const StratifiedAlgebra& alg) {
  const int h = alg.h();
  const int n = alg.dim();
  return {"x_H", [h, n](const SurfacePointData& d) {
            Vec v = Vec::Zero(n);
            v.head(h) = d.point.head(h);
            return v;
          }};
}

HorizontalField bump_frame_field(const HomogeneousNorm& rho, int dir, Vec center, double radius) {
  SurfaceScalar bump = radial_bump(rho, std::move(center), radius);
  const int n = rho.algebra().dim();
  auto val = bump.value;
  return {"bump*X" + std::to_string(dir + 1), [val, dir, n](const SurfacePointData& d) {
            Vec v = Vec::Zero(n);
            v[dir] = val(d.point);
            return v;
          }};
}

// ---- derivative helpers -------------------------------------------------------

Vec grad_hs_at(const GraphPatch& p, const SurfacePointData& d,
               const std::function<double(const Vec&)>& fn) {
  const StratifiedAlgebra& alg = *p.alg;
  const int n = alg.dim();
  const double step = 1e-5 * std::max(1.0, d.point.norm());
  Vec g = Vec::Zero(n);
  for (int i = 0; i < alg.h(); ++i) {
    Vec dir = d.A.col(i);
    g[i] = (extended_value(p, fn, d.point + step * dir) -
            extended_value(p, fn, d.point - step * dir)) /
           (2.0 * step);
  }
  if (!d.characteristic) g -= g.dot(d.nu_h) * d.nu_h;
  return g;
}

double div_hs_at(const GraphPatch& p, const SurfacePointData& d,
                 const std::function<Vec(const SurfacePointData&)>& X) {
  const StratifiedAlgebra& alg = *p.alg;
  const double step = 1e-5 * std::max(1.0, d.point.norm());
  double div = 0.0;
  for (const Vec& e : hs_basis(alg, d)) {
    Vec dir = d.A * e;
    Vec fp = X(surface_frame_unchecked(p, p.params_of(d.point + step * dir)));
    Vec fm = X(surface_frame_unchecked(p, p.params_of(d.point - step * dir)));
    div += ((fp - fm) / (2.0 * step)).dot(e);
  }
  return div;
}

// ---- coarea -------------------------------------------------------------------

InequalityReport coarea_check(const LabContext& ctx, const GraphSurface& S,
                              const SurfaceScalar& phi, const QuadratureSpec& spec, int grid) {
  if (ctx.alg->dim() != 3)
    throw CapabilityError("coarea level extraction is implemented for 3-dimensional groups");
  InequalityReport rep;
  rep.check = "coarea";
  rep.equation = "HS-gradient coarea identity";
  stamp(rep, ctx, S);

  auto lhs_est = surface_integral_raw(S, Region::all(), spec, [&](const SurfacePointData& d) {
    return grad_hs_at(*d.patch, d, phi.value).norm() * d.area_weighted_density;
  });
  rep.lhs = lhs_est.value;
  rep.lhs_err = lhs_est.error;

  // Range of phi over the closed patches (inclusive node grid, so extremes
  // attained on edges and corners are sampled exactly).
  double smin = std::numeric_limits<double>::infinity(), smax = -smin;
  for (const auto& p : S.patches) {
    const int pg = 128;
    for (const auto& box : p.domain)
      for (int i = 0; i <= pg; ++i)
        for (int j = 0; j <= pg; ++j) {
          Vec z(2);
          z << box.lo[0] + (box.hi[0] - box.lo[0]) * i / pg,
              box.lo[1] + (box.hi[1] - box.lo[1]) * j / pg;
          if (p.param_clip && p.param_clip(z) > 0.0) continue;
          double v = phi.value(p.embed(z));
          smin = std::min(smin, v);
          smax = std::max(smax, v);
        }
  }
  if (!(smax > smin)) {
    // Constant phi: both sides vanish.
    rep.rhs = 0.0;
    rep.lhs = std::abs(rep.lhs) < 1e-12 ? 0.0 : rep.lhs;
    rep.tolerance = 1e-9;
    rep.judge_identity();
    return rep;
  }

  auto level_total = [&](double s, int g) {
    double sum = 0.0;
    for (const auto& p : S.patches) sum += level_measure(p, phi.value, s, g);
    return sum;
  };
  Box srange;
  srange.lo = Vec::Constant(1, smin);
  srange.hi = Vec::Constant(1, smax);
  QuadratureSpec sspec(6, 6, std::max(spec.rel_tol, 1e-6));
  auto rhs_est = integrate_adaptive([&](const Vec& s) { return level_total(s[0], grid); },
                                    {srange}, sspec);
  rep.rhs = rhs_est.value;
  rep.rhs_err = rhs_est.error;
  // Grid sensitivity at the midlevel as an extraction error estimate.
  double mid = 0.5 * (smin + smax);
  double sens = std::abs(level_total(mid, grid) - level_total(mid, grid / 2));
  rep.rhs_err += sens * (smax - smin);
  rep.tolerance = 1e-3 * std::max({std::abs(rep.lhs), std::abs(rep.rhs), 1e-3});
  rep.judge_identity();
  return rep;
}

// ---- divergence / first variation ----------------------------------------------

VariationPair variation_divergence_check(const LabContext& ctx, const GraphSurface& S,
                                         const HorizontalField& X, const Vec& w_frame,
                                         const QuadratureSpec& spec) {
  const StratifiedAlgebra& alg = *ctx.alg;
  VariationPair out;
  bool excised = false;

  // (1) horizontal integration by parts: int {div_HS X + <C_H nu_H, X>} sigma
  //     + int <X, H nu_H> sigma = boundary term.
  auto interior = surface_integral_raw(S, Region::all(), spec, [&](const SurfacePointData& d) {
    double H = 0.0;
    if (!curvature_or_excise(d, H)) {
      excised = true;
      return 0.0;
    }
    auto cn = ch_nu(d, alg);
    double v = div_hs_at(*d.patch, d, X.frame_value) + cn.vec.dot(X.frame_value(d));
    // Under the cylinder-positive sign convention (H = div_H nu_H), the
    // curvature term of the integration-by-parts identity enters with a
    // minus sign.
    v -= H * X.frame_value(d).dot(d.nu_h);
    return v * d.area_weighted_density;
  });
  auto bdry = boundary_integral_raw(S, S.boundary, Region::all(), spec,
                                    [&](const BoundaryPointData& b) {
                                      return X.frame_value(b.surf).dot(b.eta_hs) *
                                             b.surf.p_h_nu * b.riem_area;
                                    },
                                    false);
  out.divergence.check = "variation_divergence";
  out.divergence.equation = "horizontal integration by parts";
  stamp(out.divergence, ctx, S);
  out.divergence.lhs = interior.value;
  out.divergence.lhs_err = interior.error;
  out.divergence.rhs = bdry.value;
  out.divergence.rhs_err = bdry.error;
  out.divergence.tolerance =
      1e-3 * std::max({std::abs(out.divergence.lhs), std::abs(out.divergence.rhs), 1e-2});
  if (excised) out.divergence.warnings.push_back("characteristic cells excised");
  out.divergence.judge_identity();

  // (2) first variation under the flow y -> y * exp(eps W).
  const double eps = 1e-3;
  auto flowed_area = [&](double e) {
    MeasureEstimate total;
    for (const auto& p : S.patches)
      total += h_perimeter_param(right_flowed(p, w_frame, e), Region::all(), spec);
    return total;
  };
  auto plus = flowed_area(eps), minus = flowed_area(-eps);
  double derivative = (plus.value - minus.value) / (2.0 * eps);

  auto interior_fv = surface_integral_raw(S, Region::all(), spec, [&](const SurfacePointData& d) {
    double H = 0.0;
    if (!curvature_or_excise(d, H)) return 0.0;
    // <W, nu/|P_H nu|> sigma-density = (w . nu) |c|; the interior term is
    // +H under the cylinder-positive convention.
    return H * w_frame.dot(d.nu) * d.riem_weighted_density;
  });
  auto bdry_fv = boundary_integral_raw(S, S.boundary, Region::all(), spec,
                                       [&](const BoundaryPointData& b) {
                                         return w_frame.dot(b.eta) * b.surf.p_h_nu * b.riem_area;
                                       },
                                       false);
  out.first_variation.check = "variation_divergence";
  out.first_variation.equation = "1st variation of the h-perimeter";
  stamp(out.first_variation, ctx, S);
  out.first_variation.lhs = derivative;
  out.first_variation.lhs_err = (plus.error + minus.error) / (2.0 * eps) +
                                eps * eps * std::max(1.0, std::abs(derivative));
  out.first_variation.rhs = interior_fv.value + bdry_fv.value;
  out.first_variation.rhs_err = interior_fv.error + bdry_fv.error;
  out.first_variation.tolerance =
      1e-3 * std::max({std::abs(out.first_variation.lhs), std::abs(out.first_variation.rhs), 1e-2});
  out.first_variation.judge_identity();
  return out;
}

InequalityReport minkowsky_check(const LabContext& ctx, const GraphSurface& S,
                                 const QuadratureSpec& spec) {
  const StratifiedAlgebra& alg = *ctx.alg;
  const int h = alg.h();
  InequalityReport rep;
  rep.check = "minkowsky";
  rep.equation = "integral Minkowsky-type identity";
  stamp(rep, ctx, S);
  bool excised = false;

  auto interior = surface_integral_raw(S, Region::all(), spec, [&](const SurfacePointData& d) {
    double base = (h - 1) * d.area_weighted_density;
    double H = 0.0;
    if (!curvature_or_excise(d, H)) {
      excised = true;
      return base;
    }
    double g_cc = d.point.head(h).dot(d.nu_h.head(h));
    auto cn = ch_nu(d, alg);
    Vec x_hs = Vec::Zero(alg.dim());
    x_hs.head(h) = d.point.head(h);
    x_hs -= g_cc * d.nu_h;
    // -H g_cc: the support-function term under the cylinder-positive sign.
    return base + (-g_cc * H + cn.vec.dot(x_hs)) * d.area_weighted_density;
  });
  auto bdry = boundary_integral_raw(S, S.boundary, Region::all(), spec,
                                    [&](const BoundaryPointData& b) {
                                      double xe = b.surf.point.head(h).dot(b.eta_hs.head(h));
                                      return xe * b.surf.p_h_nu * b.riem_area;
                                    },
                                    false);
  rep.lhs = interior.value;
  rep.lhs_err = interior.error;
  rep.rhs = bdry.value;
  rep.rhs_err = bdry.error;
  rep.tolerance = 1e-3 * std::max({std::abs(rep.lhs), std::abs(rep.rhs), 1e-2});
  if (excised) rep.warnings.push_back("characteristic cells excised");
  rep.judge_identity();
  return rep;
}

// ---- linear isoperimetric -------------------------------------------------------

InequalityReport linear_isoperimetric_check(const LabContext& ctx, const GraphSurface& S,
                                            const QuadratureSpec& spec) {
  const StratifiedAlgebra& alg = *ctx.alg;
  InequalityReport rep;
  rep.check = "linear_isoperimetric";
  rep.equation = S.boundary.empty() ? "closed linear isoperimetric inequality"
                                    : "linear isoperimetric inequality";
  stamp(rep, ctx, S);

  SurfaceStats st = surface_stats(ctx, S, Region::all(), 48);
  double R = st.max_rho;
  // The circumscribed radius is often attained on the boundary.
  for (const auto& piece : S.boundary)
    for (int k = 0; k <= 64; ++k) {
      Vec u = piece.pbox.lo + (piece.pbox.hi - piece.pbox.lo) * (static_cast<double>(k) / 64.0);
      R = std::max(R, ctx.norm->eval(S.patches.at(piece.patch_index).embed(piece.map(u))));
    }
  bool excised = false;
  auto curv = surface_integral_raw(S, Region::all(), spec, [&](const SurfacePointData& d) {
    double ch = ch_density(alg, d);
    double H = 0.0;
    if (!curvature_or_excise(d, H)) {
      excised = true;
      return ch;
    }
    return std::abs(H) * d.area_weighted_density + ch;
  });
  auto area = h_perimeter(S, Region::all(), spec);
  auto bdry = boundary_measure(S, S.boundary, Region::all(), spec);

  rep.lhs = (alg.h() - 1) * area.value;
  rep.lhs_err = (alg.h() - 1) * area.error;
  rep.rhs = R * (curv.value + bdry.value);
  rep.rhs_err = R * (curv.error + bdry.error);
  rep.constants["R"] = R;
  rep.constants["curvature_integral"] = curv.value;
  rep.constants["boundary_measure"] = bdry.value;
  if (excised) rep.warnings.push_back("characteristic cells excised from the curvature term");
  rep.judge_bound();
  return rep;
}

// ---- monotonicity ----------------------------------------------------------------

MonotonicityResult monotonicity_scan(const LabContext& ctx, const GraphSurface& S, int patch,
                                     const Vec& zeta, const std::vector<double>& t_grid,
                                     const QuadratureSpec& spec) {
  const StratifiedAlgebra& alg = *ctx.alg;
  const GraphPatch& p = S.patches.at(patch);
  Vec x = p.embed(zeta);
  SurfacePointData dx = surface_frame_unchecked(p, zeta);
  if (dx.characteristic) {
    bool heisenberg_type = alg.step() == 2 && alg.layer_dim(2) == 1;
    if (!(heisenberg_type && ctx.norm->kind() == NormKind::Korany))
      throw PreconditionError(
          "monotonicity at a characteristic point is available on the Heisenberg group with "
          "the Korany norm only");
  }

  MonotonicityResult out;
  double reach = distance_to_boundary(S, *ctx.norm, x);
  std::vector<double> grid;
  for (double t : t_grid) {
    if (t < reach - 1e-12)
      grid.push_back(t);
    else
      out.warnings.push_back("t = " + std::to_string(t) + " trimmed (exceeds patch reach)");
  }
  std::sort(grid.begin(), grid.end());
  if (grid.size() < 3) throw PreconditionError("monotonicity scan needs at least 3 usable radii");

  const int Q = alg.homogeneous_dimension();
  const int h = alg.h();
  auto rho_x = [&](const Vec& y) { return ctx.norm->distance(x, y); };

  struct Row {
    double t, m, m_err, a, b, aw, bw;
  };
  std::vector<Row> rows;
  QuadratureSpec aux = coarse_inner(spec);
  for (double t : grid) {
    Region ball = Region::in_ball(*ctx.norm, x, t);
    auto sigma = h_perimeter(S, ball, spec);
    auto a_est = surface_integral_raw(S, ball, aux, [&](const SurfacePointData& d) {
      return a_infty_density(ctx, d, rho_x, nullptr);
    });
    auto b_est = boundary_integral_raw(
        S, S.boundary, ball, aux,
        [&](const BoundaryPointData& b) { return b_infty_density(ctx, b, rho_x); }, true);
    auto aw_est = surface_integral_raw(S, ball, aux, [&](const SurfacePointData& d) {
      double ch = ch_density(alg, d);
      double H = 0.0;
      if (!curvature_or_excise(d, H)) return ch;
      return std::abs(H) * d.area_weighted_density + ch;
    });
    auto bw_est = boundary_measure(S, S.boundary, ball, aux);
    rows.push_back({t, sigma.value, sigma.error, a_est.value, b_est.value, aw_est.value,
                    bw_est.value});
  }

  out.table.name = "monotonicity";
  out.table.columns = {"t", "m", "minus_dm", "rhs", "verdict"};
  for (size_t i = 1; i + 1 < rows.size(); ++i) {
    const Row& r0 = rows[i - 1];
    const Row& r1 = rows[i];
    const Row& r2 = rows[i + 1];
    auto make_report = [&](int expo, double a_val, double b_val, const char* eq) {
      double m0 = r0.m / std::pow(r0.t, expo);
      double m1 = r1.m / std::pow(r1.t, expo);
      double m2 = r2.m / std::pow(r2.t, expo);
      double hp = r2.t - r1.t, hm = r1.t - r0.t;
      double dm = (hm * hm * m2 - hp * hp * m0 - (hm * hm - hp * hp) * m1) /
                  (hp * hm * (hp + hm));
      InequalityReport rep;
      rep.check = "monotonicity";
      rep.equation = eq;
      stamp(rep, ctx, S);
      rep.lhs = -dm;
      rep.rhs = (a_val + b_val) / std::pow(r1.t, expo);
      // Per-point tolerance: |m| (2 rel_tol + grid second-order term) plus
      // the quadrature noise amplified by the differencing.
      double grid2 = sq((hp + hm) / (2.0 * r1.t));
      rep.tolerance = std::abs(m1) * (2.0 * spec.rel_tol + grid2);
      rep.lhs_err = (r0.m_err / std::pow(r0.t, expo) + r2.m_err / std::pow(r2.t, expo)) /
                    (hp + hm);
      rep.constants["t"] = r1.t;
      rep.constants["m"] = m1;
      rep.judge_bound();
      return rep;
    };
    out.strong.push_back(make_report(Q - 1, r1.a, r1.b, "strong monotonicity (Q-1)"));
    out.weak.push_back(make_report(h - 1, r1.aw, r1.bw, "weak monotonicity (h-1)"));
    const auto& srep = out.strong.back();
    double code = srep.verdict == InequalityReport::Verdict::Holds
                      ? 1.0
                      : (srep.verdict == InequalityReport::Verdict::Violated ? -1.0 : 0.0);
    out.table.rows.push_back({r1.t, r1.m / std::pow(r1.t, Q - 1), srep.lhs, srep.rhs, code});
  }
  return out;
}

// ---- isoperimetric -----------------------------------------------------------------

InequalityReport isoperimetric_report(const LabContext& ctx, const GraphSurface& S,
                                      const QuadratureSpec& spec) {
  const StratifiedAlgebra& alg = *ctx.alg;
  const int Q = alg.homogeneous_dimension();
  InequalityReport rep;
  rep.check = "isoperimetric";
  rep.equation = "global isoperimetric inequality";
  stamp(rep, ctx, S);

  if (S.patches.empty()) {
    rep.lhs = rep.rhs = 0.0;
    rep.judge_bound();
    return rep;
  }

  double rho_s = 0.5 * surface_diameter(ctx, S);
  auto rho_weight = [rho_s](const Vec&) { return rho_s; };
  bool excised = false;
  auto sigma = h_perimeter(S, Region::all(), spec);
  auto a_est = surface_integral_raw(S, Region::all(), spec, [&](const SurfacePointData& d) {
    return a_infty_density(ctx, d, rho_weight, &excised);
  });
  MeasureEstimate b_est;
  double char_boundary_fraction = 0.0;
  if (!S.boundary.empty()) {
    b_est = boundary_integral_raw(
        S, S.boundary, Region::all(), spec,
        [&](const BoundaryPointData& b) { return b_infty_density(ctx, b, rho_weight); }, true);
    // Fraction of boundary samples where the horizontal tangential normal
    // degenerates (chi undefined pointwise; the product form stays finite).
    int total = 0, degenerate = 0;
    for (const auto& piece : S.boundary) {
      for (int k = 0; k < 16; ++k) {
        Vec u = piece.pbox.lo + (piece.pbox.hi - piece.pbox.lo) * ((k + 0.5) / 16.0);
        auto b = boundary_frame(S, piece, u, false);
        ++total;
        if (b.p_hs_eta < kExcise) ++degenerate;
      }
    }
    if (total > 0) char_boundary_fraction = static_cast<double>(degenerate) / total;
  }

  double k1 = ctx.mf.k1;
  double ci = std::pow(2.0, static_cast<double>(Q) * (Q - 1) / (Q - 2)) *
              std::pow(k1, 1.0 / (2.0 - Q));
  double exponent = static_cast<double>(Q - 2) / (Q - 1);
  rep.lhs = std::pow(std::max(sigma.value, 0.0), exponent);
  rep.lhs_err = sigma.value > 0 ? exponent * std::pow(sigma.value, exponent - 1.0) * sigma.error
                                : 0.0;
  rep.rhs = std::pow(ci, exponent) * (a_est.value + b_est.value);
  rep.rhs_err = std::pow(ci, exponent) * (a_est.error + b_est.error);
  rep.constants["C_I"] = ci;
  rep.constants["k1"] = k1;
  rep.constants["k2"] = ctx.mf.k2;
  rep.constants["rho_S"] = rho_s;
  rep.constants["sigma"] = sigma.value;
  rep.constants["A_infty"] = a_est.value;
  rep.constants["B_infty"] = b_est.value;
  for (int layer = 2; layer <= alg.step(); ++layer)
    rep.constants["c_" + std::to_string(layer)] = ctx.lc.for_layer(layer);
  if (excised) rep.warnings.push_back("characteristic cells excised from A_infty");
  if (char_boundary_fraction > 0.0)
    rep.warnings.push_back(
        "characteristic boundary portion (fraction " +
        std::to_string(char_boundary_fraction) +
        "); B_infty evaluated in the bounded product form of the dim C < n-2 route");
  rep.judge_bound();
  return rep;
}

// ---- Poincare -----------------------------------------------------------------------

InequalityReport poincare_check(const LabContext& ctx, const GraphSurface& S, int patch,
                                const Vec& zeta, double R, double p_exp,
                                const SurfaceScalar& psi, const QuadratureSpec& spec) {
  const StratifiedAlgebra& alg = *ctx.alg;
  const GraphPatch& gp = S.patches.at(patch);
  Vec x = gp.embed(zeta);
  double dist = distance_to_boundary(S, *ctx.norm, x);

  Region ball = Region::in_ball(*ctx.norm, x, R);
  SurfaceStats st = surface_stats(ctx, S, Region::in_ball(*ctx.norm, x, 1.02 * R), 40);
  double C = ch_bound_constant(alg);
  double denom = st.characteristic ? C * (1.0 + st.max_varpi) + st.max_h
                                   : C * st.max_varpi + st.max_h;
  double r_u = denom > 1e-300 ? 1.0 / (2.0 * denom) : std::numeric_limits<double>::infinity();
  if (R > std::min(dist, r_u) + 1e-12)
    throw PreconditionError("Poincare radius " + std::to_string(R) +
                            " exceeds the admissible radius min(dist, R_U) = " +
                            std::to_string(std::min(dist, r_u)) + " (R_U = " +
                            std::to_string(r_u) + ")");

  // psi must be compactly supported in the ball: sample the outer rim.
  double rim_max = 0.0, psi_max = 0.0;
  sample_surface(S, ball, 40, [&](const SurfacePointData& d) {
    double v = std::abs(psi.value(d.point));
    psi_max = std::max(psi_max, v);
    if (ctx.norm->distance(x, d.point) > 0.97 * R) rim_max = std::max(rim_max, v);
  });
  if (rim_max > 1e-6 * std::max(1.0, psi_max))
    throw AdmissibilityError("test function does not vanish near the rim of S_R");

  auto lp = surface_integral_raw(S, ball, spec, [&](const SurfacePointData& d) {
    return std::pow(std::abs(psi.value(d.point)), p_exp) * d.area_weighted_density;
  });
  auto rp = surface_integral_raw(S, ball, spec, [&](const SurfacePointData& d) {
    return std::pow(grad_hs_at(*d.patch, d, psi.value).norm(), p_exp) *
           d.area_weighted_density;
  });
  double cp = 2.0 * p_exp / (2.0 * alg.h() - 3.0);

  InequalityReport rep;
  rep.check = "poincare";
  rep.equation = st.characteristic ? "local Poincare inequality (characteristic variant)"
                                   : "local Poincare inequality";
  stamp(rep, ctx, S);
  rep.lhs = std::pow(lp.value, 1.0 / p_exp);
  rep.rhs = cp * R * std::pow(rp.value, 1.0 / p_exp);
  if (lp.value > 0)
    rep.lhs_err = rep.lhs * lp.error / (p_exp * lp.value);
  if (rp.value > 0)
    rep.rhs_err = rep.rhs * rp.error / (p_exp * rp.value);
  rep.constants["C_p"] = cp;
  rep.constants["R"] = R;
  rep.constants["R_U"] = r_u;
  rep.constants["p"] = p_exp;
  rep.constants["max_H"] = st.max_h;
  rep.constants["max_varpi"] = st.max_varpi;
  rep.judge_bound();
  return rep;
}

// ---- Rayleigh / Isop ------------------------------------------------------------------

RayleighResult rayleigh_isop_estimate(const LabContext& ctx, const GraphSurface& S,
                                      const std::vector<std::pair<int, double>>& splits,
                                      const std::vector<SurfaceScalar>& test_functions,
                                      const std::vector<double>& eps_list,
                                      const QuadratureSpec& spec) {
  if (S.patches.size() != 1)
    throw CapabilityError("rayleigh_isop_estimate expects a single-patch surface");
  const GraphPatch& p = S.patches[0];
  const StratifiedAlgebra& alg = *ctx.alg;
  RayleighResult out;

  auto admissible = [&](const SurfaceScalar& psi) {
    if (S.boundary.empty()) return;  // closed case: mean-zero handled by caller
    double worst = 0.0, scale = 0.0;
    sample_surface(S, Region::all(), 24,
                   [&](const SurfacePointData& d) { scale = std::max(scale, std::abs(psi.value(d.point))); });
    for (const auto& piece : S.boundary)
      for (int k = 0; k < 24; ++k) {
        Vec u = piece.pbox.lo + (piece.pbox.hi - piece.pbox.lo) * ((k + 0.5) / 24.0);
        Vec z = piece.map(u);
        worst = std::max(worst, std::abs(psi.value(p.embed(z))));
      }
    if (worst > 1e-6 * std::max(1.0, scale))
      throw AdmissibilityError("test function '" + psi.name + "' does not vanish on the boundary");
  };

  // Geometric split quotients.
  int first_param = -1;
  double first_value = 0.0;
  for (const auto& [ambient, c] : splits) {
    if (ambient == p.alpha) throw ConfigError("split coordinate equals the graph direction");
    int j = ambient < p.alpha ? ambient : ambient - 1;
    if (first_param < 0) {
      first_param = j;
      first_value = c;
    }
    // sigma^{n-2} of the level line {zeta_j = c}.
    double sig_n = 0.0;
    for (const auto& box : p.domain) {
      if (c <= box.lo[j] || c >= box.hi[j]) continue;
      BoundaryPiece piece;
      piece.patch_index = 0;
      const int d = p.pdim();
      piece.pbox.lo = Vec(d - 1);
      piece.pbox.hi = Vec(d - 1);
      int r = 0;
      for (int q = 0; q < d; ++q) {
        if (q == j) continue;
        piece.pbox.lo[r] = box.lo[q];
        piece.pbox.hi[r] = box.hi[q];
        ++r;
      }
      piece.map = [d, j, c](const Vec& u) {
        Vec z(d);
        int q2 = 0;
        for (int q = 0; q < d; ++q) z[q] = q == j ? c : u[q2++];
        return z;
      };
      piece.dmap = [d, j](const Vec&) {
        Mat D = Mat::Zero(d, d - 1);
        int q2 = 0;
        for (int q = 0; q < d; ++q)
          if (q != j) D(q, q2++) = 1.0;
        return D;
      };
      piece.outward = [d, j](const Vec&) {
        Vec o = Vec::Zero(d);
        o[j] = 1.0;
        return o;
      };
      sig_n += boundary_measure(S, {piece}, Region::all(), spec).value;
    }
    // The two sides of the split.
    auto side_area = [&](bool upper) {
      MeasureEstimate total;
      for (const auto& box : p.domain) {
        Box half = box;
        if (upper)
          half.lo[j] = std::max(half.lo[j], c);
        else
          half.hi[j] = std::min(half.hi[j], c);
        if (half.lo[j] >= half.hi[j]) continue;
        total += h_perimeter(S, Region::in_box(half), spec);
      }
      return total.value;
    };
    double s1 = side_area(false), s2 = side_area(true);
    double quotient = sig_n / std::max(std::min(s1, s2), 1e-300);
    out.geometric = std::min(out.geometric, quotient);
  }

  for (const auto& psi : test_functions) {
    admissible(psi);
    auto num = surface_integral_raw(S, Region::all(), spec, [&](const SurfacePointData& d) {
      return grad_hs_at(*d.patch, d, psi.value).norm() * d.area_weighted_density;
    });
    auto den = surface_integral_raw(S, Region::all(), spec, [&](const SurfacePointData& d) {
      return std::abs(psi.value(d.point)) * d.area_weighted_density;
    });
    if (den.value > 1e-300) out.analytic = std::min(out.analytic, num.value / den.value);
  }

  // eps-cutoff family along the first split locus.
  if (first_param >= 0 && !eps_list.empty()) {
    const int j = first_param;
    const double c = first_value;
    // Sampled points of the split locus for the distance function.
    std::vector<Vec> locus;
    for (const auto& box : p.domain) {
      const int d = p.pdim();
      for (int k = 0; k < 128; ++k) {
        Vec z(d);
        int r = 0;
        for (int q = 0; q < d; ++q) {
          if (q == j) {
            z[q] = c;
            continue;
          }
          // Only 1D transverse slices are needed for the shipped groups.
          z[q] = box.lo[q] + (box.hi[q] - box.lo[q]) * ((k + 0.5) / 128.0);
          ++r;
        }
        locus.push_back(p.embed(z));
      }
    }
    auto dist_to_locus = [&](const Vec& y) {
      double best = std::numeric_limits<double>::infinity();
      size_t best_k = 0;
      for (size_t k = 0; k < locus.size(); ++k) {
        double v = ctx.norm->distance(locus[k], y);
        if (v < best) {
          best = v;
          best_k = k;
        }
      }
      // Ternary refinement between the neighbors of the best sample.
      if (locus.size() >= 2) {
        size_t klo = best_k > 0 ? best_k - 1 : 0;
        size_t khi = std::min(best_k + 1, locus.size() - 1);
        Vec a = locus[klo], b = locus[khi];
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 25; ++it) {
          double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
          double f1 = ctx.norm->distance(Vec(a + m1 * (b - a)), y);
          double f2 = ctx.norm->distance(Vec(a + m2 * (b - a)), y);
          if (f1 < f2)
            hi = m2;
          else
            lo = m1;
          best = std::min({best, f1, f2});
        }
      }
      return best;
    };
    out.table.name = "rayleigh_cutoff";
    out.table.columns = {"eps", "quotient"};
    for (double eps : eps_list) {
      auto clamp_dist = [&](const Vec& y) { return std::min(dist_to_locus(y) / eps, 1.0); };
      auto side = [&](const SurfacePointData& d) { return d.zeta[j] >= c ? 1.0 : -1.0; };
      auto i_plus = surface_integral_raw(S, Region::all(), spec, [&](const SurfacePointData& d) {
        return side(d) > 0 ? clamp_dist(d.point) * d.area_weighted_density : 0.0;
      });
      auto i_minus = surface_integral_raw(S, Region::all(), spec, [&](const SurfacePointData& d) {
        return side(d) < 0 ? clamp_dist(d.point) * d.area_weighted_density : 0.0;
      });
      double alpha2 = i_plus.value / std::max(i_minus.value, 1e-300);
      SurfaceScalar psi_eps{"cutoff", [&, alpha2](const Vec& y) {
                              // side selected by the split parameter
                              Vec z = p.params_of(y);
                              double v = std::min(dist_to_locus(y) / eps, 1.0);
                              return z[j] >= c ? v : -alpha2 * v;
                            }};
      auto num = surface_integral_raw(S, Region::all(), spec, [&](const SurfacePointData& d) {
        return grad_hs_at(*d.patch, d, psi_eps.value).norm() * d.area_weighted_density;
      });
      auto den = surface_integral_raw(S, Region::all(), spec, [&](const SurfacePointData& d) {
        return std::abs(psi_eps.value(d.point)) * d.area_weighted_density;
      });
      double q = num.value / std::max(den.value, 1e-300);
      out.cutoff.push_back({eps, q});
      out.table.rows.push_back({eps, q});
    }
  }

  out.lambda1_lower = 0.25 * sq(out.geometric);
  if (std::isfinite(out.analytic) && std::isfinite(out.geometric))
    out.cross_gap = out.analytic - out.geometric;
  return out;
}

// ---- asymptotics --------------------------------------------------------------------------

AsymptoticResult asymptotic_check(const LabContext& ctx, const GraphSurface& S, int patch,
                                  const Vec& zeta, const std::vector<double>& t_grid,
                                  const QuadratureSpec& spec) {
  const StratifiedAlgebra& alg = *ctx.alg;
  const GraphPatch& p = S.patches.at(patch);
  Vec x = p.embed(zeta);
  const int Q = alg.homogeneous_dimension();
  double tmax = *std::max_element(t_grid.begin(), t_grid.end());
  double reach = distance_to_boundary(S, *ctx.norm, x);
  if (tmax > reach + 1e-12)
    throw PreconditionError("asymptotic grid leaves the boundary-free ball (reach " +
                            std::to_string(reach) + ")");

  auto bu = blowup_density(S, patch, zeta, *ctx.norm, spec);
  if (bu.kind == BlowupResult::Kind::Degenerate)
    throw CapabilityError("asymptotic lower bound inapplicable: degenerate blow-up");

  SurfacePointData dx = surface_frame_unchecked(p, zeta);
  SurfaceStats st = surface_stats(ctx, S, Region::in_ball(*ctx.norm, x, tmax), 40);

  AsymptoticResult out;
  out.kappa = bu.kappa;
  out.h0 = st.max_h;
  out.table.name = "asymptotic";
  out.table.columns = {"t", "sigma", "bound"};

  // Layer correction constants. Non-characteristic points use the sampled
  // sup of |varpi_{H_i}| near x; the characteristic Heisenberg case uses the
  // dilation-invariant ratios of the vertical-volume remark.
  std::vector<double> eps_layer(std::max(0, alg.step() - 1), 0.0);
  if (!dx.characteristic) {
    eps_layer = st.max_varpi_layer;
  } else {
    QuadratureSpec aux = coarse_inner(spec);
    for (double t : t_grid) {
      Region ball = Region::in_ball(*ctx.norm, x, t);
      double sig = h_perimeter(S, ball, aux).value;
      if (sig <= 0) continue;
      for (int layer = 2; layer <= alg.step(); ++layer) {
        auto vint = surface_integral_raw(S, ball, aux, [&](const SurfacePointData& d) {
          return layer_block_norm(alg, d.c, layer);
        });
        eps_layer[layer - 2] = std::max(eps_layer[layer - 2],
                                        vint.value * std::pow(t, layer - 1) / sig);
      }
    }
  }

  for (double t : t_grid) {
    Region ball = Region::in_ball(*ctx.norm, x, t);
    auto sigma = h_perimeter(S, ball, spec);
    double correction = 0.0;
    for (int layer = 2; layer <= alg.step(); ++layer)
      correction += (dx.characteristic ? layer : 1.0) * ctx.lc.for_layer(layer) *
                    eps_layer[layer - 2] * std::pow(t, layer - 1);
    double bound = bu.kappa * std::pow(t, Q - 1) *
                   std::exp(-t * st.max_h * (1.0 + correction));
    InequalityReport rep;
    rep.check = "asymptotic";
    rep.equation = dx.characteristic ? "asymptotic lower bound (characteristic point)"
                                     : "asymptotic lower bound";
    stamp(rep, ctx, S);
    rep.lhs = bound;
    rep.rhs = sigma.value;
    rep.lhs_err = bu.kappa_estimate.error * std::pow(t, Q - 1);
    rep.rhs_err = sigma.error;
    rep.tolerance = 2.0 * spec.rel_tol * std::max(bound, sigma.value);
    rep.constants["t"] = t;
    rep.constants["kappa"] = bu.kappa;
    rep.constants["H0"] = st.max_h;
    rep.judge_bound();
    out.reports.push_back(rep);
    out.table.rows.push_back({t, sigma.value, bound});
  }
  return out;
}

// ---- Sobolev -------------------------------------------------------------------------------

InequalityReport sobolev_check(const LabContext& ctx, const GraphSurface& S,
                               const SurfaceScalar& psi, const QuadratureSpec& spec,
                               bool full_form) {
  const StratifiedAlgebra& alg = *ctx.alg;
  const int Q = alg.homogeneous_dimension();
  if (!S.closed) throw PreconditionError("sobolev_check expects a closed surface");
  InequalityReport rep;
  rep.check = "sobolev";
  rep.equation = full_form ? "Sobolev inequality (layer-gradient form)"
                           : "Sobolev inequality (horizontal form)";
  stamp(rep, ctx, S);

  // Support statistics; excise characteristic cells touching supp psi.
  double psi_scale = 0.0;
  bool excised = false;
  double h_sup = 0.0;
  std::vector<double> w_layer(std::max(0, alg.step() - 1), 0.0);
  sample_surface(S, Region::all(), 40, [&](const SurfacePointData& d) {
    double v = std::abs(psi.value(d.point));
    psi_scale = std::max(psi_scale, v);
  });
  sample_surface(S, Region::all(), 40, [&](const SurfacePointData& d) {
    if (std::abs(psi.value(d.point)) < 1e-9 * std::max(1.0, psi_scale)) return;
    double H = 0.0;
    if (!curvature_or_excise(d, H)) {
      excised = true;
      return;
    }
    h_sup = std::max(h_sup, std::abs(H));
    for (int layer = 2; layer <= alg.step(); ++layer)
      w_layer[layer - 2] =
          std::max(w_layer[layer - 2], layer_block_norm(alg, d.varpi, layer));
  });
  if (excised)
    rep.warnings.push_back("support touches the characteristic locus; excised cells");

  double rho_s = 0.5 * surface_diameter(ctx, S);
  double qexp = static_cast<double>(Q - 1) / (Q - 2);

  auto lhs_int = surface_integral_raw(S, Region::all(), spec, [&](const SurfacePointData& d) {
    return std::pow(std::abs(psi.value(d.point)), qexp) * d.area_weighted_density;
  });
  rep.lhs = std::pow(lhs_int.value, 1.0 / qexp);
  if (lhs_int.value > 0) rep.lhs_err = rep.lhs * lhs_int.error / (qexp * lhs_int.value);

  double ci = std::pow(2.0, static_cast<double>(Q) * (Q - 1) / (Q - 2)) *
              std::pow(ctx.mf.k1, 1.0 / (2.0 - Q));
  double ci_pow = std::pow(ci, 1.0 / qexp);  // C_I^{(Q-2)/(Q-1)}

  if (full_form) {
    // RHS per the general statement: curvature and layer-gradient integrals.
    auto curv = surface_integral_raw(S, Region::all(), spec, [&](const SurfacePointData& d) {
      double v = std::abs(psi.value(d.point));
      double H = 0.0;
      if (v == 0.0 || !curvature_or_excise(d, H)) return 0.0;
      double w = d.area_weighted_density;
      for (int layer = 2; layer <= alg.step(); ++layer)
        w += layer * ctx.lc.for_layer(layer) * std::pow(rho_s, layer - 1) *
             layer_block_norm(alg, d.c, layer);
      return v * std::abs(H) * w;
    });
    auto grads = surface_integral_raw(S, Region::all(), spec, [&](const SurfacePointData& d) {
      if (std::abs(psi.value(d.point)) < 1e-14 * std::max(1.0, psi_scale) &&
          grad_hs_at(*d.patch, d, psi.value).norm() < 1e-14)
        return 0.0;
      LevelPointData lp = level_point_data(*d.patch, d.zeta, psi.value);
      double total = lp.grad_hs.norm() * d.area_weighted_density;
      auto projections = hs_filtration_projections(alg, d.nu, lp.grad_ts);
      for (int layer = 2; layer <= alg.step(); ++layer)
        total += layer * ctx.lc.for_layer(layer) * std::pow(rho_s, layer - 1) *
                 projections.at(static_cast<size_t>(layer) - 2).norm() *
                 d.area_weighted_density;
      return total;
    });
    rep.rhs = ci_pow * (curv.value + grads.value);
    rep.rhs_err = ci_pow * (curv.error + grads.error);
    rep.constants["C_I"] = ci;
  } else {
    // Horizontal form: C'_1 assembled from C_I, H0, layer and chi constants.
    double c0 = h_sup;
    {
      double factor = 1.0;
      for (int layer = 2; layer <= alg.step(); ++layer)
        factor += layer * ctx.lc.for_layer(layer) * std::pow(rho_s, layer - 1) *
                  w_layer[layer - 2];
      c0 = h_sup * factor;
    }
    // chi bound along the level sets of psi (sampled levels).
    std::vector<double> k_layer(std::max(0, alg.step() - 1), 0.0);
    if (alg.dim() == 3) {
      for (double frac : {0.15, 0.35, 0.55, 0.75, 0.9}) {
        double level = frac * psi_scale;
        for (const auto& p : S.patches) {
          auto fp = [&](const Vec& z) { return psi.value(p.embed(z)); };
          for (const auto& seg : extract_level_segments(fp, p.domain, level, 96, p.param_clip)) {
            Vec mid = 0.5 * (seg.a + seg.b);
            if (p.param_clip && p.param_clip(mid) > 0.0) continue;
            LevelPointData lp = level_point_data(p, mid, psi.value);
            if (lp.p_hs_eta < kExcise || lp.grad_ts.norm() < 1e-12) continue;
            Vec eta = lp.grad_ts / lp.grad_ts.norm();
            auto projections = hs_filtration_projections(alg, lp.surf.nu, eta);
            for (int layer = 2; layer <= alg.step(); ++layer)
              k_layer[layer - 2] =
                  std::max(k_layer[layer - 2],
                           projections.at(static_cast<size_t>(layer) - 2).norm() / lp.p_hs_eta);
          }
        }
      }
    }
    double c0p = 1.0;
    for (int layer = 2; layer <= alg.step(); ++layer)
      c0p += layer * ctx.lc.for_layer(layer) * std::pow(rho_s, layer - 1) * k_layer[layer - 2];
    double c1p = ci_pow * std::max(c0, c0p);
    auto rhs_int = surface_integral_raw(S, Region::all(), spec, [&](const SurfacePointData& d) {
      double v = std::abs(psi.value(d.point));
      double g = grad_hs_at(*d.patch, d, psi.value).norm();
      return (v + g) * d.area_weighted_density;
    });
    rep.rhs = c1p * rhs_int.value;
    rep.rhs_err = c1p * rhs_int.error;
    rep.constants["C_I"] = ci;
    rep.constants["C_0"] = c0;
    rep.constants["C_0_prime"] = c0p;
    rep.constants["C_1_prime"] = c1p;
    for (int layer = 2; layer <= alg.step(); ++layer)
      rep.constants["chi_bound_" + std::to_string(layer)] = k_layer[layer - 2];
  }
  rep.constants["H0_supp"] = h_sup;
  rep.constants["rho_S"] = rho_s;
  rep.judge_bound();
  return rep;
}

}  // namespace carnot
