#include "carnot/blowup.hpp"

#include <cmath>

namespace carnot {

namespace {

// Orthonormal basis of the Euclidean orthocomplement of a unit horizontal
// vector: h-1 horizontal vectors plus all vertical axes.
std::vector<Vec> vertical_hyperplane_basis(const StratifiedAlgebra& alg, const Vec& nu_h) {
  const int n = alg.dim();
  const int h = alg.h();
  std::vector<Vec> basis;
  Vec u = nu_h.head(h);
  u.normalize();
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
  for (int a = h; a < n; ++a) {
    Vec v = Vec::Zero(n);
    v[a] = 1.0;
    basis.push_back(v);
  }
  return basis;
}

void require_interior(const GraphPatch& p, const Vec& zeta) {
  const double margin = 1e-9;
  bool inside = false;
  for (const auto& b : p.domain) {
    bool ok = true;
    for (int j = 0; j < b.dim(); ++j)
      if (zeta[j] <= b.lo[j] + margin || zeta[j] >= b.hi[j] - margin) ok = false;
    if (ok) inside = true;
  }
  if (p.param_clip && p.param_clip(zeta) >= -margin) inside = false;
  if (!inside) throw DomainError("blow-up point must lie in the interior of the patch");
}

void enumerate_multis(int nvars, int max_total, std::vector<int>& cur, int pos, int used,
                      std::vector<std::vector<int>>& out) {
  if (pos == nvars) {
    if (used >= 1) out.push_back(cur);
    return;
  }
  for (int e = 0; e + used <= max_total; ++e) {
    cur[pos] = e;
    enumerate_multis(nvars, max_total, cur, pos + 1, used + e, out);
  }
  cur[pos] = 0;
}

double factorial_of_multi(const std::vector<int>& beta) {
  double f = 1.0;
  for (int e : beta)
    for (int q = 2; q <= e; ++q) f *= q;
  return f;
}

// Height of x^{-1} * S around 0 as a graph in the same vertical direction,
// evaluated by a fixed-point solve of the unipotent parameter change.
Height translated_height(const GraphPatch& p, const Vec& x) {
  const StratifiedAlgebra* alg = p.alg;
  Vec x_inv = alg->inverse(x);
  GraphPatch base = p;
  int alpha = p.alpha;
  auto value = [alg, x_inv, base, alpha](const Vec& zp) {
    Vec zeta = zp;
    Vec y;
    for (int it = 0; it < 80; ++it) {
      y = alg->mul(x_inv, base.embed(zeta));
      double worst = 0.0;
      for (int j = 0; j < zeta.size(); ++j) {
        double target = zp[j];
        double cur = y[base.ambient_index(j)];
        zeta[j] -= cur - target;
        worst = std::max(worst, std::abs(cur - target));
      }
      if (worst < 1e-15) break;
    }
    y = alg->mul(x_inv, base.embed(zeta));
    return y[alpha];
  };
  return Height::analytic(alg->dim() - 1, value, nullptr);
}

}  // namespace

double distance_to_boundary(const GraphSurface& S, const HomogeneousNorm& rho, const Vec& x,
                            int samples_per_piece) {
  if (S.boundary.empty()) return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& piece : S.boundary) {
    const GraphPatch& p = S.patches.at(piece.patch_index);
    const int d = piece.pbox.dim();
    int per_axis = d == 1 ? samples_per_piece
                          : static_cast<int>(std::ceil(std::pow(samples_per_piece, 1.0 / d)));
    std::vector<int> idx(d, 0);
    while (true) {
      Vec u(d);
      for (int j = 0; j < d; ++j)
        u[j] = piece.pbox.lo[j] +
               (piece.pbox.hi[j] - piece.pbox.lo[j]) * (idx[j] + 0.5) / per_axis;
      best = std::min(best, rho.distance(x, p.embed(piece.map(u))));
      int j = 0;
      for (; j < d; ++j) {
        if (++idx[j] < per_axis) break;
        idx[j] = 0;
      }
      if (j == d) break;
    }
  }
  return best;
}

BlowupResult blowup_density(const GraphSurface& S, int patch, const Vec& zeta,
                            const HomogeneousNorm& rho, const QuadratureSpec& spec) {
  const GraphPatch& p = S.patches.at(patch);
  const StratifiedAlgebra& alg = *p.alg;
  require_interior(p, zeta);
  SurfacePointData d = surface_frame(p, zeta);

  BlowupResult res;
  if (!d.characteristic) {
    // Case (a): kappa is the Euclidean measure of the vertical hyperplane
    // I(nu_H(x)) inside the unit rho-ball (computed at the identity after a
    // left translation).
    res.kind = BlowupResult::Kind::CaseA;
    auto basis = vertical_hyperplane_basis(alg, d.nu_h);
    const int m = static_cast<int>(basis.size());
    std::vector<double> b = rho.coordinate_bound_constants();
    Box box;
    box.lo = Vec(m);
    box.hi = Vec(m);
    for (int j = 0; j < m; ++j) {
      int layer = 1;
      for (int i = 0; i < alg.dim(); ++i)
        if (std::abs(basis[j][i]) > 0.5) layer = alg.ord(i);
      double bound = 1.02 * b[layer - 1];
      box.lo[j] = -bound;
      box.hi[j] = bound;
    }
    auto point_of = [&](const Vec& s) {
      Vec y = Vec::Zero(alg.dim());
      for (int j = 0; j < m; ++j) y += s[j] * basis[j];
      return y;
    };
    auto clip = [&](const Vec& s) { return rho.eval(point_of(s)) - 1.0; };
    res.kappa_estimate = integrate_adaptive([](const Vec&) { return 1.0; }, {box}, spec, clip);
    res.kappa = res.kappa_estimate.value;

    // Describe the limit hyperplane through x as an affine graph in the
    // largest horizontal normal component.
    int i0 = 0;
    for (int i = 1; i < alg.h(); ++i)
      if (std::abs(d.nu_h[i]) > std::abs(d.nu_h[i0])) i0 = i;
    GraphPatch lim;
    lim.alg = &alg;
    lim.alpha = i0;
    std::vector<Height::Term> terms;
    const int pd = alg.dim() - 1;
    auto param_index = [&](int ambient) { return ambient < i0 ? ambient : ambient - 1; };
    double c0 = d.point[i0];
    for (int i = 0; i < alg.h(); ++i) {
      if (i == i0) continue;
      std::vector<int> e(pd, 0);
      e[param_index(i)] = 1;
      terms.push_back({e, -d.nu_h[i] / d.nu_h[i0]});
      c0 += (d.nu_h[i] / d.nu_h[i0]) * d.point[i];
    }
    terms.push_back({std::vector<int>(pd, 0), c0});
    lim.height = Height::polynomial(pd, terms);
    Vec lo, hi;
    rho.ball_coordinate_bounds(d.point, 1.0, lo, hi);
    Box dom;
    dom.lo = Vec(pd);
    dom.hi = Vec(pd);
    for (int j = 0; j < pd; ++j) {
      dom.lo[j] = lo[lim.ambient_index(j)];
      dom.hi[j] = hi[lim.ambient_index(j)];
    }
    lim.domain = {dom};
    lim.name = "vertical-hyperplane";
    GraphSurface L;
    L.name = lim.name;
    L.patches = {lim};
    res.limit_surface = L;
    return res;
  }

  // Case (b): the patch must present S as a graph in a vertical direction.
  if (alg.ord(p.alpha) < 2)
    throw CapabilityError(
        "blow-up at a characteristic point needs a vertical graph direction; "
        "re-present the surface as a vertical graph");
  const int i = alg.ord(p.alpha);
  res.alpha = p.alpha;
  res.aniso_order = i;

  const bool exact = p.height.is_polynomial() && d.point.norm() < 1e-13;
  Height psi = exact ? p.height : translated_height(p, d.point);
  const double zero_tol = exact ? 1e-9 : 1e-5;

  std::vector<std::vector<int>> multis;
  std::vector<int> cur(alg.dim() - 1, 0);
  enumerate_multis(alg.dim() - 1, i, cur, 0, 0, multis);

  std::vector<Height::Term> limit_terms;
  bool violated = false;
  std::string violators;
  Vec zero = Vec::Zero(alg.dim() - 1);
  for (const auto& beta : multis) {
    int weighted = 0;
    for (int j = 0; j < alg.dim() - 1; ++j) weighted += alg.ord(p.ambient_index(j)) * beta[j];
    if (weighted > i) continue;
    double a = psi.derivative(zero, beta) / factorial_of_multi(beta);
    if (std::abs(a) < zero_tol) a = 0.0;
    res.taylor.push_back({beta, a});
    if (weighted < i && a != 0.0) {
      violated = true;
      violators += " (order " + std::to_string(weighted) + ")";
    } else if (weighted == i && a != 0.0) {
      limit_terms.push_back({beta, a});
    }
  }

  if (violated) {
    res.kind = BlowupResult::Kind::Degenerate;
    res.kappa = 0.0;
    res.note = "anisotropic Taylor condition violated" + violators;
    return res;
  }

  res.kind = BlowupResult::Kind::CaseB;
  GraphPatch lim;
  lim.alg = &alg;
  lim.alpha = p.alpha;
  lim.orientation = 1.0;
  lim.height = Height::polynomial(alg.dim() - 1, limit_terms);
  std::vector<double> b = rho.coordinate_bound_constants();
  const int pd = alg.dim() - 1;
  Box dom;
  dom.lo = Vec(pd);
  dom.hi = Vec(pd);
  for (int j = 0; j < pd; ++j) {
    double bound = 1.02 * b[alg.ord(lim.ambient_index(j)) - 1];
    dom.lo[j] = -bound;
    dom.hi[j] = bound;
  }
  lim.domain = {dom};
  lim.name = "anisotropic-limit-graph";
  GraphSurface L;
  L.name = lim.name;
  L.patches = {lim};
  res.kappa_estimate = h_perimeter(L, Region::in_ball(rho, alg.identity(), 1.0), spec);
  res.kappa = res.kappa_estimate.value;
  res.limit_surface = L;
  return res;
}

std::vector<std::pair<double, double>> blowup_scan(const GraphSurface& S, int patch,
                                                   const Vec& zeta, const HomogeneousNorm& rho,
                                                   const std::vector<double>& radii,
                                                   const QuadratureSpec& spec) {
  const GraphPatch& p = S.patches.at(patch);
  require_interior(p, zeta);
  Vec x = p.embed(zeta);
  double reach = distance_to_boundary(S, rho, x);
  std::vector<std::pair<double, double>> out;
  const int Q = p.alg->homogeneous_dimension();
  for (double R : radii) {
    if (!(R > 0.0)) throw DomainError("blow-up scan radii must be positive");
    if (R > reach + 1e-12)
      throw DomainError("scan radius " + std::to_string(R) +
                        " exceeds the distance to the surface boundary " + std::to_string(reach));
    double sigma = h_perimeter(S, Region::in_ball(rho, x, R), spec).value;
    out.push_back({R, sigma / std::pow(R, Q - 1)});
  }
  return out;
}

}  // namespace carnot
