#include "carnot/surface.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "carnot/dual.hpp"
#include "carnot/interval.hpp"

namespace carnot {

// ---- Height ---------------------------------------------------------------

Height Height::polynomial(int nvars, std::vector<Term> terms) {
  Height h;
  h.nvars_ = nvars;
  h.poly_ = true;
  for (auto& t : terms) {
    if (static_cast<int>(t.first.size()) != nvars)
      throw ConfigError("polynomial term exponent tuple has wrong arity");
    h.terms_.push_back(std::move(t));
  }
  return h;
}

Height Height::analytic(int nvars, std::function<double(const Vec&)> value,
                        std::function<Vec(const Vec&)> grad, std::function<Mat(const Vec&)> hess) {
  Height h;
  h.nvars_ = nvars;
  h.poly_ = false;
  h.value_ = std::move(value);
  h.grad_ = std::move(grad);
  h.hess_ = std::move(hess);
  return h;
}

double Height::value(const Vec& z) const {
  if (!poly_) return value_(z);
  double s = 0.0;
  for (const auto& [e, c] : terms_) {
    double t = c;
    for (int j = 0; j < nvars_; ++j)
      for (int p = 0; p < e[j]; ++p) t *= z[j];
    s += t;
  }
  return s;
}

Vec Height::grad(const Vec& z) const {
  if (!poly_) {
    if (grad_) return grad_(z);
    Vec g(nvars_);
    const double h = 1e-6;
    for (int j = 0; j < nvars_; ++j) {
      Vec zp = z, zm = z;
      zp[j] += h;
      zm[j] -= h;
      g[j] = (value_(zp) - value_(zm)) / (2 * h);
    }
    return g;
  }
  Vec g = Vec::Zero(nvars_);
  for (const auto& [e, c] : terms_)
    for (int j = 0; j < nvars_; ++j) {
      if (e[j] == 0) continue;
      double t = c * e[j];
      for (int l = 0; l < nvars_; ++l) {
        int pow = l == j ? e[l] - 1 : e[l];
        for (int p = 0; p < pow; ++p) t *= z[l];
      }
      g[j] += t;
    }
  return g;
}

Mat Height::hess(const Vec& z) const {
  if (!poly_) {
    if (hess_) return hess_(z);
    Mat H(nvars_, nvars_);
    const double h = 1e-4;
    for (int j = 0; j < nvars_; ++j) {
      Vec zp = z, zm = z;
      zp[j] += h;
      zm[j] -= h;
      H.col(j) = (grad(zp) - grad(zm)) / (2 * h);
    }
    return 0.5 * (H + H.transpose());
  }
  Mat H = Mat::Zero(nvars_, nvars_);
  for (int a = 0; a < nvars_; ++a)
    for (int b = 0; b < nvars_; ++b) {
      std::vector<int> multi(nvars_, 0);
      ++multi[a];
      ++multi[b];
      H(a, b) = derivative(z, multi);
    }
  return H;
}

double Height::derivative(const Vec& z, const std::vector<int>& multi) const {
  int total = 0;
  for (int m : multi) total += m;
  if (total == 0) return value(z);
  if (poly_) {
    double s = 0.0;
    for (const auto& [e, c] : terms_) {
      double t = c;
      bool dead = false;
      for (int j = 0; j < nvars_ && !dead; ++j) {
        if (e[j] < multi[j]) {
          dead = true;
          break;
        }
        for (int p = 0; p < multi[j]; ++p) t *= e[j] - p;
        for (int p = 0; p < e[j] - multi[j]; ++p) t *= z[j];
      }
      if (!dead) s += t;
    }
    return s;
  }
  if (total > 3) throw CapabilityError("finite-difference Taylor data limited to order 3");
  int v = 0;
  while (multi[v] == 0) ++v;
  std::vector<int> rest = multi;
  --rest[v];
  const double h = 1e-3;
  Vec zp = z, zm = z;
  zp[v] += h;
  zm[v] -= h;
  return (derivative(zp, rest) - derivative(zm, rest)) / (2 * h);
}

Height Height::rescaled(const std::vector<double>& in_scale, double out_scale) const {
  if (poly_) {
    std::vector<Term> terms = terms_;
    for (auto& [e, c] : terms) {
      c *= out_scale;
      for (int j = 0; j < nvars_; ++j) c *= std::pow(in_scale[j], e[j]);
    }
    return polynomial(nvars_, std::move(terms));
  }
  auto scale_in = [in_scale](const Vec& z) {
    Vec w = z;
    for (int j = 0; j < w.size(); ++j) w[j] *= in_scale[j];
    return w;
  };
  auto val = value_;
  auto grd = grad_;
  auto hss = hess_;
  int nv = nvars_;
  std::function<Mat(const Vec&)> new_hess = nullptr;
  if (hss)
    new_hess = [=](const Vec& z) {
      Mat H = hss(scale_in(z));
      for (int a = 0; a < nv; ++a)
        for (int b = 0; b < nv; ++b) H(a, b) *= out_scale * in_scale[a] * in_scale[b];
      return H;
    };
  return analytic(
      nv, [=](const Vec& z) { return out_scale * val(scale_in(z)); },
      grd ? std::function<Vec(const Vec&)>([=](const Vec& z) {
        Vec g = grd(scale_in(z));
        for (int j = 0; j < nv; ++j) g[j] *= out_scale * in_scale[j];
        return g;
      })
          : nullptr,
      new_hess);
}

// ---- GraphPatch -----------------------------------------------------------

Vec GraphPatch::embed(const Vec& zeta) const {
  const int n = alg->dim();
  Vec y(n);
  for (int j = 0; j < n - 1; ++j) y[ambient_index(j)] = zeta[j];
  y[alpha] = height.value(zeta);
  return y;
}

Vec GraphPatch::params_of(const Vec& ambient) const {
  const int n = alg->dim();
  Vec z(n - 1);
  for (int j = 0; j < n - 1; ++j) z[j] = ambient[ambient_index(j)];
  return z;
}

bool GraphPatch::on_patch(const Vec& ambient, double tol) const {
  Vec z = params_of(ambient);
  if (!contains(z, 1e-12)) return false;
  return std::abs(height.value(z) - ambient[alpha]) <= tol;
}

Mat GraphPatch::tangents(const Vec& zeta) const {
  const int n = alg->dim();
  Vec g = height.grad(zeta);
  Mat T = Mat::Zero(n, n - 1);
  for (int j = 0; j < n - 1; ++j) {
    T(ambient_index(j), j) = 1.0;
    T(alpha, j) = g[j];
  }
  return T;
}

Vec GraphPatch::euclid_normal(const Vec& zeta) const {
  const int n = alg->dim();
  Vec g = height.grad(zeta);
  Vec N = Vec::Zero(n);
  N[alpha] = orientation;
  for (int j = 0; j < n - 1; ++j) N[ambient_index(j)] = -orientation * g[j];
  return N;
}

bool GraphPatch::contains(const Vec& zeta, double pad) const {
  bool in_box = false;
  for (const auto& b : domain)
    if (b.contains(zeta, pad)) {
      in_box = true;
      break;
    }
  if (!in_box) return false;
  if (param_clip && param_clip(zeta) > pad) return false;
  return true;
}

GraphPatch GraphPatch::dilated(double t) const {
  if (!(t > 0)) throw DomainError("dilated requires t > 0");
  GraphPatch out = *this;
  std::vector<double> in_scale(alg->dim() - 1);
  for (int j = 0; j < alg->dim() - 1; ++j)
    in_scale[j] = std::pow(t, -alg->ord(ambient_index(j)));
  out.height = height.rescaled(in_scale, std::pow(t, alg->ord(alpha)));
  for (auto& b : out.domain)
    for (int j = 0; j < b.dim(); ++j) {
      double s = std::pow(t, alg->ord(ambient_index(j)));
      b.lo[j] *= s;
      b.hi[j] *= s;
    }
  if (param_clip) {
    auto base_clip = param_clip;
    std::vector<double> inv = in_scale;
    out.param_clip = [base_clip, inv](const Vec& z) {
      Vec w = z;
      for (int j = 0; j < w.size(); ++j) w[j] *= inv[j];
      return base_clip(w);
    };
  }
  return out;
}

GraphSurface GraphSurface::dilated(double t) const {
  GraphSurface out = *this;
  out.name = name + "@dilate(" + std::to_string(t) + ")";
  for (auto& p : out.patches) p = p.dilated(t);
  // Boundary pieces do not transport automatically; presets rebuild them.
  out.boundary.clear();
  for (const auto& piece : boundary) {
    BoundaryPiece q = piece;
    const GraphPatch& base = patches[piece.patch_index];
    auto scale_params = [base, t](const Vec& z) {
      Vec w = z;
      for (int j = 0; j < w.size(); ++j)
        w[j] *= std::pow(t, base.alg->ord(base.ambient_index(j)));
      return w;
    };
    auto base_map = piece.map;
    auto base_dmap = piece.dmap;
    auto base_out = piece.outward;
    q.map = [=](const Vec& u) { return scale_params(base_map(u)); };
    q.dmap = [=](const Vec& u) {
      Mat D = base_dmap(u);
      for (int j = 0; j < D.rows(); ++j)
        D.row(j) *= std::pow(t, base.alg->ord(base.ambient_index(j)));
      return D;
    };
    q.outward = [=](const Vec& u) { return scale_params(base_out(u)); };
    out.boundary.push_back(std::move(q));
  }
  return out;
}

// ---- per-point frame data ---------------------------------------------------

namespace {

SurfacePointData make_point_data(const StratifiedAlgebra& alg, Vec zeta, Vec y, const Vec& N) {
  SurfacePointData d;
  d.zeta = std::move(zeta);
  d.point = std::move(y);
  d.A = alg.frame(d.point);
  d.N = N;
  d.c = d.A.transpose() * N;
  const int h = alg.h();
  double c_norm = d.c.norm();
  double ch_norm = d.c.head(h).norm();
  d.nu = d.c / c_norm;
  d.p_h_nu = ch_norm / c_norm;
  d.characteristic = d.p_h_nu < kEpsChar;
  d.nu_h = Vec::Zero(alg.dim());
  d.varpi = Vec::Zero(alg.dim());
  if (!d.characteristic) {
    d.nu_h.head(h) = d.c.head(h) / ch_norm;
    for (int a = h; a < alg.dim(); ++a) d.varpi[a] = d.c[a] / ch_norm;
  }
  d.sigma_density = ch_norm / N.norm();
  d.area_weighted_density = ch_norm;
  d.riem_weighted_density = c_norm;
  return d;
}

}  // namespace

SurfacePointData surface_frame(const GraphPatch& p, const Vec& zeta) {
  if (!p.contains(zeta, 1e-9))
    throw DomainError("surface_frame: parameter point outside the patch domain");
  return make_point_data(*p.alg, zeta, p.embed(zeta), p.euclid_normal(zeta));
}

SurfacePointData surface_frame_unchecked(const GraphPatch& p, const Vec& zeta) {
  SurfacePointData d = make_point_data(*p.alg, zeta, p.embed(zeta), p.euclid_normal(zeta));
  d.patch = &p;
  return d;
}

namespace {

ClipFn region_clip(const GraphPatch& p, const Region& region) {
  ClipFn ball_clip = nullptr;
  if (region.ball) {
    auto ball = *region.ball;
    Vec inv_center = p.alg->inverse(ball.center);
    const StratifiedAlgebra* alg = p.alg;
    ball_clip = [ball, inv_center, alg, &p](const Vec& zeta) {
      return ball.norm->eval(alg->mul(inv_center, p.embed(zeta))) - ball.radius;
    };
  }
  if (!p.param_clip) return ball_clip;
  if (!ball_clip) return p.param_clip;
  auto pc = p.param_clip;
  return [ball_clip, pc](const Vec& zeta) { return std::max(ball_clip(zeta), pc(zeta)); };
}

// Certified cell classification: -1 outside, +1 inside, 0 unknown. The ball
// part runs interval arithmetic through the group product (the height range
// over the cell is sampled with range padding); the param_clip part falls
// back to padded sampling.
CellClassifier region_classifier(const GraphPatch& p, const Region& region) {
  if (!region.ball && !p.param_clip) return nullptr;
  const StratifiedAlgebra* alg = p.alg;
  const GraphPatch* pp = &p;
  std::optional<Region::Ball> ball = region.ball;
  Vec inv_center;
  if (ball) inv_center = alg->inverse(ball->center);
  return [alg, pp, ball, inv_center](const Box& cell) -> int {
    const int d = cell.dim();
    // Sample the height over corners + center (3^d grid).
    double psi_min = std::numeric_limits<double>::infinity(), psi_max = -psi_min;
    double clip_min = std::numeric_limits<double>::infinity(), clip_max = -clip_min;
    std::vector<int> s(d, 0);
    while (true) {
      Vec z(d);
      for (int j = 0; j < d; ++j) z[j] = cell.lo[j] + 0.5 * s[j] * (cell.hi[j] - cell.lo[j]);
      if (ball) {
        double v = pp->height.value(z);
        psi_min = std::min(psi_min, v);
        psi_max = std::max(psi_max, v);
      }
      if (pp->param_clip) {
        double c = pp->param_clip(z);
        clip_min = std::min(clip_min, c);
        clip_max = std::max(clip_max, c);
      }
      int j = 0;
      for (; j < d; ++j) {
        if (++s[j] < 3) break;
        s[j] = 0;
      }
      if (j == d) break;
    }
    int status = 1;
    if (pp->param_clip) {
      double pad = clip_max - clip_min;
      if (clip_min - pad > 0.0) return -1;
      if (clip_max + pad > 0.0) status = 0;
    }
    if (ball) {
      const int n = alg->dim();
      std::vector<Interval> x(n), y(n);
      for (int i = 0; i < n; ++i) x[i] = Interval(inv_center[i]);
      double pad = psi_max - psi_min;
      for (int j = 0; j < n - 1; ++j)
        y[pp->ambient_index(j)] = Interval(cell.lo[j], cell.hi[j]);
      y[pp->alpha] = Interval(psi_min - pad, psi_max + pad);
      std::vector<Interval> w = alg->bch(x, y);
      Vec wlo(n), whi(n);
      for (int i = 0; i < n; ++i) {
        wlo[i] = w[i].lo;
        whi[i] = w[i].hi;
      }
      double rho_lo = 0.0, rho_hi = 0.0;
      ball->norm->eval_interval(wlo, whi, rho_lo, rho_hi);
      if (rho_lo > ball->radius) return -1;
      if (rho_hi >= ball->radius) status = 0;
    }
    return status;
  };
}

std::vector<Box> region_boxes(const GraphPatch& p, const Region& region) {
  std::vector<Box> out = p.domain;
  auto restrict_to = [&out](const Box& rb) {
    std::vector<Box> cutboxes;
    for (const auto& b : out) {
      Box cut;
      if (Box::intersect(b, rb, cut)) cutboxes.push_back(cut);
    }
    out = std::move(cutboxes);
  };
  if (region.param_box) restrict_to(*region.param_box);
  if (region.ball) {
    // Tighten the root cells to the coordinate bounding box of the ball so
    // the adaptive resolution scales with the radius.
    Vec lo, hi;
    region.ball->norm->ball_coordinate_bounds(region.ball->center, region.ball->radius, lo, hi);
    Box bb;
    const int d = p.pdim();
    bb.lo = Vec(d);
    bb.hi = Vec(d);
    for (int j = 0; j < d; ++j) {
      bb.lo[j] = lo[p.ambient_index(j)];
      bb.hi[j] = hi[p.ambient_index(j)];
    }
    restrict_to(bb);
  }
  return out;
}

}  // namespace

std::pair<int, Vec> locate_on_surface(const GraphSurface& S, const Vec& ambient, double tol) {
  for (size_t pi = 0; pi < S.patches.size(); ++pi) {
    const GraphPatch& p = S.patches[pi];
    if (p.on_patch(ambient, tol)) return {static_cast<int>(pi), p.params_of(ambient)};
  }
  throw DomainError("point is not on the surface (tolerance " + std::to_string(tol) + ")");
}

MeasureEstimate surface_integral_raw(const GraphSurface& S, const Region& region,
                                     const QuadratureSpec& spec,
                                     const std::function<double(const SurfacePointData&)>& fn) {
  MeasureEstimate total;
  for (const auto& p : S.patches) {
    auto boxes = region_boxes(p, region);
    if (boxes.empty()) continue;
    auto clip = region_clip(p, region);
    auto classifier = region_classifier(p, region);
    auto f = [&](const Vec& zeta) { return fn(surface_frame_unchecked(p, zeta)); };
    total += integrate_adaptive(f, boxes, spec, clip, classifier);
  }
  return total;
}

MeasureEstimate h_perimeter(const GraphSurface& S, const Region& region,
                            const QuadratureSpec& spec, const SurfaceWeight& weight) {
  return surface_integral_raw(S, region, spec, [&](const SurfacePointData& d) {
    return weight ? weight(d) * d.area_weighted_density : d.area_weighted_density;
  });
}

MeasureEstimate riemannian_area(const GraphSurface& S, const Region& region,
                                const QuadratureSpec& spec) {
  return surface_integral_raw(S, region, spec,
                              [](const SurfacePointData& d) { return d.riem_weighted_density; });
}

// ---- parametrized patches ---------------------------------------------------

namespace {

// Generalized cross product: <w, N> = det([w, T]) for all w.
Vec cofactor_normal(const Mat& T) {
  const int n = static_cast<int>(T.rows());
  Vec N(n);
  Mat minor(n - 1, n - 1);
  for (int i = 0; i < n; ++i) {
    int r = 0;
    for (int row = 0; row < n; ++row) {
      if (row == i) continue;
      minor.row(r++) = T.row(row);
    }
    N[i] = ((i % 2 == 0) ? 1.0 : -1.0) * minor.determinant();
  }
  return N;
}

}  // namespace

MeasureEstimate h_perimeter_param(const ParamPatch& p, const Region& region,
                                  const QuadratureSpec& spec) {
  const StratifiedAlgebra& alg = *p.alg;
  const int h = alg.h();
  ClipFn clip = nullptr;
  if (region.ball) {
    auto ball = *region.ball;
    Vec inv_center = alg.inverse(ball.center);
    clip = [ball, inv_center, &alg, &p](const Vec& zeta) {
      Vec y;
      Mat T;
      p.eval(zeta, y, T);
      return ball.norm->eval(alg.mul(inv_center, y)) - ball.radius;
    };
  }
  if (p.param_clip) {
    auto pc = p.param_clip;
    if (clip) {
      auto ball_clip = clip;
      clip = [ball_clip, pc](const Vec& z) { return std::max(ball_clip(z), pc(z)); };
    } else {
      clip = pc;
    }
  }
  auto f = [&](const Vec& zeta) {
    Vec y;
    Mat T;
    p.eval(zeta, y, T);
    Vec N = cofactor_normal(T);
    Vec c = alg.frame(y).transpose() * N;
    return c.head(h).norm();
  };
  std::vector<Box> boxes = p.domain;
  if (region.param_box) {
    std::vector<Box> cutboxes;
    for (const auto& b : boxes) {
      Box cut;
      if (Box::intersect(b, *region.param_box, cut)) cutboxes.push_back(cut);
    }
    boxes = cutboxes;
  }
  MeasureEstimate total;
  if (!boxes.empty()) total = integrate_adaptive(f, boxes, spec, clip);
  return total;
}

ParamPatch left_translated(const GraphPatch& p, const Vec& g) {
  ParamPatch out;
  out.alg = p.alg;
  out.domain = p.domain;
  out.param_clip = p.param_clip;
  const StratifiedAlgebra* alg = p.alg;
  Vec g_copy = g;
  out.eval = [alg, g_copy, p](const Vec& zeta, Vec& y, Mat& T) {
    const int n = alg->dim();
    Vec y0 = p.embed(zeta);
    Mat T0 = p.tangents(zeta);
    y = alg->mul(g_copy, y0);
    T.resize(n, n - 1);
    std::vector<Jet> a(n), b(n);
    for (int i = 0; i < n; ++i) a[i] = Jet(g_copy[i]);
    for (int j = 0; j < n - 1; ++j) {
      for (int i = 0; i < n; ++i) b[i] = Jet(y0[i], T0(i, j));
      auto col = alg->bch(a, b);
      for (int i = 0; i < n; ++i) T(i, j) = col[i].d;
    }
  };
  return out;
}

ParamPatch right_flowed(const GraphPatch& p, const Vec& w, double eps) {
  ParamPatch out;
  out.alg = p.alg;
  out.domain = p.domain;
  out.param_clip = p.param_clip;
  const StratifiedAlgebra* alg = p.alg;
  Vec c = eps * w;
  out.eval = [alg, c, p](const Vec& zeta, Vec& y, Mat& T) {
    const int n = alg->dim();
    Vec y0 = p.embed(zeta);
    Mat T0 = p.tangents(zeta);
    y = alg->mul(y0, c);
    T.resize(n, n - 1);
    std::vector<Jet> a(n), b(n);
    for (int i = 0; i < n; ++i) b[i] = Jet(c[i]);
    for (int j = 0; j < n - 1; ++j) {
      for (int i = 0; i < n; ++i) a[i] = Jet(y0[i], T0(i, j));
      auto col = alg->bch(a, b);
      for (int i = 0; i < n; ++i) T(i, j) = col[i].d;
    }
  };
  return out;
}

// ---- curvature and C_H nu_H -------------------------------------------------

double horizontal_mean_curvature(const GraphPatch& p, const Vec& zeta) {
  const StratifiedAlgebra& alg = *p.alg;
  SurfacePointData d0 = surface_frame_unchecked(p, zeta);
  if (d0.characteristic)
    throw SingularityError("horizontal mean curvature undefined at a characteristic point");
  const double step = 1e-5 * std::max(1.0, d0.point.norm());
  double H = 0.0;
  for (int i = 0; i < alg.h(); ++i) {
    Vec dir = d0.A.col(i);
    Vec zp = p.params_of(d0.point + step * dir);
    Vec zm = p.params_of(d0.point - step * dir);
    SurfacePointData dp = surface_frame_unchecked(p, zp);
    SurfacePointData dm = surface_frame_unchecked(p, zm);
    if (dp.characteristic || dm.characteristic)
      throw SingularityError("curvature stencil touches the characteristic locus");
    H += (dp.nu_h[i] - dm.nu_h[i]) / (2.0 * step);
  }
  return H;
}

double ch_bound_constant(const StratifiedAlgebra& alg) {
  static std::mutex mu;
  static std::map<const StratifiedAlgebra*, double> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(&alg);
    if (it != cache.end()) return it->second;
  }
  const int h = alg.h();
  double C = 0.0;
  if (alg.step() >= 2) {
    for (int a = alg.layer_begin(2); a < alg.layer_end(2); ++a) {
      Mat M(h, h);
      for (int i = 0; i < h; ++i)
        for (int j = 0; j < h; ++j) M(i, j) = alg.C(a, i, j);
      Eigen::JacobiSVD<Mat> svd(M);
      C += svd.singularValues()[0];
    }
  }
  std::lock_guard<std::mutex> lock(mu);
  cache[&alg] = C;
  return C;
}

ChNuData ch_nu(const SurfacePointData& d, const StratifiedAlgebra& alg) {
  if (d.characteristic) throw SingularityError("C_H nu_H undefined at a characteristic point");
  const int h = alg.h();
  ChNuData out;
  out.vec = Vec::Zero(alg.dim());
  if (alg.step() >= 2) {
    for (int a = alg.layer_begin(2); a < alg.layer_end(2); ++a) {
      if (d.varpi[a] == 0.0) continue;
      for (int i = 0; i < h; ++i) {
        double s = 0.0;
        for (int j = 0; j < h; ++j) s += alg.C(a, i, j) * d.nu_h[j];
        out.vec[i] += d.varpi[a] * s;
      }
    }
  }
  out.magnitude = out.vec.norm();
  out.bound_constant = ch_bound_constant(alg);
  return out;
}

ChNuData ch_nu(const GraphPatch& p, const Vec& zeta) {
  return ch_nu(surface_frame(p, zeta), *p.alg);
}

// ---- characteristic locus ---------------------------------------------------

std::vector<FlaggedCell> characteristic_locus(const GraphSurface& S, int resolution) {
  std::vector<FlaggedCell> flagged;
  for (size_t pi = 0; pi < S.patches.size(); ++pi) {
    const GraphPatch& p = S.patches[pi];
    const int d = p.pdim();
    for (const auto& box : p.domain) {
      std::vector<int> idx(d, 0);
      while (true) {
        Box cell;
        cell.lo = Vec(d);
        cell.hi = Vec(d);
        for (int j = 0; j < d; ++j) {
          double w = (box.hi[j] - box.lo[j]) / resolution;
          cell.lo[j] = box.lo[j] + idx[j] * w;
          cell.hi[j] = cell.lo[j] + w;
        }
        // Sample corners + center of the cell.
        double mn = std::numeric_limits<double>::infinity(), mx = 0.0;
        double clip_min = std::numeric_limits<double>::infinity();
        std::vector<int> s(d, 0);
        while (true) {
          Vec z(d);
          for (int j = 0; j < d; ++j) z[j] = cell.lo[j] + 0.5 * s[j] * (cell.hi[j] - cell.lo[j]);
          double ratio = surface_frame_unchecked(p, z).p_h_nu;
          mn = std::min(mn, ratio);
          mx = std::max(mx, ratio);
          if (p.param_clip) clip_min = std::min(clip_min, p.param_clip(z));
          int j = 0;
          for (; j < d; ++j) {
            if (++s[j] < 3) break;
            s[j] = 0;
          }
          if (j == d) break;
        }
        bool outside = p.param_clip && clip_min > 0.0;
        if (!outside && mn <= kEpsChar + (mx - mn))
          flagged.push_back({static_cast<int>(pi), cell, mn});
        int j = 0;
        for (; j < d; ++j) {
          if (++idx[j] < resolution) break;
          idx[j] = 0;
        }
        if (j == d) break;
      }
    }
  }
  return flagged;
}

// ---- boundary machinery -----------------------------------------------------

namespace {

// Orthonormal basis of {v in R^m : <v, a> = 0}, embedded in R^n.
std::vector<Vec> hyperplane_basis(const Vec& a, int m, int n) {
  std::vector<Vec> basis;
  Vec ah = a.head(m);
  double na = ah.norm();
  if (na < 1e-13) {
    for (int i = 0; i < m; ++i) {
      Vec v = Vec::Zero(n);
      v[i] = 1.0;
      basis.push_back(v);
    }
    return basis;
  }
  // Householder complement of ah.
  Mat Q = Mat::Identity(m, m);
  Vec u = ah / na;
  Vec e0 = Vec::Zero(m);
  e0[0] = 1.0;
  Vec w = u - e0;
  if (w.norm() > 1e-14) {
    w.normalize();
    Q -= 2.0 * w * w.transpose();
  }
  // Columns 1..m-1 of Q span the complement of u.
  for (int j = 1; j < m; ++j) {
    Vec v = Vec::Zero(n);
    v.head(m) = Q.col(j);
    basis.push_back(v);
  }
  return basis;
}

}  // namespace

std::vector<Vec> hs_filtration_projections(const StratifiedAlgebra& alg, const Vec& nu,
                                           const Vec& v) {
  // Filtration bases: T^i S = {w in TS : w_J = 0 for ord(J) > i}; the layer
  // H_iS is the orthogonal complement of T^{i-1}S inside T^iS.
  const int n = alg.dim();
  std::vector<Vec> projections;
  std::vector<Vec> prev;
  for (int layer = 1; layer <= alg.step(); ++layer) {
    auto cur = hyperplane_basis(nu, alg.layer_end(layer), n);
    std::vector<Vec> fresh;
    for (auto b : cur) {
      for (const auto& w : prev) b -= b.dot(w) * w;
      for (const auto& w : fresh) b -= b.dot(w) * w;
      double nb = b.norm();
      if (nb > 1e-10) fresh.push_back(b / nb);
    }
    if (layer >= 2) {
      Vec proj = Vec::Zero(n);
      for (const auto& w : fresh) proj += v.dot(w) * w;
      projections.push_back(proj);
    }
    for (const auto& w : fresh) prev.push_back(w);
  }
  return projections;
}

BoundaryPointData boundary_frame(const GraphSurface& S, const BoundaryPiece& piece, const Vec& u,
                                 bool with_chi) {
  const GraphPatch& p = S.patches.at(piece.patch_index);
  const StratifiedAlgebra& alg = *p.alg;
  const int n = alg.dim();
  const int h = alg.h();

  BoundaryPointData b;
  Vec zeta = piece.map(u);
  b.surf = surface_frame_unchecked(p, zeta);

  Mat T_param = p.tangents(zeta);             // n x (n-1)
  Mat D = piece.dmap(u);                      // (n-1) x (n-2)
  Mat T_coord = T_param * D;                  // n x (n-2)
  Mat F = b.surf.A.triangularView<Eigen::Lower>().solve(T_coord);  // frame comps

  Mat G = F.transpose() * F;
  b.riem_area = std::sqrt(std::max(G.determinant(), 0.0));

  // Orthonormalize the boundary tangents, then project the outward hint.
  std::vector<Vec> tb;
  for (int j = 0; j < F.cols(); ++j) {
    Vec v = F.col(j);
    for (const auto& w : tb) v -= v.dot(w) * w;
    double nv = v.norm();
    if (nv > 1e-13) tb.push_back(v / nv);
  }
  Vec hint_coord = T_param * piece.outward(u);
  Vec dfr = b.surf.A.triangularView<Eigen::Lower>().solve(hint_coord);
  dfr -= dfr.dot(b.surf.nu) * b.surf.nu;
  for (const auto& w : tb) dfr -= dfr.dot(w) * w;
  double nd = dfr.norm();
  b.eta = nd > 1e-13 ? Vec(dfr / nd) : Vec(Vec::Zero(n));

  // P_HS eta = eta_H - <eta_H, nu_H> nu_H.
  Vec etaH = Vec::Zero(n);
  etaH.head(h) = b.eta.head(h);
  if (!b.surf.characteristic) etaH -= etaH.dot(b.surf.nu_h) * b.surf.nu_h;
  b.eta_hs = etaH;
  b.p_hs_eta = etaH.norm();

  if (with_chi && alg.step() >= 2)
    b.chi_layers = hs_filtration_projections(alg, b.surf.nu, b.eta);
  return b;
}

std::vector<BoundaryPiece> box_boundary(const GraphSurface& S) {
  std::vector<BoundaryPiece> pieces;
  for (size_t pi = 0; pi < S.patches.size(); ++pi) {
    const GraphPatch& p = S.patches[pi];
    const int d = p.pdim();
    for (const auto& box : p.domain) {
      for (int fdim = 0; fdim < d; ++fdim) {
        for (int side = 0; side < 2; ++side) {
          BoundaryPiece piece;
          piece.patch_index = static_cast<int>(pi);
          piece.pbox.lo = Vec(d - 1);
          piece.pbox.hi = Vec(d - 1);
          int r = 0;
          for (int j = 0; j < d; ++j) {
            if (j == fdim) continue;
            piece.pbox.lo[r] = box.lo[j];
            piece.pbox.hi[r] = box.hi[j];
            ++r;
          }
          double fixed = side == 0 ? box.lo[fdim] : box.hi[fdim];
          double sign = side == 0 ? -1.0 : 1.0;
          piece.map = [d, fdim, fixed](const Vec& u) {
            Vec z(d);
            int q = 0;
            for (int j = 0; j < d; ++j) z[j] = j == fdim ? fixed : u[q++];
            return z;
          };
          piece.dmap = [d, fdim](const Vec&) {
            Mat D = Mat::Zero(d, d - 1);
            int q = 0;
            for (int j = 0; j < d; ++j)
              if (j != fdim) D(j, q++) = 1.0;
            return D;
          };
          piece.outward = [d, fdim, sign](const Vec&) {
            Vec o = Vec::Zero(d);
            o[fdim] = sign;
            return o;
          };
          piece.name = "patch" + std::to_string(pi) + (side == 0 ? ":lo" : ":hi") +
                       std::to_string(fdim);
          pieces.push_back(std::move(piece));
        }
      }
    }
  }
  return pieces;
}

BoundaryPiece curve_on_surface(const GraphSurface& S, int patch_index,
                               std::function<Vec(double)> ambient_curve, double u0, double u1,
                               Vec outward_param_hint, double tol) {
  const GraphPatch& p = S.patches.at(patch_index);
  if (p.pdim() != 2)
    throw CapabilityError("curve_on_surface expects a 2-parameter patch (3-dim groups)");
  BoundaryPiece piece;
  piece.patch_index = patch_index;
  piece.pbox.lo = Vec::Constant(1, u0);
  piece.pbox.hi = Vec::Constant(1, u1);
  const GraphPatch* pp = &p;
  piece.map = [pp, ambient_curve, tol](const Vec& u) {
    Vec y = ambient_curve(u[0]);
    if (!pp->on_patch(y, tol))
      throw GeometryError("boundary curve leaves the surface (tolerance " + std::to_string(tol) +
                          ")");
    return pp->params_of(y);
  };
  auto map_copy = piece.map;
  piece.dmap = [map_copy](const Vec& u) {
    const double h = 1e-6;
    Vec up = u, um = u;
    up[0] += h;
    um[0] -= h;
    Mat D(2, 1);
    D.col(0) = (map_copy(up) - map_copy(um)) / (2 * h);
    return D;
  };
  Vec hint = std::move(outward_param_hint);
  piece.outward = [hint](const Vec&) { return hint; };
  piece.name = "curve";
  return piece;
}

MeasureEstimate boundary_integral_raw(const GraphSurface& S,
                                      const std::vector<BoundaryPiece>& pieces,
                                      const Region& region, const QuadratureSpec& spec,
                                      const std::function<double(const BoundaryPointData&)>& fn,
                                      bool with_chi) {
  MeasureEstimate total;
  for (const auto& piece : pieces) {
    const GraphPatch& p = S.patches.at(piece.patch_index);
    ClipFn clip = nullptr;
    if (region.ball) {
      auto ball = *region.ball;
      Vec inv_center = p.alg->inverse(ball.center);
      const StratifiedAlgebra* alg = p.alg;
      auto map = piece.map;
      const GraphPatch* pp = &p;
      clip = [ball, inv_center, alg, pp, map](const Vec& u) {
        return ball.norm->eval(alg->mul(inv_center, pp->embed(map(u)))) - ball.radius;
      };
    }
    auto f = [&](const Vec& u) { return fn(boundary_frame(S, piece, u, with_chi)); };
    total += integrate_adaptive(f, {piece.pbox}, spec, clip);
  }
  return total;
}

MeasureEstimate boundary_measure(const GraphSurface& S, const std::vector<BoundaryPiece>& pieces,
                                 const Region& region, const QuadratureSpec& spec,
                                 const BoundaryWeight& weight) {
  return boundary_integral_raw(
      S, pieces, region, spec,
      [&](const BoundaryPointData& b) {
        double density = b.surf.p_h_nu * b.p_hs_eta * b.riem_area;
        return weight ? weight(b) * density : density;
      },
      weight != nullptr);
}

}  // namespace carnot
