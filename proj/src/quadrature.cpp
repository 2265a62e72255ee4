#include "carnot/quadrature.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>

namespace carnot {

namespace {

struct GaussRule {
  std::vector<double> nodes, weights;
};

// Newton iteration on Legendre polynomials; standard and deterministic.
GaussRule compute_gauss(int order) {
  GaussRule r;
  r.nodes.resize(order);
  r.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = order * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= order; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = order * (x * p1 - p0) / (x * x - 1.0);
    r.nodes[i] = x;
    r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

const GaussRule& rule(int order) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, compute_gauss(order)).first;
  return it->second;
}

enum class CellStatus { Inside, Outside, Cut };

class Integrator {
 public:
  Integrator(const Integrand& f, const QuadratureSpec& spec, const ClipFn& clip,
             const CellClassifier& classifier)
      : f_(f), spec_(spec), clip_(clip), classifier_(classifier) {}

  MeasureEstimate run(const std::vector<Box>& boxes) {
    // First pass: coarse scale estimate used for the per-cell tolerance.
    double scale = 0.0;
    for (const auto& b : boxes) scale += std::abs(gl(b));
    scale_ = std::max(scale, 1e-30);
    double total_vol = 0.0;
    for (const auto& b : boxes) total_vol += b.volume();
    vol_ = std::max(total_vol, 1e-300);

    MeasureEstimate est;
    for (const auto& b : boxes) est += recurse(b, 0);
    est.converged = est.error <= spec_.rel_tol * std::max(std::abs(est.value), scale_ * 1e-3) +
                                 1e-14 * scale_;
    if (!est.converged)
      est.warning = "quadrature tolerance not reached at max_depth " +
                    std::to_string(spec_.max_depth);
    return est;
  }

 private:
  double gl(const Box& b) const {
    const int d = b.dim();
    const auto& R = rule(spec_.base_order);
    const int m = spec_.base_order;
    double sum = 0.0;
    std::vector<int> idx(d, 0);
    Vec z(d);
    while (true) {
      double w = 1.0;
      for (int i = 0; i < d; ++i) {
        double half = 0.5 * (b.hi[i] - b.lo[i]);
        z[i] = b.lo[i] + half * (1.0 + R.nodes[idx[i]]);
        w *= half * R.weights[idx[i]];
      }
      sum += w * f_(z);
      int i = 0;
      for (; i < d; ++i) {
        if (++idx[i] < m) break;
        idx[i] = 0;
      }
      if (i == d) break;
    }
    return sum;
  }

  CellStatus classify(const Box& b) const {
    if (!clip_) return CellStatus::Inside;
    if (classifier_) {
      int v = classifier_(b);
      if (v < 0) return CellStatus::Outside;
      if (v > 0) return CellStatus::Inside;
      return CellStatus::Cut;
    }
    const int d = b.dim();
    bool any_in = false, any_out = false;
    // Corners plus center plus face midpoints (3^d grid).
    std::vector<int> idx(d, 0);
    Vec z(d);
    while (true) {
      for (int i = 0; i < d; ++i)
        z[i] = b.lo[i] + 0.5 * idx[i] * (b.hi[i] - b.lo[i]);
      (clip_(z) <= 0.0 ? any_in : any_out) = true;
      if (any_in && any_out) return CellStatus::Cut;
      int i = 0;
      for (; i < d; ++i) {
        if (++idx[i] < 3) break;
        idx[i] = 0;
      }
      if (i == d) break;
    }
    return any_in ? CellStatus::Inside : CellStatus::Outside;
  }

  MeasureEstimate recurse(const Box& b, int depth) {
    // Without a certified classifier, sampled classification can miss a small
    // region entirely; the first two levels then always subdivide.
    CellStatus st =
        clip_ && !classifier_ && depth < 2 ? CellStatus::Cut : classify(b);
    if (st == CellStatus::Outside) return {};
    if (st == CellStatus::Cut) {
      if (depth >= spec_.max_depth) return cut_cell(b);
      MeasureEstimate est;
      for (const auto& c : Box::split(b)) est += recurse(c, depth + 1);
      return est;
    }
    // Smooth cell: compare one level of refinement. Narrow features can slip
    // between the nodes of both levels, so convergence is only trusted from
    // depth 2 onward.
    double coarse = gl(b);
    double fine = 0.0;
    auto children = Box::split(b);
    for (const auto& c : children) fine += gl(c);
    double err = std::abs(coarse - fine);
    double tol = spec_.rel_tol * scale_ * (b.volume() / vol_);
    if ((err <= tol && depth >= 2) || depth >= spec_.max_depth) {
      MeasureEstimate est;
      est.value = fine;
      est.error = err;
      return est;
    }
    MeasureEstimate est;
    for (const auto& c : children) est += recurse(c, depth + 1);
    return est;
  }

  MeasureEstimate cut_cell(const Box& b) const {
    if (b.dim() == 2) return cut_cell_polygon(b);
    if (b.dim() == 1) return cut_cell_interval(b);
    // Centroid indicator fallback for other dimensions.
    MeasureEstimate est;
    Vec c = b.center();
    if (clip_(c) <= 0.0) est.value = gl(b);
    est.error = std::abs(f_(c)) * b.volume() * 0.5;
    return est;
  }

  MeasureEstimate cut_cell_interval(const Box& b) const {
    Vec a = b.lo, c = b.hi;
    double ga = clip_(a), gc = clip_(c);
    MeasureEstimate est;
    if ((ga <= 0.0) == (gc <= 0.0)) {
      // Boundary dips in and out within the cell; keep the centroid rule.
      if (clip_(b.center()) <= 0.0) est.value = gl(b);
      est.error = std::abs(f_(b.center())) * b.volume() * 0.5;
      return est;
    }
    Vec x = edge_crossing(a, c, ga);
    Box inside = b;
    if (ga <= 0.0)
      inside.hi[0] = x[0];
    else
      inside.lo[0] = x[0];
    est.value = gl(inside);
    est.error = 1e-10 * std::abs(est.value) + 1e-16;
    return est;
  }

  // Secant clipping of a 2D cell: corners classified, edge crossings located
  // by bisection, inside region integrated as a fan of triangles.
  MeasureEstimate cut_cell_polygon(const Box& b) const {
    std::array<Vec, 4> corner;
    corner[0] = b.lo;
    corner[1] = pt(b.hi[0], b.lo[1]);
    corner[2] = b.hi;
    corner[3] = pt(b.lo[0], b.hi[1]);
    std::array<double, 4> g;
    for (int i = 0; i < 4; ++i) g[i] = clip_(corner[i]);

    std::vector<Vec> poly;
    for (int i = 0; i < 4; ++i) {
      int j = (i + 1) % 4;
      if (g[i] <= 0.0) poly.push_back(corner[i]);
      if ((g[i] <= 0.0) != (g[j] <= 0.0)) poly.push_back(edge_crossing(corner[i], corner[j], g[i]));
    }
    MeasureEstimate est;
    if (poly.size() < 3) {
      est.error = std::abs(f_(b.center())) * b.volume() * 0.25;
      return est;
    }
    double val = 0.0;
    for (size_t i = 1; i + 1 < poly.size(); ++i) {
      const Vec& a = poly[0];
      const Vec& p = poly[i];
      const Vec& q = poly[i + 1];
      double area = 0.5 * std::abs((p[0] - a[0]) * (q[1] - a[1]) - (q[0] - a[0]) * (p[1] - a[1]));
      Vec centroid = (a + p + q) / 3.0;
      val += area * f_(centroid);
    }
    est.value = val;
    est.error = std::abs(f_(b.center())) * b.volume() * (b.max_side() / std::sqrt(vol_)) +
                1e-16 * std::abs(val);
    return est;
  }

  static Vec pt(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
  }

  Vec edge_crossing(const Vec& a, const Vec& c, double ga) const {
    double lo = 0.0, hi = 1.0;
    bool lo_inside = ga <= 0.0;
    for (int it = 0; it < 40; ++it) {
      double mid = 0.5 * (lo + hi);
      Vec z = a + mid * (c - a);
      bool in = clip_(z) <= 0.0;
      if (in == lo_inside)
        lo = mid;
      else
        hi = mid;
    }
    double t = 0.5 * (lo + hi);
    return a + t * (c - a);
  }

  const Integrand& f_;
  QuadratureSpec spec_;
  const ClipFn& clip_;
  const CellClassifier& classifier_;
  double scale_ = 1.0;
  double vol_ = 1.0;
};

}  // namespace

std::vector<Box> Box::split(const Box& b) {
  const int d = b.dim();
  Vec mid = b.center();
  std::vector<Box> out;
  out.reserve(static_cast<size_t>(1) << d);
  for (int mask = 0; mask < (1 << d); ++mask) {
    Box c;
    c.lo = b.lo;
    c.hi = b.hi;
    for (int i = 0; i < d; ++i) {
      if (mask & (1 << i))
        c.lo[i] = mid[i];
      else
        c.hi[i] = mid[i];
    }
    out.push_back(std::move(c));
  }
  return out;
}

bool Box::intersect(const Box& a, const Box& b, Box& out) {
  out.lo = a.lo.cwiseMax(b.lo);
  out.hi = a.hi.cwiseMin(b.hi);
  for (int i = 0; i < a.dim(); ++i)
    if (out.lo[i] >= out.hi[i]) return false;
  return true;
}

MeasureEstimate integrate_adaptive(const Integrand& f, const std::vector<Box>& boxes,
                                   const QuadratureSpec& spec, const ClipFn& clip,
                                   const CellClassifier& classifier) {
  Integrator integrator(f, spec, clip, classifier);
  return integrator.run(boxes);
}

const std::vector<double>& gauss_nodes(int order) { return rule(order).nodes; }
const std::vector<double>& gauss_weights(int order) { return rule(order).weights; }

}  // namespace carnot
