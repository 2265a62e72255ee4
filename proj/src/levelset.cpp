#include "carnot/levelset.hpp"

#include <cmath>

namespace carnot {

namespace {

Vec lerp(const Vec& a, const Vec& b, double t) { return a + t * (b - a); }

// One Newton refinement of the crossing of f - level along [a, b], starting
// from the secant estimate.
double refine_crossing(const std::function<double(const Vec&)>& f, const Vec& a, const Vec& b,
                       double fa, double fb, double level) {
  double t = fa / (fa - fb);
  const double h = 1e-4;
  double g = f(lerp(a, b, t)) - level;
  double gp = (f(lerp(a, b, std::min(t + h, 1.0))) - f(lerp(a, b, std::max(t - h, 0.0)))) /
              (std::min(t + h, 1.0) - std::max(t - h, 0.0));
  if (std::abs(gp) > 1e-14) t -= g / gp;
  return std::clamp(t, 0.0, 1.0);
}

}  // namespace

std::vector<LevelSegment> extract_level_segments(const std::function<double(const Vec&)>& f,
                                                 const std::vector<Box>& boxes, double level,
                                                 int grid,
                                                 const std::function<double(const Vec&)>& clip) {
  std::vector<LevelSegment> segments;
  for (const auto& box : boxes) {
    if (box.dim() != 2) throw CapabilityError("level extraction expects a 2D parameter domain");
    const int G = grid;
    std::vector<double> vals(static_cast<size_t>(G + 1) * (G + 1));
    auto node = [&](int i, int j) {
      Vec z(2);
      z << box.lo[0] + (box.hi[0] - box.lo[0]) * i / G, box.lo[1] + (box.hi[1] - box.lo[1]) * j / G;
      return z;
    };
    for (int i = 0; i <= G; ++i)
      for (int j = 0; j <= G; ++j) vals[i * (G + 1) + j] = f(node(i, j));

    for (int i = 0; i < G; ++i)
      for (int j = 0; j < G; ++j) {
        Vec c00 = node(i, j), c10 = node(i + 1, j), c11 = node(i + 1, j + 1), c01 = node(i, j + 1);
        double v00 = vals[i * (G + 1) + j] - level;
        double v10 = vals[(i + 1) * (G + 1) + j] - level;
        double v11 = vals[(i + 1) * (G + 1) + j + 1] - level;
        double v01 = vals[i * (G + 1) + j + 1] - level;
        int inside = (v00 <= 0) + (v10 <= 0) + (v11 <= 0) + (v01 <= 0);
        if (inside == 0 || inside == 4) continue;
        if (clip) {
          double mn = std::min({clip(c00), clip(c10), clip(c11), clip(c01)});
          if (mn > 0.0) continue;
        }
        // Crossing points along the cell edges in cyclic order.
        struct Crossing {
          Vec point;
          int edge;
        };
        std::vector<Crossing> cross;
        const Vec* corner[4] = {&c00, &c10, &c11, &c01};
        double val[4] = {v00, v10, v11, v01};
        for (int e = 0; e < 4; ++e) {
          int e2 = (e + 1) % 4;
          if ((val[e] <= 0) != (val[e2] <= 0)) {
            double t = refine_crossing(f, *corner[e], *corner[e2], val[e], val[e2], level);
            cross.push_back({lerp(*corner[e], *corner[e2], t), e});
          }
        }
        if (cross.size() == 2) {
          segments.push_back({cross[0].point, cross[1].point});
        } else if (cross.size() == 4) {
          // Saddle cell: pair crossings using the sign at the center.
          Vec center = 0.25 * (c00 + c10 + c11 + c01);
          bool center_in = f(center) - level <= 0;
          bool v00_in = v00 <= 0;
          if (center_in == v00_in) {
            segments.push_back({cross[0].point, cross[3].point});
            segments.push_back({cross[1].point, cross[2].point});
          } else {
            segments.push_back({cross[0].point, cross[1].point});
            segments.push_back({cross[2].point, cross[3].point});
          }
        }
      }
  }
  return segments;
}

LevelPointData level_point_data(const GraphPatch& p, const Vec& zeta,
                                const std::function<double(const Vec&)>& ambient_fn) {
  const StratifiedAlgebra& alg = *p.alg;
  const int n = alg.dim();
  LevelPointData out;
  out.surf = surface_frame_unchecked(p, zeta);
  const double step = 1e-5 * std::max(1.0, out.surf.point.norm());
  auto extended = [&](const Vec& y) { return ambient_fn(p.embed(p.params_of(y))); };
  out.grad_full = Vec(n);
  for (int I = 0; I < n; ++I) {
    Vec dir = out.surf.A.col(I);
    out.grad_full[I] =
        (extended(out.surf.point + step * dir) - extended(out.surf.point - step * dir)) /
        (2.0 * step);
  }
  out.grad_ts = out.grad_full - out.grad_full.dot(out.surf.nu) * out.surf.nu;
  Vec gh = Vec::Zero(n);
  gh.head(alg.h()) = out.grad_full.head(alg.h());
  if (!out.surf.characteristic) gh -= gh.dot(out.surf.nu_h) * out.surf.nu_h;
  out.grad_hs = gh;
  double nts = out.grad_ts.norm();
  out.p_hs_eta = nts > 1e-13 ? out.grad_hs.norm() / nts : 0.0;
  return out;
}

double level_measure(const GraphPatch& p, const std::function<double(const Vec&)>& ambient_fn,
                     double level, int grid) {
  auto f_param = [&](const Vec& z) { return ambient_fn(p.embed(z)); };
  auto segments = extract_level_segments(f_param, p.domain, level, grid, p.param_clip);
  // Two-point Gauss rule along each segment.
  static const double gl_nodes[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
  double total = 0.0;
  for (const auto& seg : segments) {
    Vec d = seg.b - seg.a;
    for (double tau : gl_nodes) {
      Vec z = seg.a + tau * d;
      if (p.param_clip && p.param_clip(z) > 0.0) continue;
      LevelPointData lp = level_point_data(p, z, ambient_fn);
      Vec chord = p.tangents(z) * d;  // coordinate velocity along the segment
      double speed = lp.surf.A.triangularView<Eigen::Lower>().solve(chord).norm();
      total += 0.5 * lp.surf.p_h_nu * lp.p_hs_eta * speed;
    }
  }
  return total;
}

}  // namespace carnot
