#include "carnot/presets.hpp"

#include <cmath>
#include <numeric>

#include "json.hpp"

namespace carnot {

namespace {

Box box2(double x0, double x1, double y0, double y1) {
  Box b;
  b.lo = Vec(2);
  b.hi = Vec(2);
  b.lo << x0, y0;
  b.hi << x1, y1;
  return b;
}

void require_h1(const StratifiedAlgebra& alg, const std::string& preset) {
  if (alg.dim() != 3 || alg.step() != 2)
    throw ConfigError("surface preset '" + preset + "' needs the first Heisenberg group");
}

std::vector<BoundaryPiece> facets(const GraphSurface& S) { return box_boundary(S); }

// Lateral cylinder patches {|x_H| = R}, |t| <= half_height, four graphs with
// slope at most 1.
std::vector<GraphPatch> cylinder_patches(const StratifiedAlgebra& alg, double R,
                                         double half_height) {
  const double s = R / std::sqrt(2.0);
  auto arc = [R](double sign) {
    return Height::analytic(
        2,
        [R, sign](const Vec& z) { return sign * std::sqrt(R * R - z[0] * z[0]); },
        [R, sign](const Vec& z) {
          double f = std::sqrt(R * R - z[0] * z[0]);
          Vec g(2);
          g << -sign * z[0] / f, 0.0;
          return g;
        },
        [R, sign](const Vec& z) {
          double f = std::sqrt(R * R - z[0] * z[0]);
          Mat H = Mat::Zero(2, 2);
          H(0, 0) = -sign * R * R / (f * f * f);
          return H;
        });
  };
  std::vector<GraphPatch> out;
  for (int axis = 0; axis < 2; ++axis)
    for (int side = 0; side < 2; ++side) {
      GraphPatch p;
      p.alg = &alg;
      p.alpha = axis;
      double sign = side == 0 ? 1.0 : -1.0;
      p.height = arc(sign);
      p.domain = {box2(-s, s, -half_height, half_height)};
      p.orientation = sign;  // outward horizontal normal
      p.name = std::string("cyl-") + (axis == 0 ? "x1" : "x2") + (side == 0 ? "+" : "-");
      out.push_back(std::move(p));
    }
  return out;
}

std::vector<BoundaryPiece> cylinder_rims(const GraphSurface& S) {
  std::vector<BoundaryPiece> pieces;
  for (const auto& piece : box_boundary(S)) {
    // Keep the t-facets (true rims); the x-facets are seams between patches.
    if (piece.name.find(":lo1") != std::string::npos ||
        piece.name.find(":hi1") != std::string::npos)
      pieces.push_back(piece);
  }
  return pieces;
}

GraphPatch korany_cap(const StratifiedAlgebra& alg, double sign) {
  // Cap of the Korany sphere of radius 2^{1/2}: t = sign/4 sqrt(4 - r^4),
  // meeting the unit cylinder at |t| = sqrt(3)/4.
  GraphPatch p;
  p.alg = &alg;
  p.alpha = 2;
  p.orientation = sign;
  p.domain = {box2(-1, 1, -1, 1)};
  p.param_clip = [](const Vec& z) { return z.norm() - 1.0; };
  p.height = Height::analytic(
      2,
      [sign](const Vec& z) {
        double r2 = z.squaredNorm();
        return 0.25 * sign * std::sqrt(4.0 - r2 * r2);
      },
      [sign](const Vec& z) {
        double r2 = z.squaredNorm();
        double f = std::sqrt(4.0 - r2 * r2);
        return Vec(-sign * r2 / (2.0 * f) * z);
      },
      [sign](const Vec& z) {
        double r2 = z.squaredNorm();
        double f = std::sqrt(4.0 - r2 * r2);
        Mat H(2, 2);
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            double t = 2.0 * z[a] * z[b] + (a == b ? r2 : 0.0);
            H(a, b) = -sign * 0.5 * (t / f + r2 * z[a] * 2.0 * r2 * z[b] / (f * f * f));
          }
        return H;
      });
  p.name = sign > 0 ? "cap-top" : "cap-bottom";
  return p;
}

}  // namespace

StratifiedAlgebra make_group(const std::string& spec) {
  if (spec == "h1") return StratifiedAlgebra::heisenberg(1);
  if (spec == "h2") return StratifiedAlgebra::heisenberg(2);
  if (spec == "h3") return StratifiedAlgebra::heisenberg(3);
  if (spec == "engel") return StratifiedAlgebra::engel();
  if (spec.find('/') != std::string::npos || spec.find(".json") != std::string::npos)
    return StratifiedAlgebra::from_file(spec);
  throw ConfigError("unknown group preset '" + spec + "' (try h1, h2, h3, engel, or a file path)");
}

HomogeneousNorm make_norm(const StratifiedAlgebra& alg, const std::string& kind, int lambda) {
  if (kind == "korany") return HomogeneousNorm::korany(alg);
  if (kind == "power-lambda" || kind == "lambda") {
    if (lambda == 0) {
      // Smallest exponent divisible by every layer (lcm of 1..k).
      lambda = 1;
      for (int i = 2; i <= alg.step(); ++i) lambda = std::lcm(lambda, i);
      if (alg.step() >= 2) lambda *= 2;  // keep the profile even in |x_H|
    }
    return HomogeneousNorm::power_lambda(alg, lambda);
  }
  throw ConfigError("unknown norm kind '" + kind + "' (korany or power-lambda)");
}

bool is_surface_preset(const std::string& name) {
  static const char* names[] = {"h1-vertical-plane", "h1-t0-plane",    "h1-disk",
                                "h1-cylinder",       "h1-paraboloid",  "h1-capped-cylinder",
                                "engel-vertical-plane"};
  for (const char* n : names)
    if (name == n) return true;
  return false;
}

GraphSurface make_surface(const StratifiedAlgebra& alg, const std::string& preset, double radius) {
  GraphSurface S;
  S.name = preset;
  if (preset == "h1-vertical-plane") {
    require_h1(alg, preset);
    GraphPatch p;
    p.alg = &alg;
    p.alpha = 0;
    p.height = Height::zero(2);
    p.domain = {box2(-1, 1, -1, 1)};
    p.orientation = 1.0;
    p.name = preset;
    S.patches = {p};
    S.boundary = facets(S);
    return S;
  }
  if (preset == "h1-t0-plane") {
    require_h1(alg, preset);
    GraphPatch p;
    p.alg = &alg;
    p.alpha = 2;
    p.height = Height::zero(2);
    p.domain = {box2(-1.2, 1.2, -1.2, 1.2)};
    p.orientation = 1.0;
    p.name = preset;
    S.patches = {p};
    S.boundary = facets(S);
    return S;
  }
  if (preset == "h1-disk") {
    require_h1(alg, preset);
    const double R = radius;
    GraphPatch p;
    p.alg = &alg;
    p.alpha = 2;
    p.height = Height::zero(2);
    p.domain = {box2(-R, R, -R, R)};
    p.param_clip = [R](const Vec& z) { return z.norm() - R; };
    p.orientation = 1.0;
    p.name = preset;
    S.patches = {p};
    BoundaryPiece rim;
    rim.patch_index = 0;
    rim.pbox.lo = Vec::Constant(1, 0.0);
    rim.pbox.hi = Vec::Constant(1, 2.0 * M_PI);
    rim.map = [R](const Vec& u) {
      Vec z(2);
      z << R * std::cos(u[0]), R * std::sin(u[0]);
      return z;
    };
    rim.dmap = [R](const Vec& u) {
      Mat D(2, 1);
      D << -R * std::sin(u[0]), R * std::cos(u[0]);
      return D;
    };
    rim.outward = [](const Vec& u) {
      Vec o(2);
      o << std::cos(u[0]), std::sin(u[0]);
      return o;
    };
    rim.name = "disk-rim";
    S.boundary = {rim};
    return S;
  }
  if (preset == "h1-cylinder") {
    require_h1(alg, preset);
    S.patches = cylinder_patches(alg, radius, 0.5);
    S.boundary = cylinder_rims(S);
    return S;
  }
  if (preset == "h1-paraboloid") {
    require_h1(alg, preset);
    GraphPatch p;
    p.alg = &alg;
    p.alpha = 2;
    p.height = Height::polynomial(2, {{{2, 0}, 1.0}, {{0, 2}, 1.0}});
    p.domain = {box2(-0.8, 0.8, -0.8, 0.8)};
    p.orientation = 1.0;
    p.name = preset;
    S.patches = {p};
    S.boundary = facets(S);
    return S;
  }
  if (preset == "h1-capped-cylinder") {
    require_h1(alg, preset);
    const double T = std::sqrt(3.0) / 4.0;
    S.patches = cylinder_patches(alg, 1.0, T);
    S.patches.push_back(korany_cap(alg, +1.0));
    S.patches.push_back(korany_cap(alg, -1.0));
    S.closed = true;
    return S;
  }
  if (preset == "engel-vertical-plane") {
    if (alg.dim() != 4 || alg.step() != 3)
      throw ConfigError("surface preset 'engel-vertical-plane' needs the Engel group");
    GraphPatch p;
    p.alg = &alg;
    p.alpha = 0;
    p.height = Height::zero(3);
    Box b;
    b.lo = Vec::Constant(3, -1.0);
    b.hi = Vec::Constant(3, 1.0);
    p.domain = {b};
    p.orientation = 1.0;
    p.name = preset;
    S.patches = {p};
    S.boundary = facets(S);
    return S;
  }
  throw ConfigError("unknown surface preset '" + preset + "'");
}

GraphSurface surface_from_json_text(const StratifiedAlgebra& alg, const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("surface config: invalid JSON: " + std::string(e.what()));
  }
  GraphPatch p;
  p.alg = &alg;
  if (!j.contains("alpha")) throw ConfigError("surface config: missing 'alpha'");
  p.alpha = j["alpha"].get<int>() - 1;
  if (p.alpha < 0 || p.alpha >= alg.dim())
    throw ConfigError("surface config: alpha out of range");
  p.orientation = j.value("orientation", 1.0);
  const int d = alg.dim() - 1;
  auto parse_box = [&](const nlohmann::json& jb) {
    if (!jb.is_array() || jb.size() != 2) throw ConfigError("surface config: box must be [lo, hi]");
    Box b;
    b.lo = Vec(d);
    b.hi = Vec(d);
    for (int i = 0; i < d; ++i) {
      b.lo[i] = jb[0].at(i).get<double>();
      b.hi[i] = jb[1].at(i).get<double>();
      if (!(b.lo[i] < b.hi[i])) throw ConfigError("surface config: box lo must be < hi");
    }
    return b;
  };
  if (!j.contains("domain")) throw ConfigError("surface config: missing 'domain'");
  if (j["domain"].size() == 2 && j["domain"][0].is_array() && j["domain"][0].size() &&
      j["domain"][0][0].is_number()) {
    p.domain = {parse_box(j["domain"])};
  } else {
    for (const auto& jb : j["domain"]) p.domain.push_back(parse_box(jb));
  }
  std::vector<Height::Term> terms;
  if (j.contains("height")) {
    for (const auto& jt : j["height"]) {
      if (!jt.is_array() || jt.size() != 2)
        throw ConfigError("surface config: height terms are [[exponents], coeff]");
      std::vector<int> e = jt[0].get<std::vector<int>>();
      if (static_cast<int>(e.size()) != d)
        throw ConfigError("surface config: exponent tuple arity mismatch");
      terms.push_back({e, jt[1].get<double>()});
    }
  }
  p.height = Height::polynomial(d, std::move(terms));
  p.name = j.value("name", "custom");
  GraphSurface S;
  S.name = p.name;
  S.patches = {p};
  S.boundary = facets(S);
  return S;
}

}  // namespace carnot
