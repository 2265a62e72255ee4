#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "carnot/norms.hpp"
#include "carnot/quadrature.hpp"

namespace carnot {

// Height function of a graph patch over n-1 variables: either a polynomial
// in sparse exponent form (exact derivatives of all orders) or a smooth
// evaluator with gradient and optional Hessian.
class Height {
 public:
  using Term = std::pair<std::vector<int>, double>;  // exponents, coefficient

  static Height polynomial(int nvars, std::vector<Term> terms);
  static Height zero(int nvars) { return polynomial(nvars, {}); }
  static Height analytic(int nvars, std::function<double(const Vec&)> value,
                         std::function<Vec(const Vec&)> grad,
                         std::function<Mat(const Vec&)> hess = nullptr);

  int nvars() const { return nvars_; }
  bool is_polynomial() const { return poly_; }
  double value(const Vec& z) const;
  Vec grad(const Vec& z) const;
  Mat hess(const Vec& z) const;
  // Partial derivative for an arbitrary multi-index; exact for polynomials,
  // finite-difference stencils (step 1e-3) up to total order 3 otherwise.
  double derivative(const Vec& z, const std::vector<int>& multi) const;
  const std::vector<Term>& terms() const { return terms_; }

  // Composition with a per-variable input scaling and an output scaling.
  Height rescaled(const std::vector<double>& in_scale, double out_scale) const;

 private:
  int nvars_ = 0;
  bool poly_ = true;
  std::vector<Term> terms_;
  std::function<double(const Vec&)> value_;
  std::function<Vec(const Vec&)> grad_;
  std::function<Mat(const Vec&)> hess_;
};

// One hypersurface patch presented as a graph y_alpha = psi(zeta) over the
// coordinate hyperplane e_alpha^perp, with an axis-aligned parameter domain.
struct GraphPatch {
  const StratifiedAlgebra* alg = nullptr;
  int alpha = 0;              // graph coordinate, 0-based
  std::vector<Box> domain;    // boxes in R^{n-1}
  Height height = Height::zero(0);
  double orientation = 1.0;   // sign of the Euclidean normal (+ means +e_alpha)
  // Optional smooth restriction of the parameter domain: the patch is
  // {zeta in domain : param_clip(zeta) <= 0}. Lets patches live over disks.
  std::function<double(const Vec&)> param_clip;
  std::string name;

  int pdim() const { return alg->dim() - 1; }
  int ambient_index(int j) const { return j < alpha ? j : j + 1; }

  Vec embed(const Vec& zeta) const;
  Vec params_of(const Vec& ambient) const;
  bool on_patch(const Vec& ambient, double tol) const;
  // Columns t_j = e_{amb(j)} + dpsi_j e_alpha.
  Mat tangents(const Vec& zeta) const;
  // orientation * (e_alpha - sum_j dpsi_j e_{amb(j)}); |N| is the Euclidean
  // graph area element.
  Vec euclid_normal(const Vec& zeta) const;
  bool contains(const Vec& zeta, double pad = 0.0) const;

  GraphPatch dilated(double t) const;
};

// An (n-2)-dimensional boundary piece living on one patch of a surface.
struct BoundaryPiece {
  int patch_index = 0;
  Box pbox;  // parameter box of the piece, dim n-2
  std::function<Vec(const Vec&)> map;      // u -> zeta
  std::function<Mat(const Vec&)> dmap;     // (n-1) x (n-2) derivative
  std::function<Vec(const Vec&)> outward;  // outward direction in patch parameters
  std::string name;
};

// A hypersurface: a union of graph patches with disjoint interiors, plus its
// boundary pieces (empty when the surface is closed). Seams between patches
// are not boundary.
struct GraphSurface {
  std::string name;
  std::vector<GraphPatch> patches;
  std::vector<BoundaryPiece> boundary;
  bool closed = false;

  const StratifiedAlgebra& algebra() const { return *patches.at(0).alg; }
  GraphSurface dilated(double t) const;
};

// Restriction of an integral: optional per-patch parameter box and/or a
// homogeneous ball {rho(center^{-1} y) <= radius}.
struct Region {
  struct Ball {
    const HomogeneousNorm* norm;
    Vec center;
    double radius;
  };
  std::optional<Box> param_box;
  std::optional<Ball> ball;

  static Region all() { return {}; }
  static Region in_ball(const HomogeneousNorm& norm, Vec center, double radius) {
    Region r;
    r.ball = Ball{&norm, std::move(center), radius};
    return r;
  }
  static Region in_box(Box b) {
    Region r;
    r.param_box = std::move(b);
    return r;
  }
};

// Per-point geometry bundle along a patch.
struct SurfacePointData {
  const GraphPatch* patch = nullptr;  // owning patch (null for param patches)
  Vec zeta;      // parameters
  Vec point;     // ambient coordinates
  Mat A;         // left-invariant frame at point
  Vec N;         // unnormalized Euclidean normal (orientation applied)
  Vec c;         // A^T N: frame components of the conormal, unnormalized
  Vec nu;        // unit Riemannian normal, frame coordinates
  double p_h_nu = 0.0;        // |P_H nu| in [0, 1]
  bool characteristic = false;
  Vec nu_h;                   // unit horizontal normal (zeros when characteristic)
  Vec varpi;                  // vertical components nu_a / |P_H nu| (zeros when characteristic)
  double sigma_density = 0.0;           // d sigma_H / d H^{n-1}_euclid = |c_H|/|N|
  double area_weighted_density = 0.0;   // d sigma_H / d zeta = |c_H|
  double riem_weighted_density = 0.0;   // d sigma_R / d zeta = |c|

  double varpi_norm() const { return varpi.norm(); }
};

constexpr double kEpsChar = 1e-8;

SurfacePointData surface_frame(const GraphPatch& p, const Vec& zeta);
// Same bundle without the domain-membership check (the height evaluator
// extends smoothly past the patch edge; finite-difference stencils rely on
// this).
SurfacePointData surface_frame_unchecked(const GraphPatch& p, const Vec& zeta);

// Projections of a frame vector onto the layers H_iS of the tangent
// filtration at a point with unit normal nu (entry 0 is layer 2).
std::vector<Vec> hs_filtration_projections(const StratifiedAlgebra& alg, const Vec& nu,
                                           const Vec& v);

// Locate an ambient point on a surface: returns (patch index, parameters).
std::pair<int, Vec> locate_on_surface(const GraphSurface& S, const Vec& ambient,
                                      double tol = 1e-9);

// Integral of fn(data) d zeta over S within region (full control of the
// density; used for integrands like |H| varpi sigma that stay bounded only
// in product form).
MeasureEstimate surface_integral_raw(const GraphSurface& S, const Region& region,
                                     const QuadratureSpec& spec,
                                     const std::function<double(const SurfacePointData&)>& fn);

// sigma^{n-1}_H of S within region, optionally weighted by a per-point factor.
using SurfaceWeight = std::function<double(const SurfacePointData&)>;
MeasureEstimate h_perimeter(const GraphSurface& S, const Region& region,
                            const QuadratureSpec& spec, const SurfaceWeight& weight = nullptr);
// Riemannian area, same interface.
MeasureEstimate riemannian_area(const GraphSurface& S, const Region& region,
                                const QuadratureSpec& spec);

// Generic parametrized hypersurface patch (translated/flowed surfaces).
struct ParamPatch {
  const StratifiedAlgebra* alg = nullptr;
  std::vector<Box> domain;
  std::function<double(const Vec&)> param_clip;
  // Fill point (n) and tangents (n x (n-1)) at zeta.
  std::function<void(const Vec&, Vec&, Mat&)> eval;
};
MeasureEstimate h_perimeter_param(const ParamPatch& p, const Region& region,
                                  const QuadratureSpec& spec);
// Left translation g * S and right flow y -> y * exp(eps w) of a patch.
ParamPatch left_translated(const GraphPatch& p, const Vec& g);
ParamPatch right_flowed(const GraphPatch& p, const Vec& w, double eps);

// Horizontal mean curvature at a non-characteristic point: trace of the
// horizontal divergence of the nu_H field, extended constantly along the
// graph direction. Positive for a cylinder with outward horizontal normal.
double horizontal_mean_curvature(const GraphPatch& p, const Vec& zeta);

struct ChNuData {
  Vec vec;                 // C_H nu_H in frame coordinates (horizontal)
  double magnitude = 0.0;  // |C_H nu_H|
  double bound_constant = 0.0;  // C = sum_a ||C^a_H||, so |C_H nu_H| <= C |varpi|
};
ChNuData ch_nu(const SurfacePointData& d, const StratifiedAlgebra& alg);
ChNuData ch_nu(const GraphPatch& p, const Vec& zeta);
double ch_bound_constant(const StratifiedAlgebra& alg);

struct FlaggedCell {
  int patch = 0;
  Box cell;
  double min_ratio = 0.0;
};
// Parameter cells that may meet the characteristic locus: a sampled superset
// with range-based padding.
std::vector<FlaggedCell> characteristic_locus(const GraphSurface& S, int resolution);

// ---- boundary data ----------------------------------------------------------

struct BoundaryPointData {
  SurfacePointData surf;
  Vec eta;            // unit normal of the boundary inside TS, frame coords
  Vec eta_hs;         // P_HS eta (not normalized)
  double p_hs_eta = 0.0;  // |P_HS eta|
  double riem_area = 0.0; // d sigma^{n-2}_R / d u
  // P_{H_i S} eta for i = 2..k (entry 0 is layer 2). chi_{H_i S} equals this
  // divided by |P_HS eta| where the latter is nonzero.
  std::vector<Vec> chi_layers;

  double chi_layer_norm(int layer) const {
    return chi_layers.at(static_cast<size_t>(layer) - 2).norm() / p_hs_eta;
  }
};

BoundaryPointData boundary_frame(const GraphSurface& S, const BoundaryPiece& piece, const Vec& u,
                                 bool with_chi = true);

// Boundary pieces tracing the facets of every patch domain box.
std::vector<BoundaryPiece> box_boundary(const GraphSurface& S);
// A 1-parameter boundary curve given in ambient coordinates (n = 3 only);
// throws GeometryError when the curve leaves the surface by more than tol.
BoundaryPiece curve_on_surface(const GraphSurface& S, int patch_index,
                               std::function<Vec(double)> ambient_curve, double u0, double u1,
                               Vec outward_param_hint, double tol = 1e-9);

// Integral of fn(data) d u over boundary pieces within region.
MeasureEstimate boundary_integral_raw(const GraphSurface& S,
                                      const std::vector<BoundaryPiece>& pieces,
                                      const Region& region, const QuadratureSpec& spec,
                                      const std::function<double(const BoundaryPointData&)>& fn,
                                      bool with_chi = true);

using BoundaryWeight = std::function<double(const BoundaryPointData&)>;
// Integral of weight against sigma^{n-2}_H (default weight 1).
MeasureEstimate boundary_measure(const GraphSurface& S, const std::vector<BoundaryPiece>& pieces,
                                 const Region& region, const QuadratureSpec& spec,
                                 const BoundaryWeight& weight = nullptr);

}  // namespace carnot
