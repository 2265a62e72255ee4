#pragma once

#include "carnot/blowup.hpp"
#include "carnot/levelset.hpp"
#include "carnot/report.hpp"

namespace carnot {

// Generator of the Carnot homothety centered at x (the variational field of
// t -> x * delta_t(x^{-1} y) at t = 1).
struct DilationGenerator {
  const StratifiedAlgebra* alg = nullptr;
  Vec center;

  DilationGenerator(const StratifiedAlgebra& a, Vec x) : alg(&a), center(std::move(x)) {}
  Vec coordinate_field(const Vec& y) const { return alg->dilation_generator(center, y); }
  Vec frame_field(const Vec& y) const {
    return alg->frame_coords(y, alg->dilation_generator(center, y));
  }
};

// Scalar test function given by an ambient evaluator; the lab restricts it to
// the surface and extends it constantly along the graph direction.
struct SurfaceScalar {
  std::string name;
  std::function<double(const Vec&)> value;
};

SurfaceScalar coordinate_scalar(int ambient_index);
SurfaceScalar constant_scalar(double c);
// C^1 radial bump ((1 - (d/r)^2)_+)^2 of the homogeneous distance from a
// center point.
SurfaceScalar radial_bump(const HomogeneousNorm& rho, Vec center, double radius);
// Bump in a single coordinate: ((1 - (y_i/r)^2)_+)^2.
SurfaceScalar coordinate_bump(int ambient_index, double halfwidth);

// Horizontal vector field along a surface, in frame components.
struct HorizontalField {
  std::string name;
  std::function<Vec(const SurfacePointData&)> frame_value;
};

HorizontalField horizontal_position_field(const StratifiedAlgebra& alg);  // x_H
// bump(x) X_dir with a radial bump factor.
HorizontalField bump_frame_field(const HomogeneousNorm& rho, int dir, Vec center, double radius);

// Shared read-only constants for a (group, norm) pair.
struct LabContext {
  const StratifiedAlgebra* alg = nullptr;
  const HomogeneousNorm* norm = nullptr;
  LayerConstants lc;
  MetricFactorBounds mf;

  static LabContext make(const StratifiedAlgebra& alg, const HomogeneousNorm& norm,
                         int samples = 32768) {
    LabContext ctx;
    ctx.alg = &alg;
    ctx.norm = &norm;
    ctx.lc = norm.layer_constants(samples);
    ctx.mf = norm.metric_factor_bounds(samples);
    return ctx;
  }
  double layer_c(int layer) const { return ctx_layer(lc, layer); }

 private:
  static double ctx_layer(const LayerConstants& lc, int layer) { return lc.for_layer(layer); }
};

// ---- derivative helpers (exposed for tests) --------------------------------

// HS-gradient of the ambient function at a surface point, frame coordinates.
Vec grad_hs_at(const GraphPatch& p, const SurfacePointData& d,
               const std::function<double(const Vec&)>& fn);
// Trace of Y -> nabla^{HS}_Y X over an orthonormal basis of HS.
double div_hs_at(const GraphPatch& p, const SurfacePointData& d,
                 const std::function<Vec(const SurfacePointData&)>& X);

// ---- checks -----------------------------------------------------------------

// Coarea identity: int |grad_HS phi| sigma = int sigma^{n-2}{phi^{-1}[s]} ds.
InequalityReport coarea_check(const LabContext& ctx, const GraphSurface& S,
                              const SurfaceScalar& phi, const QuadratureSpec& spec,
                              int grid = 192);

// Divergence-theorem residual (horizontal integration by parts) and the
// 1st-variation residual under the flow y -> y * exp(eps W).
struct VariationPair {
  InequalityReport divergence;
  InequalityReport first_variation;
};
VariationPair variation_divergence_check(const LabContext& ctx, const GraphSurface& S,
                                         const HorizontalField& X, const Vec& w_frame,
                                         const QuadratureSpec& spec);

// Integral Minkowsky-type identity (the divergence check at X = x_H).
InequalityReport minkowsky_check(const LabContext& ctx, const GraphSurface& S,
                                 const QuadratureSpec& spec);

// (h-1) sigma(S) <= R { int (|H| + |C_H nu_H|) sigma + sigma^{n-2}(dS) }.
InequalityReport linear_isoperimetric_check(const LabContext& ctx, const GraphSurface& S,
                                            const QuadratureSpec& spec);

struct MonotonicityResult {
  std::vector<InequalityReport> strong;  // Q-1 exponent
  std::vector<InequalityReport> weak;    // h-1 exponent
  ScanTable table;
  std::vector<std::string> warnings;
};
MonotonicityResult monotonicity_scan(const LabContext& ctx, const GraphSurface& S, int patch,
                                     const Vec& zeta, const std::vector<double>& t_grid,
                                     const QuadratureSpec& spec);

// Full isoperimetric inequality with C_I = 2^{Q(Q-1)/(Q-2)} k1^{1/(2-Q)}.
InequalityReport isoperimetric_report(const LabContext& ctx, const GraphSurface& S,
                                      const QuadratureSpec& spec);

// Local Poincare inequality on S cap B(x, R) with C_p = 2p/(2h-3).
InequalityReport poincare_check(const LabContext& ctx, const GraphSurface& S, int patch,
                                const Vec& zeta, double R, double p_exp,
                                const SurfaceScalar& psi, const QuadratureSpec& spec);

struct RayleighResult {
  double geometric = std::numeric_limits<double>::infinity();
  double analytic = std::numeric_limits<double>::infinity();
  double lambda1_lower = 0.0;
  std::vector<std::pair<double, double>> cutoff;  // (eps, Rayleigh quotient)
  double cross_gap = 0.0;  // analytic - geometric (both upper bounds; sign free)
  ScanTable table;
  std::vector<std::string> warnings;
};
// Geometric split quotients, Rayleigh quotients of test functions, and the
// eps-cutoff family along the split locus.
RayleighResult rayleigh_isop_estimate(const LabContext& ctx, const GraphSurface& S,
                                      const std::vector<std::pair<int, double>>& splits,
                                      const std::vector<SurfaceScalar>& test_functions,
                                      const std::vector<double>& eps_list,
                                      const QuadratureSpec& spec);

struct AsymptoticResult {
  std::vector<InequalityReport> reports;
  ScanTable table;
  double kappa = 0.0;
  double h0 = 0.0;
};
// sigma(S_t) >= kappa t^{Q-1} exp(-t H0 (1 + c t)) on the grid.
AsymptoticResult asymptotic_check(const LabContext& ctx, const GraphSurface& S, int patch,
                                  const Vec& zeta, const std::vector<double>& t_grid,
                                  const QuadratureSpec& spec);

// Sobolev inequality on a closed surface; full_form adds the higher-layer
// gradient terms of the general statement.
InequalityReport sobolev_check(const LabContext& ctx, const GraphSurface& S,
                               const SurfaceScalar& psi, const QuadratureSpec& spec,
                               bool full_form = false);

}  // namespace carnot
