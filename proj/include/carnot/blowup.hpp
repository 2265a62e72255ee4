#pragma once

#include <optional>

#include "carnot/surface.hpp"

namespace carnot {

// Blow-up of the h-perimeter at a surface point: the limit of
// sigma(S cap B(x, R)) / R^{Q-1} with its analytic limit surface.
struct BlowupResult {
  enum class Kind { CaseA, CaseB, Degenerate };
  Kind kind = Kind::CaseA;
  double kappa = 0.0;  // 0 for the degenerate case
  MeasureEstimate kappa_estimate;
  std::optional<GraphSurface> limit_surface;
  std::vector<std::pair<double, double>> scan;  // optional (R, ratio) pairs

  // case (b) provenance
  int alpha = -1;        // vertical graph direction (0-based)
  int aniso_order = 0;   // i = ord(alpha)
  // Taylor coefficients a_beta of the translated height at the point, for
  // multi-indices with weighted order <= i (pairs of exponent tuple and
  // coefficient in the psi ~ sum a_beta zeta^beta normalization).
  std::vector<std::pair<std::vector<int>, double>> taylor;
  std::string note;

  const char* kind_name() const {
    switch (kind) {
      case Kind::CaseA: return "case-a";
      case Kind::CaseB: return "case-b";
      default: return "degenerate";
    }
  }
};

// Density at an interior surface point. Dispatch between the two cases is by
// the characteristic flag at the point, never by the caller.
BlowupResult blowup_density(const GraphSurface& S, int patch, const Vec& zeta,
                            const HomogeneousNorm& rho, const QuadratureSpec& spec);

// Empirical ratios sigma(S cap B(x, R)) / R^{Q-1} over a decreasing radius
// sequence. Radii must stay within the rho-distance from x to the boundary.
std::vector<std::pair<double, double>> blowup_scan(const GraphSurface& S, int patch,
                                                   const Vec& zeta, const HomogeneousNorm& rho,
                                                   const std::vector<double>& radii,
                                                   const QuadratureSpec& spec);

// rho-distance from an ambient point to the boundary pieces of S (sampled);
// +inf for closed surfaces.
double distance_to_boundary(const GraphSurface& S, const HomogeneousNorm& rho, const Vec& x,
                            int samples_per_piece = 512);

}  // namespace carnot
