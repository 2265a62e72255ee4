#pragma once

#include <functional>

#include "carnot/surface.hpp"

namespace carnot {

struct LevelSegment {
  Vec a, b;  // endpoints in patch parameters
};

// Marching-squares extraction of {f = level} on the 2D parameter boxes, with
// one Newton refinement per edge crossing. Cells entirely outside an optional
// clip ({clip > 0}) are skipped.
std::vector<LevelSegment> extract_level_segments(const std::function<double(const Vec&)>& f,
                                                 const std::vector<Box>& boxes, double level,
                                                 int grid,
                                                 const std::function<double(const Vec&)>& clip =
                                                     nullptr);

// Per-point data of a level curve of a scalar function on a surface patch.
struct LevelPointData {
  SurfacePointData surf;
  Vec grad_full;   // Riemannian gradient of the extended function, frame coords
  Vec grad_ts;     // tangential part
  Vec grad_hs;     // horizontal tangential part
  double p_hs_eta = 0.0;  // |P_HS eta| = |grad_HS| / |grad_TS|
};

LevelPointData level_point_data(const GraphPatch& p, const Vec& zeta,
                                const std::function<double(const Vec&)>& ambient_fn);

// sigma^{n-2} of {phi = s} on one patch: marching squares plus the density
// |P_H nu| |P_HS eta| against the Riemannian length element.
double level_measure(const GraphPatch& p, const std::function<double(const Vec&)>& ambient_fn,
                     double level, int grid);

}  // namespace carnot
