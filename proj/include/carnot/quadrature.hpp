#pragma once

#include <functional>
#include <string>
#include <vector>

#include "carnot/algebra.hpp"

namespace carnot {

// Controls for adaptive tensor Gauss-Legendre integration.
struct QuadratureSpec {
  int base_order = 5;    // Gauss points per axis and per cell
  int max_depth = 10;    // adaptive subdivision depth
  double rel_tol = 1e-7; // target relative tolerance

  QuadratureSpec() = default;
  QuadratureSpec(int order, int depth, double tol)
      : base_order(order), max_depth(depth), rel_tol(tol) {}
  QuadratureSpec refined() const { return {base_order, max_depth + 1, rel_tol}; }
};

struct MeasureEstimate {
  double value = 0.0;
  double error = 0.0;  // accumulated error estimate from the last refinement
  bool converged = true;
  std::string warning;

  MeasureEstimate& operator+=(const MeasureEstimate& o) {
    value += o.value;
    error += o.error;
    converged = converged && o.converged;
    if (warning.empty()) warning = o.warning;
    return *this;
  }
};

struct Box {
  Vec lo, hi;
  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const {
    double v = 1.0;
    for (int i = 0; i < dim(); ++i) v *= hi[i] - lo[i];
    return v;
  }
  Vec center() const { return 0.5 * (lo + hi); }
  double max_side() const { return (hi - lo).maxCoeff(); }
  bool contains(const Vec& z, double pad = 0.0) const {
    for (int i = 0; i < dim(); ++i)
      if (z[i] < lo[i] - pad || z[i] > hi[i] + pad) return false;
    return true;
  }
  static std::vector<Box> split(const Box& b);  // 2^d children
  // Intersection, empty optional when disjoint.
  static bool intersect(const Box& a, const Box& b, Box& out);
};

using Integrand = std::function<double(const Vec&)>;
// Signed clip function: the integration region is {clip <= 0}. Null = no clip.
using ClipFn = std::function<double(const Vec&)>;
// Optional certified cell classifier: -1 entirely outside, +1 entirely
// inside, 0 unknown/cut. Sampling alone can miss thin regions (a ball around
// a point of a steep patch meets it in a band of width ~ R^step), so callers
// with structure provide interval-based certificates.
using CellClassifier = std::function<int(const Box&)>;

// Adaptive tensor Gauss-Legendre integration of f over (boxes intersect
// {clip <= 0}). Cells crossed by the clip boundary are refined down to
// max_depth; at the finest level 2D cells are clipped by edge-secant
// polygons, higher-dimensional ones fall back to a centroid indicator.
// Deterministic: fixed recursion and summation order.
MeasureEstimate integrate_adaptive(const Integrand& f, const std::vector<Box>& boxes,
                                   const QuadratureSpec& spec, const ClipFn& clip = nullptr,
                                   const CellClassifier& classifier = nullptr);

// Nodes/weights for Gauss-Legendre on [-1, 1].
const std::vector<double>& gauss_nodes(int order);
const std::vector<double>& gauss_weights(int order);

}  // namespace carnot
