#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "carnot/algebra.hpp"

namespace carnot {

enum class NormKind { Korany, PowerLambda };

// Layer comparison constants c_i with |x_{H_i}| <= c_i * rho(x)^i, certified
// by sampling the unit rho-sphere and inflating by a safety margin.
struct LayerConstants {
  std::vector<double> c;  // entry j bounds layer j+2
  double margin = 0.05;
  int samples = 0;

  bool empty() const { return c.empty(); }
  double for_layer(int layer) const { return c.at(static_cast<size_t>(layer) - 2); }
};

struct MetricFactorBounds {
  double k1 = 0.0;  // lower bound for the blow-up density kappa_rho(nu_H)
  double k2 = 0.0;  // upper bound
  double box_r1 = 0.0;
  double box_r2 = 0.0;
};

// A smooth homogeneous norm rho on a Carnot group: 1-homogeneous under
// dilations, symmetric, vanishing only at the identity, with |x_H| <= rho(x).
class HomogeneousNorm {
 public:
  // (|x_H|^4 + 16 |x_{H_2}|^2)^{1/4}. Requires a 2-step group whose
  // horizontal constant matrices satisfy C^a C^b = -1 delta_{ab} on H.
  static HomogeneousNorm korany(const StratifiedAlgebra& alg);

  // (sum_i |x_{H_i}|^{lambda/i})^{1/lambda} with lambda evenly divisible by
  // every layer index.
  static HomogeneousNorm power_lambda(const StratifiedAlgebra& alg, int lambda);

  NormKind kind() const { return kind_; }
  int lambda() const { return lambda_; }
  const StratifiedAlgebra& algebra() const { return *alg_; }
  std::string description() const;

  double operator()(const Vec& x) const { return eval(x); }
  double eval(const Vec& x) const;
  // rho(x^{-1} * y), the left-invariant homogeneous distance.
  double distance(const Vec& x, const Vec& y) const { return eval(alg_->mul(alg_->inverse(x), y)); }

  // Riemannian gradient in frame coordinates. Analytic for Korany, central
  // finite differences along frame directions otherwise (h = 1e-6 max(1,rho)).
  Vec gradient(const Vec& x) const;
  // Gradient of y -> rho(x^{-1} * y) in frame coordinates at y; by left
  // invariance this is the gradient of rho at x^{-1} * y.
  Vec distance_gradient(const Vec& x, const Vec& y) const {
    return gradient(alg_->mul(alg_->inverse(x), y));
  }

  LayerConstants layer_constants(int samples = 32768) const;
  MetricFactorBounds metric_factor_bounds(int samples = 32768, double margin = 0.02) const;

  // Closed-form constants b_i with |x_{H_i}| <= b_i rho(x)^i for i = 1..k
  // (1/4 on the second Korany layer, 1 everywhere else). Used for exact
  // coordinate bounding boxes of rho-balls.
  std::vector<double> coordinate_bound_constants() const;

  // Ambient coordinate bounding box of the ball {y : rho(center^{-1} y) <= R},
  // from interval arithmetic through the group product. Always a superset.
  void ball_coordinate_bounds(const Vec& center, double R, Vec& lo, Vec& hi) const;

  // Bounds of rho over a coordinate box (exact monotonicity in the layer
  // block norms).
  void eval_interval(const Vec& lo, const Vec& hi, double& rho_lo, double& rho_hi) const;

  // Deterministic low-discrepancy sample of the unit rho-sphere (Halton
  // directions dilated onto the sphere).
  std::vector<Vec> unit_sphere_samples(int count) const;

 private:
  HomogeneousNorm(const StratifiedAlgebra& alg, NormKind kind, int lambda)
      : alg_(&alg), kind_(kind), lambda_(lambda) {}

  Vec gradient_fd(const Vec& x) const;

  const StratifiedAlgebra* alg_;
  NormKind kind_;
  int lambda_ = 0;
};

}  // namespace carnot
