#pragma once

#include "carnot/algebra.hpp"

namespace carnot {

// A group element in exponential coordinates of the 1st kind.
struct GroupPoint {
  const StratifiedAlgebra* alg = nullptr;
  Vec x;

  GroupPoint() = default;
  GroupPoint(const StratifiedAlgebra& a, Vec coords) : alg(&a), x(std::move(coords)) {
    a.check_dim(x);
  }

  static GroupPoint identity(const StratifiedAlgebra& a) { return {a, a.identity()}; }

  GroupPoint inverse() const { return {*alg, alg->inverse(x)}; }
  GroupPoint dilated(double t) const { return {*alg, alg->dilate(t, x)}; }

  friend GroupPoint operator*(const GroupPoint& a, const GroupPoint& b) {
    if (a.alg != b.alg) throw StructuralError("group points belong to different algebras");
    return {*a.alg, a.alg->mul(a.x, b.x)};
  }
};

// A tangent vector in left-invariant frame coordinates, attached to a base
// point. The frame is orthonormal, so |v|^2 is the plain sum of squares.
struct TangentVector {
  const StratifiedAlgebra* alg = nullptr;
  Vec frame_coords;
  Vec base;

  TangentVector() = default;
  TangentVector(const StratifiedAlgebra& a, Vec coords, Vec base_point)
      : alg(&a), frame_coords(std::move(coords)), base(std::move(base_point)) {
    a.check_dim(frame_coords);
    a.check_dim(base);
  }

  double norm() const { return frame_coords.norm(); }
  Vec horizontal() const { return alg->horizontal_part(frame_coords); }
  Vec layer(int i) const { return alg->layer_part(frame_coords, i); }
  Vec as_coordinate_vector() const { return alg->coord_vector(base, frame_coords); }
};

// Lie bracket of two tangent vectors at the same base point, from the
// structural constants.
inline TangentVector bracket(const TangentVector& v, const TangentVector& w) {
  if (v.alg != w.alg) throw StructuralError("bracket: vectors from different algebras");
  if (v.base != w.base) throw StructuralError("bracket: base point mismatch");
  std::vector<double> a(v.frame_coords.data(), v.frame_coords.data() + v.frame_coords.size());
  std::vector<double> b(w.frame_coords.data(), w.frame_coords.data() + w.frame_coords.size());
  std::vector<double> c = v.alg->bracket_coeffs(a, b);
  return {*v.alg, Eigen::Map<const Vec>(c.data(), static_cast<Eigen::Index>(c.size())), v.base};
}

}  // namespace carnot
