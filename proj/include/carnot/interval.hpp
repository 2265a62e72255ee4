#pragma once

#include <algorithm>

namespace carnot {

// Closed-interval arithmetic, just enough for bounding the polynomial group
// product over coordinate boxes.
struct Interval {
  double lo = 0.0, hi = 0.0;

  Interval() = default;
  Interval(double v) : lo(v), hi(v) {}
  Interval(double a, double b) : lo(a), hi(b) {}

  friend Interval operator+(Interval a, Interval b) { return {a.lo + b.lo, a.hi + b.hi}; }
  friend Interval operator-(Interval a, Interval b) { return {a.lo - b.hi, a.hi - b.lo}; }
  friend Interval operator-(Interval a) { return {-a.hi, -a.lo}; }
  friend Interval operator*(Interval a, Interval b) {
    double p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
    return {std::min({p1, p2, p3, p4}), std::max({p1, p2, p3, p4})};
  }
  friend Interval operator*(double s, Interval a) {
    return s >= 0 ? Interval{s * a.lo, s * a.hi} : Interval{s * a.hi, s * a.lo};
  }
  friend Interval operator*(Interval a, double s) { return s * a; }
  Interval& operator+=(Interval o) {
    lo += o.lo;
    hi += o.hi;
    return *this;
  }
  Interval& operator-=(Interval o) { return *this += -o; }
};

}  // namespace carnot
