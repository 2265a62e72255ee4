#pragma once

namespace carnot {

// First-order dual number. Group multiplication, dilations and left
// translations are polynomial in exponential coordinates, so running them on
// Jet values yields exact directional derivatives (left-invariant frames,
// dilation generators, pushforwards) without finite differencing.
struct Jet {
  double v = 0.0;  // value
  double d = 0.0;  // derivative

  Jet() = default;
  Jet(double value) : v(value) {}
  Jet(double value, double deriv) : v(value), d(deriv) {}

  friend Jet operator+(Jet a, Jet b) { return {a.v + b.v, a.d + b.d}; }
  friend Jet operator-(Jet a, Jet b) { return {a.v - b.v, a.d - b.d}; }
  friend Jet operator-(Jet a) { return {-a.v, -a.d}; }
  friend Jet operator*(Jet a, Jet b) { return {a.v * b.v, a.v * b.d + a.d * b.v}; }
  friend Jet operator*(double s, Jet a) { return {s * a.v, s * a.d}; }
  friend Jet operator*(Jet a, double s) { return {a.v * s, a.d * s}; }
  Jet& operator+=(Jet o) {
    v += o.v;
    d += o.d;
    return *this;
  }
  Jet& operator-=(Jet o) {
    v -= o.v;
    d -= o.d;
    return *this;
  }
};

inline double value_of(double x) { return x; }
inline double value_of(Jet x) { return x.v; }

}  // namespace carnot
