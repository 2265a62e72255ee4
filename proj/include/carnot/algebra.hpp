#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "carnot/dual.hpp"
#include "carnot/errors.hpp"

namespace carnot {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Outcome of the structural validation of an algebra. A failed report blocks
// every downstream construction that takes the algebra.
struct StructureReport {
  bool skew_ok = false;
  bool jacobi_ok = false;
  bool grading_ok = false;
  bool generation_ok = false;  // [H_1, H_{i-1}] spans H_i
  bool growth_ok = false;      // growth vector consistent, step supported
  int Q = 0;                   // homogeneous dimension, sum of i*h_i
  std::vector<std::string> failures;

  bool ok() const { return skew_ok && jacobi_ok && grading_ok && generation_ok && growth_ok; }
};

// A k-step stratified nilpotent Lie algebra given by its graded basis and
// structural constants C^R_{IJ} = <[X_I, X_J], X_R>, together with the Carnot
// group it generates in exponential coordinates of the 1st kind. The frame
// X_1..X_n is declared orthonormal; this fixes the Riemannian metric.
//
// Indices are 0-based throughout the C++ API. Layers (ord) are 1-based.
class StratifiedAlgebra {
 public:
  struct BracketEntry {
    int R, I, J;  // I < J
    double c;
  };

  StratifiedAlgebra(std::string name, std::vector<int> growth,
                    const std::vector<std::array<int, 3>>& indices,
                    const std::vector<double>& values);

  // Convenience constructor from (R, I, J, value) rows, 0-based.
  static StratifiedAlgebra from_rows(std::string name, std::vector<int> growth,
                                     const std::vector<std::tuple<int, int, int, double>>& rows);

  // Presets. These validate at construction.
  static StratifiedAlgebra heisenberg(int n = 1);
  static StratifiedAlgebra engel();
  static StratifiedAlgebra abelian(int n);

  // Loader for algebra config files (JSON text: growth vector + nonzero
  // structural constants as 1-based (R, I, J, value) rows). Rejects files
  // whose constants fail verify().
  static StratifiedAlgebra from_file(const std::string& path);
  static StratifiedAlgebra from_json_text(const std::string& text, const std::string& name);

  const std::string& name() const { return name_; }
  int dim() const { return n_; }
  int step() const { return k_; }
  int h() const { return growth_[0]; }  // dim of the horizontal layer
  int homogeneous_dimension() const { return Q_; }
  const std::vector<int>& growth() const { return growth_; }

  int ord(int I) const { return ord_[I]; }       // layer of index I, 1..k
  int layer_begin(int layer) const { return layer_begin_[layer - 1]; }
  int layer_end(int layer) const { return layer_begin_[layer]; }
  int layer_dim(int layer) const { return growth_[layer - 1]; }

  double C(int R, int I, int J) const { return C_[(R * n_ + I) * n_ + J]; }
  const std::vector<BracketEntry>& nonzeros() const { return entries_; }

  StructureReport verify() const;
  bool validated() const { return validated_; }
  void require_validated() const {
    if (!validated_) throw StructuralError("algebra '" + name_ + "' has not passed verify_structure");
  }
  // Runs verify() once and records the outcome; throws on failure.
  void validate();

  // ---- coefficient-level operations, templated so Jet scalars flow through

  template <class T>
  std::vector<T> bracket_coeffs(const std::vector<T>& v, const std::vector<T>& w) const {
    std::vector<T> out(n_, T(0.0));
    for (const auto& e : entries_) out[e.R] += e.c * (v[e.I] * w[e.J] - v[e.J] * w[e.I]);
    return out;
  }

  // Baker-Campbell-Hausdorff product, truncated at nested brackets of length
  // equal to the step (exact for nilpotent algebras up to step 4).
  template <class T>
  std::vector<T> bch(const std::vector<T>& x, const std::vector<T>& y) const {
    std::vector<T> z(n_);
    for (int i = 0; i < n_; ++i) z[i] = x[i] + y[i];
    if (k_ >= 2) {
      std::vector<T> b = bracket_coeffs(x, y);  // [x,y]
      for (int i = 0; i < n_; ++i) z[i] += 0.5 * b[i];
      if (k_ >= 3) {
        std::vector<T> xb = bracket_coeffs(x, b);  // [x,[x,y]]
        std::vector<T> yb = bracket_coeffs(y, b);  // [y,[x,y]]
        for (int i = 0; i < n_; ++i) z[i] += (1.0 / 12.0) * (xb[i] - yb[i]);
        if (k_ >= 4) {
          std::vector<T> yxb = bracket_coeffs(y, xb);  // [y,[x,[x,y]]]
          for (int i = 0; i < n_; ++i) z[i] -= (1.0 / 24.0) * yxb[i];
        }
      }
    }
    return z;
  }

  // ---- group operations in exponential coordinates (validated algebra only)

  Vec mul(const Vec& a, const Vec& b) const;
  Vec inverse(const Vec& a) const { check_dim(a); return -a; }
  Vec dilate(double t, const Vec& x) const;
  Vec identity() const { return Vec::Zero(n_); }

  // Columns are the coordinate expressions of the left-invariant frame
  // X_I(x); unit lower-triangular in the graded ordering, det = 1.
  Mat frame(const Vec& x) const;
  // Frame components of a coordinate tangent vector at x (A(x)^{-1} u).
  Vec frame_coords(const Vec& x, const Vec& coord_vec) const;
  // Coordinate expression of a frame tangent vector at x (A(x) f).
  Vec coord_vector(const Vec& x, const Vec& frame_vec) const;

  // Generator of the Carnot homothety centered at x, evaluated at y:
  // Z_x(y) = d/dt|_{t=1} x * delta_t(x^{-1} * y), in coordinate components.
  // Z_0(y) has coordinate I equal to ord(I) * y_I.
  Vec dilation_generator(const Vec& x, const Vec& y) const;

  // Horizontal/vertical slices of a frame vector.
  Vec horizontal_part(const Vec& frame_vec) const;
  Vec layer_part(const Vec& frame_vec, int layer) const;

  void check_dim(const Vec& a) const {
    if (a.size() != n_)
      throw StructuralError("dimension mismatch: expected " + std::to_string(n_) + ", got " +
                            std::to_string(a.size()));
  }

 private:
  std::string name_;
  int n_ = 0;
  int k_ = 0;
  int Q_ = 0;
  std::vector<int> growth_;
  std::vector<int> ord_;
  std::vector<int> layer_begin_;  // size k+1
  std::vector<double> C_;         // dense n^3, row-major (R, I, J)
  std::vector<BracketEntry> entries_;
  bool validated_ = false;
};

}  // namespace carnot
