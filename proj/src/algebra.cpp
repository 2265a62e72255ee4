#include "carnot/algebra.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace carnot {

namespace {

std::vector<double> to_std(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vec to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

StratifiedAlgebra::StratifiedAlgebra(std::string name, std::vector<int> growth,
                                     const std::vector<std::array<int, 3>>& indices,
                                     const std::vector<double>& values)
    : name_(std::move(name)), growth_(std::move(growth)) {
  if (growth_.empty()) throw StructuralError("empty growth vector");
  k_ = static_cast<int>(growth_.size());
  n_ = 0;
  layer_begin_.resize(k_ + 1, 0);
  for (int i = 0; i < k_; ++i) {
    if (growth_[i] <= 0) throw StructuralError("growth vector entries must be positive");
    layer_begin_[i + 1] = layer_begin_[i] + growth_[i];
    n_ += growth_[i];
  }
  ord_.resize(n_);
  Q_ = 0;
  for (int layer = 1; layer <= k_; ++layer) {
    Q_ += layer * growth_[layer - 1];
    for (int I = layer_begin(layer); I < layer_end(layer); ++I) ord_[I] = layer;
  }

  C_.assign(static_cast<size_t>(n_) * n_ * n_, 0.0);
  if (indices.size() != values.size()) throw StructuralError("constants index/value size mismatch");
  for (size_t r = 0; r < indices.size(); ++r) {
    auto [R, I, J] = indices[r];
    if (R < 0 || R >= n_ || I < 0 || I >= n_ || J < 0 || J >= n_)
      throw StructuralError("structural constant index out of range");
    if (I == J && values[r] != 0.0) throw StructuralError("nonzero constant on [X_I, X_I]");
    C_[(static_cast<size_t>(R) * n_ + I) * n_ + J] = values[r];
    C_[(static_cast<size_t>(R) * n_ + J) * n_ + I] = -values[r];
  }
  for (int R = 0; R < n_; ++R)
    for (int I = 0; I < n_; ++I)
      for (int J = I + 1; J < n_; ++J)
        if (C(R, I, J) != 0.0) entries_.push_back({R, I, J, C(R, I, J)});
}

StratifiedAlgebra StratifiedAlgebra::from_rows(
    std::string name, std::vector<int> growth,
    const std::vector<std::tuple<int, int, int, double>>& rows) {
  std::vector<std::array<int, 3>> idx;
  std::vector<double> val;
  for (const auto& [R, I, J, c] : rows) {
    idx.push_back({R, I, J});
    val.push_back(c);
  }
  return StratifiedAlgebra(std::move(name), std::move(growth), idx, val);
}

StratifiedAlgebra StratifiedAlgebra::heisenberg(int n) {
  if (n < 1) throw StructuralError("heisenberg(n) needs n >= 1");
  std::vector<std::tuple<int, int, int, double>> rows;
  for (int k = 0; k < n; ++k) rows.emplace_back(2 * n, 2 * k, 2 * k + 1, 1.0);
  auto alg = from_rows(n == 1 ? "h1" : "h" + std::to_string(n), {2 * n, 1}, rows);
  alg.validate();
  return alg;
}

StratifiedAlgebra StratifiedAlgebra::engel() {
  // [e1,e2] = e3, [e1,e3] = e4, [e2,e3] = e4
  auto alg = from_rows("engel", {2, 1, 1}, {{2, 0, 1, 1.0}, {3, 0, 2, 1.0}, {3, 1, 2, 1.0}});
  alg.validate();
  return alg;
}

StratifiedAlgebra StratifiedAlgebra::abelian(int n) {
  auto alg = from_rows("abelian" + std::to_string(n), {n}, {});
  alg.validate();
  return alg;
}

StratifiedAlgebra StratifiedAlgebra::from_json_text(const std::string& text, const std::string& name) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("algebra config: invalid JSON: " + std::string(e.what()));
  }
  if (!j.contains("growth") || !j["growth"].is_array())
    throw ConfigError("algebra config: missing 'growth' array");
  std::vector<int> growth = j["growth"].get<std::vector<int>>();
  int n = 0;
  for (int g : growth) n += g;
  if (j.contains("n") && j["n"].get<int>() != n)
    throw ConfigError("algebra config: 'n' does not match the growth vector");
  std::vector<std::tuple<int, int, int, double>> rows;
  if (j.contains("constants")) {
    for (const auto& row : j["constants"]) {
      if (!row.is_array() || row.size() != 4)
        throw ConfigError("algebra config: constants rows must be [R, I, J, value]");
      // Config rows are 1-based, matching the usual mathematical indexing.
      rows.emplace_back(row[0].get<int>() - 1, row[1].get<int>() - 1, row[2].get<int>() - 1,
                        row[3].get<double>());
    }
  }
  auto alg = from_rows(name, growth, rows);
  auto report = alg.verify();
  if (!report.ok()) {
    std::string msg = "algebra config rejected by verify_structure:";
    for (const auto& f : report.failures) msg += "\n  - " + f;
    throw ConfigError(msg);
  }
  alg.validate();
  return alg;
}

StratifiedAlgebra StratifiedAlgebra::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open algebra config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str(), "custom:" + path);
}

StructureReport StratifiedAlgebra::verify() const {
  StructureReport rep;
  rep.Q = Q_;
  rep.growth_ok = true;
  if (k_ > 4) {
    rep.growth_ok = false;
    rep.failures.push_back("step " + std::to_string(k_) +
                           " exceeds the supported truncation of the BCH product (step <= 4)");
  }

  rep.skew_ok = true;
  for (int R = 0; R < n_ && rep.skew_ok; ++R)
    for (int I = 0; I < n_ && rep.skew_ok; ++I)
      for (int J = 0; J < n_; ++J)
        if (C(R, I, J) + C(R, J, I) != 0.0) {
          rep.skew_ok = false;
          rep.failures.push_back("skew-symmetry fails at (R,I,J)=(" + std::to_string(R + 1) + "," +
                                 std::to_string(I + 1) + "," + std::to_string(J + 1) + ")");
          break;
        }

  rep.jacobi_ok = true;
  for (int I = 0; I < n_ && rep.jacobi_ok; ++I)
    for (int L = 0; L < n_ && rep.jacobi_ok; ++L)
      for (int M = 0; M < n_ && rep.jacobi_ok; ++M)
        for (int R = 0; R < n_; ++R) {
          double s = 0.0;
          for (int J = 0; J < n_; ++J)
            s += C(I, J, L) * C(J, R, M) + C(I, J, M) * C(J, L, R) + C(I, J, R) * C(J, M, L);
          if (std::abs(s) > 1e-12) {
            rep.jacobi_ok = false;
            rep.failures.push_back("Jacobi identity fails at (I,L,M,R)=(" + std::to_string(I + 1) +
                                   "," + std::to_string(L + 1) + "," + std::to_string(M + 1) + "," +
                                   std::to_string(R + 1) + ")");
            break;
          }
        }

  rep.grading_ok = true;
  for (const auto& e : entries_)
    if (ord_[e.R] != ord_[e.I] + ord_[e.J]) {
      rep.grading_ok = false;
      rep.failures.push_back("grading fails: [H_" + std::to_string(ord_[e.I]) + ", H_" +
                             std::to_string(ord_[e.J]) + "] meets H_" + std::to_string(ord_[e.R]));
      break;
    }

  // [H_1, H_{i-1}] must span H_i for i = 2..k.
  rep.generation_ok = true;
  for (int layer = 2; layer <= k_ && rep.generation_ok; ++layer) {
    int hi = layer_dim(layer);
    Mat span(hi, static_cast<Eigen::Index>(h()) * layer_dim(layer - 1));
    int col = 0;
    for (int a = layer_begin(1); a < layer_end(1); ++a)
      for (int b = layer_begin(layer - 1); b < layer_end(layer - 1); ++b, ++col)
        for (int R = layer_begin(layer); R < layer_end(layer); ++R)
          span(R - layer_begin(layer), col) = C(R, a, b);
    Eigen::FullPivLU<Mat> lu(span);
    lu.setThreshold(1e-10);
    if (lu.rank() < hi) {
      rep.generation_ok = false;
      rep.failures.push_back("[H_1, H_" + std::to_string(layer - 1) + "] does not span H_" +
                             std::to_string(layer));
    }
  }
  return rep;
}

void StratifiedAlgebra::validate() {
  auto rep = verify();
  if (!rep.ok()) {
    std::string msg = "verify_structure failed for algebra '" + name_ + "':";
    for (const auto& f : rep.failures) msg += "\n  - " + f;
    throw StructuralError(msg);
  }
  validated_ = true;
}

Vec StratifiedAlgebra::mul(const Vec& a, const Vec& b) const {
  require_validated();
  check_dim(a);
  check_dim(b);
  return to_eigen(bch(to_std(a), to_std(b)));
}

Vec StratifiedAlgebra::dilate(double t, const Vec& x) const {
  check_dim(x);
  if (!(t > 0.0)) throw DomainError("dilate requires t > 0");
  Vec out(n_);
  for (int I = 0; I < n_; ++I) out[I] = std::pow(t, ord_[I]) * x[I];
  return out;
}

Mat StratifiedAlgebra::frame(const Vec& x) const {
  require_validated();
  check_dim(x);
  Mat A(n_, n_);
  std::vector<Jet> xj(n_), e(n_);
  for (int i = 0; i < n_; ++i) xj[i] = Jet(x[i]);
  for (int I = 0; I < n_; ++I) {
    for (int i = 0; i < n_; ++i) e[i] = Jet(0.0, i == I ? 1.0 : 0.0);
    std::vector<Jet> col = bch(xj, e);
    for (int i = 0; i < n_; ++i) A(i, I) = col[i].d;
  }
  return A;
}

Vec StratifiedAlgebra::frame_coords(const Vec& x, const Vec& coord_vec) const {
  // The frame matrix is unit lower triangular in the graded ordering.
  return frame(x).triangularView<Eigen::Lower>().solve(coord_vec);
}

Vec StratifiedAlgebra::coord_vector(const Vec& x, const Vec& frame_vec) const {
  return frame(x) * frame_vec;
}

Vec StratifiedAlgebra::dilation_generator(const Vec& x, const Vec& y) const {
  require_validated();
  check_dim(x);
  check_dim(y);
  Vec z = mul(inverse(x), y);
  // delta_t(z) with t = 1 + eps: coordinate I picks up ord(I) * z_I.
  std::vector<Jet> w(n_), xj(n_);
  for (int i = 0; i < n_; ++i) {
    w[i] = Jet(z[i], ord_[i] * z[i]);
    xj[i] = Jet(x[i]);
  }
  std::vector<Jet> out = bch(xj, w);
  Vec Z(n_);
  for (int i = 0; i < n_; ++i) Z[i] = out[i].d;
  return Z;
}

Vec StratifiedAlgebra::horizontal_part(const Vec& frame_vec) const {
  Vec out = Vec::Zero(n_);
  out.head(h()) = frame_vec.head(h());
  return out;
}

Vec StratifiedAlgebra::layer_part(const Vec& frame_vec, int layer) const {
  Vec out = Vec::Zero(n_);
  for (int I = layer_begin(layer); I < layer_end(layer); ++I) out[I] = frame_vec[I];
  return out;
}

}  // namespace carnot
