#include "carnot/norms.hpp"

#include <cmath>

#include "carnot/interval.hpp"

namespace carnot {

namespace {

double layer_norm(const StratifiedAlgebra& alg, const Vec& x, int layer) {
  double s = 0.0;
  for (int I = alg.layer_begin(layer); I < alg.layer_end(layer); ++I) s += x[I] * x[I];
  return std::sqrt(s);
}

double layer_sup_norm(const StratifiedAlgebra& alg, const Vec& x, int layer) {
  double s = 0.0;
  for (int I = alg.layer_begin(layer); I < alg.layer_end(layer); ++I)
    s = std::max(s, std::abs(x[I]));
  return s;
}

double halton(int index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * (index % base);
    index /= base;
  }
  return r;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};

}  // namespace

HomogeneousNorm HomogeneousNorm::korany(const StratifiedAlgebra& alg) {
  alg.require_validated();
  if (alg.step() != 2)
    throw ConfigError("Korany norm is defined on 2-step groups only (got step " +
                      std::to_string(alg.step()) + ")");
  // C^a_H C^b_H = -1 delta_{ab} on the horizontal layer.
  const int h = alg.h();
  for (int a = alg.layer_begin(2); a < alg.layer_end(2); ++a)
    for (int b = alg.layer_begin(2); b < alg.layer_end(2); ++b)
      for (int i = 0; i < h; ++i)
        for (int j = 0; j < h; ++j) {
          double prod = 0.0;
          for (int m = 0; m < h; ++m) prod += alg.C(a, i, m) * alg.C(b, m, j);
          double want = (a == b && i == j) ? -1.0 : 0.0;
          if (std::abs(prod - want) > 1e-12)
            throw ConfigError("Korany norm unsupported on group '" + alg.name() +
                              "': C^a_H C^b_H != -1 delta_ab");
        }
  return HomogeneousNorm(alg, NormKind::Korany, 0);
}

HomogeneousNorm HomogeneousNorm::power_lambda(const StratifiedAlgebra& alg, int lambda) {
  alg.require_validated();
  if (lambda <= 0) throw ConfigError("PowerLambda norm needs lambda > 0");
  for (int i = 1; i <= alg.step(); ++i)
    if (lambda % i != 0)
      throw ConfigError("PowerLambda norm: lambda = " + std::to_string(lambda) +
                        " is not evenly divisible by layer index " + std::to_string(i));
  return HomogeneousNorm(alg, NormKind::PowerLambda, lambda);
}

std::string HomogeneousNorm::description() const {
  if (kind_ == NormKind::Korany) return "korany";
  return "power-lambda(" + std::to_string(lambda_) + ")";
}

double HomogeneousNorm::eval(const Vec& x) const {
  alg_->check_dim(x);
  if (kind_ == NormKind::Korany) {
    double rh = layer_norm(*alg_, x, 1);
    double rv = layer_norm(*alg_, x, 2);
    return std::pow(rh * rh * rh * rh + 16.0 * rv * rv, 0.25);
  }
  double s = 0.0;
  for (int i = 1; i <= alg_->step(); ++i)
    s += std::pow(layer_norm(*alg_, x, i), static_cast<double>(lambda_) / i);
  return std::pow(s, 1.0 / lambda_);
}

Vec HomogeneousNorm::gradient(const Vec& x) const {
  alg_->check_dim(x);
  double rho = eval(x);
  if (rho == 0.0) throw SingularityError("norm gradient at the identity");
  if (kind_ != NormKind::Korany) return gradient_fd(x);

  // Analytic Korany gradient in frame coordinates:
  //   grad_H  = (|x_H|^2 x_H - 4 sum_a x_a C^a_H x_H) / rho^3
  //   grad_a  = 8 x_a / rho^3            (a in the second layer)
  const int h = alg_->h();
  const int n = alg_->dim();
  double rh2 = 0.0;
  for (int i = 0; i < h; ++i) rh2 += x[i] * x[i];
  Vec g = Vec::Zero(n);
  double rho3 = rho * rho * rho;
  for (int i = 0; i < h; ++i) {
    double twist = 0.0;
    for (int a = alg_->layer_begin(2); a < alg_->layer_end(2); ++a) {
      double cax = 0.0;
      for (int j = 0; j < h; ++j) cax += alg_->C(a, i, j) * x[j];
      twist += x[a] * cax;
    }
    g[i] = (rh2 * x[i] - 4.0 * twist) / rho3;
  }
  for (int a = alg_->layer_begin(2); a < alg_->layer_end(2); ++a) g[a] = 8.0 * x[a] / rho3;
  return g;
}

Vec HomogeneousNorm::gradient_fd(const Vec& x) const {
  const int n = alg_->dim();
  const double h = 1e-6 * std::max(1.0, eval(x));
  Mat A = alg_->frame(x);
  Vec g(n);
  for (int I = 0; I < n; ++I) {
    Vec dir = A.col(I);
    g[I] = (eval(x + h * dir) - eval(x - h * dir)) / (2.0 * h);
  }
  return g;
}

std::vector<Vec> HomogeneousNorm::unit_sphere_samples(int count) const {
  const int n = alg_->dim();
  std::vector<Vec> out;
  out.reserve(count);
  int index = 1;
  while (static_cast<int>(out.size()) < count) {
    Vec u(n);
    for (int i = 0; i < n; ++i) u[i] = 2.0 * halton(index, kPrimes[i]) - 1.0;
    ++index;
    double nu = u.norm();
    if (nu < 1e-3) continue;
    u /= nu;
    double r = eval(u);
    out.push_back(alg_->dilate(1.0 / r, u));
  }
  return out;
}

LayerConstants HomogeneousNorm::layer_constants(int samples) const {
  LayerConstants lc;
  lc.samples = samples;
  if (alg_->step() < 2) return lc;
  lc.c.assign(alg_->step() - 1, 0.0);
  for (const Vec& y : unit_sphere_samples(samples))
    for (int layer = 2; layer <= alg_->step(); ++layer)
      lc.c[layer - 2] = std::max(lc.c[layer - 2], layer_norm(*alg_, y, layer));
  for (double& c : lc.c) c *= 1.0 + lc.margin;
  return lc;
}

std::vector<double> HomogeneousNorm::coordinate_bound_constants() const {
  std::vector<double> b(alg_->step(), 1.0);
  if (kind_ == NormKind::Korany) b[1] = 0.25;  // 16 |x_{H_2}|^2 <= rho^4
  return b;
}

void HomogeneousNorm::ball_coordinate_bounds(const Vec& center, double R, Vec& lo, Vec& hi) const {
  const int n = alg_->dim();
  std::vector<double> b = coordinate_bound_constants();
  std::vector<Interval> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    x[i] = Interval(center[i]);
    double bound = b[alg_->ord(i) - 1] * std::pow(R, alg_->ord(i));
    w[i] = Interval(-bound, bound);
  }
  std::vector<Interval> y = alg_->bch(x, w);
  lo.resize(n);
  hi.resize(n);
  for (int i = 0; i < n; ++i) {
    lo[i] = y[i].lo;
    hi[i] = y[i].hi;
  }
}

void HomogeneousNorm::eval_interval(const Vec& lo, const Vec& hi, double& rho_lo,
                                    double& rho_hi) const {
  const int k = alg_->step();
  std::vector<double> blk_lo(k, 0.0), blk_hi(k, 0.0);
  for (int layer = 1; layer <= k; ++layer) {
    double s_lo = 0.0, s_hi = 0.0;
    for (int I = alg_->layer_begin(layer); I < alg_->layer_end(layer); ++I) {
      double m = lo[I] > 0.0 ? lo[I] : (hi[I] < 0.0 ? -hi[I] : 0.0);
      double M = std::max(std::abs(lo[I]), std::abs(hi[I]));
      s_lo += m * m;
      s_hi += M * M;
    }
    blk_lo[layer - 1] = std::sqrt(s_lo);
    blk_hi[layer - 1] = std::sqrt(s_hi);
  }
  if (kind_ == NormKind::Korany) {
    auto val = [](double b1, double b2) {
      return std::pow(b1 * b1 * b1 * b1 + 16.0 * b2 * b2, 0.25);
    };
    rho_lo = val(blk_lo[0], blk_lo[1]);
    rho_hi = val(blk_hi[0], blk_hi[1]);
    return;
  }
  double s_lo = 0.0, s_hi = 0.0;
  for (int layer = 1; layer <= k; ++layer) {
    s_lo += std::pow(blk_lo[layer - 1], static_cast<double>(lambda_) / layer);
    s_hi += std::pow(blk_hi[layer - 1], static_cast<double>(lambda_) / layer);
  }
  rho_lo = std::pow(s_lo, 1.0 / lambda_);
  rho_hi = std::pow(s_hi, 1.0 / lambda_);
}

MetricFactorBounds HomogeneousNorm::metric_factor_bounds(int samples, double margin) const {
  // Box gauge: smallest R with y in Box(0,R); 1-homogeneous under dilations.
  auto box_gauge = [&](const Vec& y) {
    double g = 0.0;
    for (int layer = 1; layer <= alg_->step(); ++layer)
      g = std::max(g, std::pow(layer_sup_norm(*alg_, y, layer), 1.0 / layer));
    return g;
  };
  double gmin = std::numeric_limits<double>::infinity();
  double gmax = 0.0;
  for (const Vec& y : unit_sphere_samples(samples)) {
    double g = box_gauge(y);
    gmin = std::min(gmin, g);
    gmax = std::max(gmax, g);
  }
  MetricFactorBounds b;
  b.box_r1 = gmin * (1.0 - margin);
  b.box_r2 = gmax * (1.0 + margin);
  const int Q = alg_->homogeneous_dimension();
  b.k1 = std::pow(2.0 * b.box_r1, Q - 1);
  b.k2 = std::sqrt(static_cast<double>(alg_->dim() - 1)) * std::pow(2.0 * b.box_r2, Q - 1);
  return b;
}

}  // namespace carnot
