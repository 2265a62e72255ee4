#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "carnot/group.hpp"
#include "doctest.h"

using namespace carnot;

namespace {

Vec pt(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Vec random_point(const StratifiedAlgebra& alg, std::mt19937& rng, double scale = 2.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vec x(alg.dim());
  for (int i = 0; i < alg.dim(); ++i) x[i] = u(rng);
  return x;
}

// Reference BCH for the Engel rules, written out by hand against its own
// bracket table. Independent of StratifiedAlgebra::bch.
Vec engel_mul_oracle(const Vec& x, const Vec& y) {
  auto br = [](const Vec& a, const Vec& b) {
    // [e1,e2]=e3, [e1,e3]=e4, [e2,e3]=e4
    Vec out = Vec::Zero(4);
    out[2] = a[0] * b[1] - a[1] * b[0];
    out[3] = (a[0] * b[2] - a[2] * b[0]) + (a[1] * b[2] - a[2] * b[1]);
    return out;
  };
  Vec b = br(x, y);
  return x + y + 0.5 * b + (br(x, b) - br(y, b)) / 12.0;
}

}  // namespace

TEST_CASE("verify_structure on presets") {
  auto h1 = StratifiedAlgebra::heisenberg(1);
  auto rep = h1.verify();
  CHECK(rep.ok());
  CHECK(rep.Q == 4);

  auto engel = StratifiedAlgebra::engel();
  rep = engel.verify();
  CHECK(rep.ok());
  CHECK(rep.Q == 7);

  auto h2 = StratifiedAlgebra::heisenberg(2);
  CHECK(h2.verify().ok());
  CHECK(h2.homogeneous_dimension() == 6);
}

TEST_CASE("verify_structure flags a grading violation") {
  // Inject [e1,e2] with a component back in H_1.
  auto bad = StratifiedAlgebra::from_rows("bad", {2, 1}, {{2, 0, 1, 1.0}, {0, 0, 1, 1.0}});
  auto rep = bad.verify();
  CHECK_FALSE(rep.grading_ok);
  CHECK_FALSE(rep.ok());
  CHECK_THROWS_AS(bad.mul(bad.identity(), bad.identity()), StructuralError);
}

TEST_CASE("verify_structure flags a generation failure") {
  // Second layer not reached by [H1, H1].
  auto bad = StratifiedAlgebra::from_rows("nogen", {2, 1}, {});
  auto rep = bad.verify();
  CHECK_FALSE(rep.generation_ok);
}

TEST_CASE("group law on H^1 matches the displayed product") {
  auto h1 = StratifiedAlgebra::heisenberg(1);
  Vec p = h1.mul(pt({1, 0, 0}), pt({0, 1, 0}));
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] == doctest::Approx(1.0));
  CHECK(p[2] == doctest::Approx(0.5));

  std::mt19937 rng(7);
  for (int it = 0; it < 50; ++it) {
    Vec a = random_point(h1, rng);
    Vec b = random_point(h1, rng);
    Vec ab = h1.mul(a, b);
    CHECK(ab[2] ==
          doctest::Approx(a[2] + b[2] + 0.5 * (a[0] * b[1] - a[1] * b[0])).epsilon(1e-14));
  }
}

TEST_CASE("inverse is coordinate negation and a * a^{-1} = 0") {
  std::mt19937 rng(11);
  for (const auto& alg : {StratifiedAlgebra::heisenberg(1), StratifiedAlgebra::engel()}) {
    for (int it = 0; it < 20; ++it) {
      Vec a = random_point(alg, rng);
      Vec e = alg.mul(a, alg.inverse(a));
      CHECK(e.cwiseAbs().maxCoeff() < 1e-13);
    }
  }
}

TEST_CASE("Engel product: the two length-3 BCH terms cancel on (e1, e2)") {
  auto engel = StratifiedAlgebra::engel();
  Vec p = engel.mul(pt({1, 0, 0, 0}), pt({0, 1, 0, 0}));
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] == doctest::Approx(1.0));
  CHECK(p[2] == doctest::Approx(0.5));
  CHECK(p[3] == doctest::Approx(0.0));

  std::mt19937 rng(13);
  for (int it = 0; it < 100; ++it) {
    Vec a = random_point(engel, rng);
    Vec b = random_point(engel, rng);
    Vec got = engel.mul(a, b);
    Vec want = engel_mul_oracle(a, b);
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("associativity on 1000 random triples per preset") {
  std::mt19937 rng(17);
  for (const auto& alg : {StratifiedAlgebra::heisenberg(1), StratifiedAlgebra::heisenberg(2),
                          StratifiedAlgebra::heisenberg(3), StratifiedAlgebra::engel()}) {
    double worst = 0.0;
    for (int it = 0; it < 1000; ++it) {
      Vec a = random_point(alg, rng), b = random_point(alg, rng), c = random_point(alg, rng);
      Vec lhs = alg.mul(alg.mul(a, b), c);
      Vec rhs = alg.mul(a, alg.mul(b, c));
      worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("dilations: weights, semigroup, automorphism") {
  auto h1 = StratifiedAlgebra::heisenberg(1);
  Vec d = h1.dilate(2.0, pt({1, 1, 1}));
  CHECK(d[0] == doctest::Approx(2));
  CHECK(d[1] == doctest::Approx(2));
  CHECK(d[2] == doctest::Approx(4));

  auto engel = StratifiedAlgebra::engel();
  double t = 1.7;
  Vec de = engel.dilate(t, pt({1, 1, 1, 1}));
  CHECK(de[2] == doctest::Approx(t * t));
  CHECK(de[3] == doctest::Approx(t * t * t));

  CHECK_THROWS_AS(h1.dilate(0.0, pt({1, 1, 1})), DomainError);
  CHECK_THROWS_AS(h1.dilate(-1.0, pt({1, 1, 1})), DomainError);

  std::mt19937 rng(19);
  std::uniform_real_distribution<double> ut(0.1, 10.0);
  for (const auto& alg : {StratifiedAlgebra::heisenberg(1), StratifiedAlgebra::heisenberg(2),
                          StratifiedAlgebra::engel()}) {
    double worst = 0.0;
    for (int it = 0; it < 1000; ++it) {
      double s = ut(rng);
      Vec a = random_point(alg, rng), b = random_point(alg, rng);
      Vec lhs = alg.dilate(s, alg.mul(a, b));
      Vec rhs = alg.mul(alg.dilate(s, a), alg.dilate(s, b));
      worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
      Vec twice = alg.dilate(s, alg.dilate(2.0, a));
      worst = std::max(worst, (twice - alg.dilate(2.0 * s, a)).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-10);
    Vec a = random_point(alg, rng);
    CHECK((alg.dilate(1.0, a) - a).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("left-invariant frame: closed form on H^1, identity at 0, det 1") {
  auto h1 = StratifiedAlgebra::heisenberg(1);
  Vec x = pt({0.3, -1.2, 0.7});
  Mat A = h1.frame(x);
  CHECK(A(0, 0) == doctest::Approx(1));
  CHECK(A(2, 0) == doctest::Approx(-x[1] / 2));
  CHECK(A(2, 1) == doctest::Approx(x[0] / 2));
  CHECK(A(1, 1) == doctest::Approx(1));
  CHECK(A(2, 2) == doctest::Approx(1));
  CHECK(A(0, 1) == doctest::Approx(0.0));

  std::mt19937 rng(23);
  for (const auto& alg : {StratifiedAlgebra::heisenberg(2), StratifiedAlgebra::engel()}) {
    Mat at0 = alg.frame(alg.identity());
    CHECK((at0 - Mat::Identity(alg.dim(), alg.dim())).norm() < 1e-14);
    for (int it = 0; it < 25; ++it) {
      Vec y = random_point(alg, rng);
      CHECK(std::abs(alg.frame(y).determinant() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("frame columns agree with central differences of the product") {
  std::mt19937 rng(29);
  for (const auto& alg : {StratifiedAlgebra::heisenberg(1), StratifiedAlgebra::heisenberg(3),
                          StratifiedAlgebra::engel()}) {
    const double h = 1e-5;
    for (int it = 0; it < 10; ++it) {
      Vec x = random_point(alg, rng);
      Mat A = alg.frame(x);
      for (int I = 0; I < alg.dim(); ++I) {
        Vec e = Vec::Zero(alg.dim());
        e[I] = h;
        Vec diff = (alg.mul(x, e) - alg.mul(x, -e)) / (2.0 * h);
        CHECK((diff - A.col(I)).cwiseAbs().maxCoeff() < 1e-8);
      }
    }
  }
}

TEST_CASE("bracket matches structural constants and paper examples") {
  auto h1 = StratifiedAlgebra::heisenberg(1);
  Vec base = pt({0.5, 0.25, -1.0});
  TangentVector X1(h1, pt({1, 0, 0}), base);
  TangentVector X2(h1, pt({0, 1, 0}), base);
  Vec b12 = bracket(X1, X2).frame_coords;
  CHECK(b12[2] == doctest::Approx(1.0));  // [X1,X2] = X3
  CHECK(bracket(X1, X1).norm() == doctest::Approx(0.0));

  auto engel = StratifiedAlgebra::engel();
  Vec e0 = engel.identity();
  TangentVector Y1(engel, pt({1, 0, 0, 0}), e0);
  TangentVector Y3(engel, pt({0, 0, 1, 0}), e0);
  Vec b13 = bracket(Y1, Y3).frame_coords;
  CHECK(b13[3] == doctest::Approx(1.0));  // [X1,X3] = X4

  // frame_coords of [X_I, X_J] equal column C[.][I][J] exactly
  for (const auto& alg : {h1, engel}) {
    for (int I = 0; I < alg.dim(); ++I)
      for (int J = 0; J < alg.dim(); ++J) {
        Vec eI = Vec::Zero(alg.dim()), eJ = Vec::Zero(alg.dim());
        eI[I] = 1;
        eJ[J] = 1;
        TangentVector vI(alg, eI, alg.identity()), vJ(alg, eJ, alg.identity());
        Vec br = bracket(vI, vJ).frame_coords;
        for (int R = 0; R < alg.dim(); ++R) CHECK(br[R] == alg.C(R, I, J));
      }
  }

  TangentVector other_base(h1, pt({1, 0, 0}), pt({1, 1, 1}));
  CHECK_THROWS_AS(bracket(X1, other_base), StructuralError);
}

TEST_CASE("dilation generator has ord-weighted coordinates at the identity") {
  std::mt19937 rng(31);
  for (const auto& alg : {StratifiedAlgebra::heisenberg(1), StratifiedAlgebra::engel()}) {
    for (int it = 0; it < 20; ++it) {
      Vec y = random_point(alg, rng);
      Vec z = alg.dilation_generator(alg.identity(), y);
      for (int I = 0; I < alg.dim(); ++I) CHECK(z[I] == doctest::Approx(alg.ord(I) * y[I]));

      // Z_x against a central difference of t -> x * delta_t(x^{-1} y).
      Vec x = random_point(alg, rng);
      Vec Z = alg.dilation_generator(x, y);
      const double h = 1e-6;
      Vec w = alg.mul(alg.inverse(x), y);
      Vec up = alg.mul(x, alg.dilate(1 + h, w));
      Vec dn = alg.mul(x, alg.dilate(1 - h, w));
      CHECK((Z - (up - dn) / (2 * h)).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("algebra config loader") {
  const char* good = R"({"growth": [2, 1], "constants": [[3, 1, 2, 1.0]]})";
  auto alg = StratifiedAlgebra::from_json_text(good, "h1-from-config");
  CHECK(alg.homogeneous_dimension() == 4);
  CHECK(alg.validated());

  const char* bad_grading = R"({"growth": [2, 1], "constants": [[3, 1, 2, 1.0], [1, 1, 2, 0.5]]})";
  CHECK_THROWS_AS(StratifiedAlgebra::from_json_text(bad_grading, "bad"), ConfigError);

  const char* bad_json = "{growth: nope";
  CHECK_THROWS_AS(StratifiedAlgebra::from_json_text(bad_json, "bad"), ConfigError);
}
