#include <doctest.h>

#include <cmath>
#include <random>

#include "sigma2/errors.hpp"
#include "sigma2/geometry.hpp"

using namespace sigma2;

namespace {

// Jet of a radial conformal factor from (u, u_r, u_rr).
Jet2 radial_jet(const Vec4& x, double u, double ur, double urr) {
  const double r = norm(x);
  Jet2 jet;
  jet.value = u;
  const Vec4 xh = (1.0 / r) * x;
  for (int i = 0; i < 4; ++i) {
    jet.grad[i] = ur * xh[i];
    for (int j = i; j < 4; ++j) {
      double h = (urr - ur / r) * xh[i] * xh[j];
      if (i == j) h += ur / r;
      jet.hess.at(i, j) = h;
    }
  }
  return jet;
}

// u = log(2/(1-r^2)), the hyperbolic factor.
Jet2 hyperbolic_jet(const Vec4& x) {
  const double r2 = dot(x, x);
  const double d = 1.0 - r2;
  return radial_jet(x, std::log(2.0 / d), 2.0 * norm(x) / d, 2.0 * (1.0 + r2) / (d * d));
}

// u = log(2/(1+r^2)), the round-sphere factor.
Jet2 sphere_jet(const Vec4& x) {
  const double r2 = dot(x, x);
  const double d = 1.0 + r2;
  return radial_jet(x, std::log(2.0 / d), -2.0 * norm(x) / d, 2.0 * (r2 - 1.0) / (d * d));
}

Jet2 random_jet(std::mt19937& rng, double grad_scale = 1.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Jet2 jet;
  jet.value = u(rng);
  for (int i = 0; i < 4; ++i) jet.grad[i] = grad_scale * u(rng);
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) jet.hess.at(i, j) = u(rng);
  return jet;
}

// R4 low-discrepancy sequence, for quasi-random interior points.
struct R4 {
  Vec4 state{0.5, 0.5, 0.5, 0.5};
  Vec4 next() {
    const double phi = 1.1673039782614187;
    double p = 1.0;
    for (int i = 0; i < 4; ++i) {
      p /= phi;
      state[i] = std::fmod(state[i] + p, 1.0);
    }
    return {2.0 * state[0] - 1.0, 2.0 * state[1] - 1.0, 2.0 * state[2] - 1.0,
            2.0 * state[3] - 1.0};
  }
};

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("schouten tensor of the flat factor vanishes") {
  Jet2 jet;  // u == 0
  const Sym4 A = schouten_tensor(jet);
  for (double v : A.a) CHECK(v == 0.0);
}

TEST_CASE("hyperbolic factor has A = -g/2, sigma1 = -2, sigma2 = 3/2") {
  const Vec4 x{0.5, 0.0, 0.0, 0.0};
  const Jet2 jet = hyperbolic_jet(x);
  Sym4 A = schouten_tensor(jet);
  const double scale = std::exp(-2.0 * jet.value);
  for (double& v : A.a) v *= scale;
  for (double lam : sym4_eigenvalues(A)) CHECK(lam == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(sigma_k(jet, 1) == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(sigma_k(jet, 2) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("round-sphere factor has eigenvalues +1/2") {
  R4 seq;
  int checked = 0;
  while (checked < 10) {
    Vec4 x = seq.next();
    const double r = norm(x);
    if (r < 0.05 || r > 0.9) continue;
    const Jet2 jet = sphere_jet(x);
    Sym4 A = schouten_tensor(jet);
    const double scale = std::exp(-2.0 * jet.value);
    for (double& v : A.a) v *= scale;
    for (double lam : sym4_eigenvalues(A)) CHECK(lam == doctest::Approx(0.5).epsilon(1e-10));
    ++checked;
  }
}

TEST_CASE("sigma_k of the flat factor is zero for all k") {
  Jet2 jet;
  for (int k = 1; k <= 4; ++k) CHECK(sigma_k(jet, k) == 0.0);
}

TEST_CASE("sigma_k rejects bad input") {
  Jet2 jet;
  CHECK_THROWS_AS(sigma_k(jet, 0), Error);
  jet.value = std::nan("");
  CHECK_THROWS_AS(sigma_k(jet, 2), Error);
}

TEST_CASE("hyperbolic identities hold at 100 quasi-random interior points") {
  R4 seq;
  int checked = 0;
  while (checked < 100) {
    Vec4 x = seq.next();
    const double r = norm(x);
    if (r < 0.05 || r > 0.95) continue;
    const Jet2 jet = hyperbolic_jet(x);
    CHECK(std::abs(sigma_k(jet, 1) + 2.0) < 1e-9);
    CHECK(std::abs(sigma_k(jet, 2) - 1.5) < 1e-9);
    ++checked;
  }
}

TEST_CASE("mean curvature of round level sets") {
  // Any radially increasing factor sees the sphere: H = 3/r.
  Jet2 quad;  // u = r^2
  const Vec4 x{0.3, -0.2, 0.25, 0.1};
  quad.value = dot(x, x);
  for (int i = 0; i < 4; ++i) {
    quad.grad[i] = 2.0 * x[i];
    quad.hess.at(i, i) = 2.0;
  }
  CHECK(mean_curvature(quad) == doctest::Approx(3.0 / norm(x)).epsilon(1e-12));

  const Vec4 y{0.5, 0.0, 0.0, 0.0};
  CHECK(mean_curvature(hyperbolic_jet(y)) == doctest::Approx(6.0).epsilon(1e-12));
  const Vec4 z{0.1, 0.3, -0.2, 0.05};
  CHECK(mean_curvature(hyperbolic_jet(z)) == doctest::Approx(3.0 / norm(z)).epsilon(1e-12));
}

TEST_CASE("mean curvature needs a usable gradient") {
  Jet2 jet;  // zero gradient
  jet.hess.at(0, 0) = 1.0;
  CHECK_THROWS_AS(mean_curvature(jet), Error);
}

TEST_CASE("sigma1_tilde closed forms") {
  // u = r^2 at |x| = 0.5: |grad u| = 1, H = 6, sigma1_tilde = -7.5.
  Jet2 quad;
  const Vec4 x{0.5, 0.0, 0.0, 0.0};
  quad.value = 0.25;
  for (int i = 0; i < 4; ++i) {
    quad.grad[i] = 2.0 * x[i];
    quad.hess.at(i, i) = 2.0;
  }
  CHECK(sigma1_tilde(quad) == doctest::Approx(-7.5).epsilon(1e-12));

  // Hyperbolic at r = 0.5: |grad u| = (coth s - 1)/r with s = log 2.
  const Jet2 hyp = hyperbolic_jet(x);
  const double s = std::log(2.0);
  const double gn = (std::cosh(s) / std::sinh(s) - 1.0) / 0.5;
  CHECK(norm(hyp.grad) == doctest::Approx(gn).epsilon(1e-12));
  CHECK(sigma1_tilde(hyp) == doctest::Approx(-6.0 * gn - 1.5 * gn * gn).epsilon(1e-12));
}

TEST_CASE("D-integrand identity holds pointwise") {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    Jet2 jet = random_jet(rng, 2.0);
    if (norm(jet.grad) < 0.1) continue;
    const double gn = norm(jet.grad);
    const double H = mean_curvature(jet);
    const double lhs = 0.25 * (2.0 * H * gn * gn + 2.0 * gn * gn * gn);
    const double rhs = -0.5 * sigma1_tilde(jet) * gn - 0.25 * gn * gn * gn;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("finite differences are exact on quadratics") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double c[4][4], b[4];
  for (int i = 0; i < 4; ++i) {
    b[i] = u(rng);
    for (int j = 0; j < 4; ++j) c[i][j] = u(rng);
  }
  auto f = [&](const Point4& p) {
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) {
      acc += b[i] * p.x[i];
      for (int j = 0; j < 4; ++j) acc += c[i][j] * p.x[i] * p.x[j];
    }
    return acc;
  };
  const Point4 x{{0.1, -0.2, 0.3, 0.05}};
  const Jet2 jet = finite_difference_jet(f, x, 1e-3);
  for (int i = 0; i < 4; ++i) {
    double gi = b[i];
    for (int j = 0; j < 4; ++j) gi += (c[i][j] + c[j][i]) * x.x[j];
    CHECK(jet.grad[i] == doctest::Approx(gi).epsilon(1e-10));
    for (int j = i; j < 4; ++j)
      CHECK(jet.hess(i, j) == doctest::Approx(c[i][j] + c[j][i]).epsilon(1e-9));
  }
}

TEST_CASE("finite differences match the analytic hyperbolic jet") {
  const Point4 x{{0.3, 0.2, 0.0, 0.0}};
  auto f = [](const Point4& p) { return std::log(2.0 / (1.0 - dot(p.x, p.x))); };
  const Jet2 fd = finite_difference_jet(f, x, 1e-4);
  const Jet2 exact = hyperbolic_jet(x.x);
  for (int i = 0; i < 4; ++i) {
    CHECK(fd.grad[i] == doctest::Approx(exact.grad[i]).epsilon(1e-6));
    for (int j = i; j < 4; ++j) CHECK(std::abs(fd.hess(i, j) - exact.hess(i, j)) < 1e-6);
  }
}

TEST_CASE("finite differences reject a zero step and guarded stencils") {
  auto f = [](const Point4& p) { return dot(p.x, p.x); };
  CHECK_THROWS_AS(finite_difference_jet(f, Point4{}, 0.0), Error);
  auto inside = [](const Point4& p) { return norm(p.x) < 0.1; };
  CHECK_THROWS_AS(finite_difference_jet(f, Point4{{0.099, 0, 0, 0}}, 1e-2, inside), Error);
}

TEST_CASE("conformal covariance under constant shifts") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const Jet2 jet = random_jet(rng);
    Jet2 shifted = jet;
    const double c = 0.37;
    shifted.value += c;
    // Euclidean-frame A only sees derivatives: identical bits.
    const Sym4 A0 = schouten_tensor(jet);
    const Sym4 A1 = schouten_tensor(shifted);
    for (int i = 0; i < 10; ++i) CHECK(A0.a[i] == A1.a[i]);
    for (int k = 1; k <= 4; ++k) {
      const double expected = std::exp(-2.0 * k * c) * sigma_k(jet, k);
      CHECK(sigma_k(shifted, k) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("Newton identity 2 sigma2 = sigma1^2 - sum lambda^2") {
  std::mt19937 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const Jet2 jet = random_jet(rng);
    Sym4 A = schouten_tensor(jet);
    const double scale = std::exp(-2.0 * jet.value);
    for (double& v : A.a) v *= scale;
    const auto lam = sym4_eigenvalues(A);
    double sum_sq = 0.0;
    for (double l : lam) sum_sq += l * l;
    const double s1 = sigma_k(jet, 1);
    const double s2 = sigma_k(jet, 2);
    CHECK(2.0 * s2 == doctest::Approx(s1 * s1 - sum_sq).epsilon(1e-12));
  }
}

TEST_CASE("mean curvature invariances") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    Jet2 jet = random_jet(rng, 2.0);
    if (norm(jet.grad) < 0.1) continue;
    const double H = mean_curvature(jet);
    Jet2 shifted = jet;
    shifted.value += 1.23;
    CHECK(mean_curvature(shifted) == H);
    Jet2 flipped = jet;
    for (double& g : flipped.grad) g = -g;
    CHECK(mean_curvature(flipped) == doctest::Approx(-H).epsilon(1e-12));
  }
}

TEST_CASE("jacobi eigenvalues handle repeated and distinct spectra") {
  Sym4 m;
  for (int i = 0; i < 4; ++i) m.at(i, i) = -0.5;
  for (double lam : sym4_eigenvalues(m)) CHECK(lam == doctest::Approx(-0.5));

  Sym4 d;
  d.at(0, 0) = 1.0;
  d.at(1, 1) = 2.0;
  d.at(2, 2) = 2.0;  // repeated pair
  d.at(3, 3) = -3.0;
  d.at(0, 3) = 0.0;
  const auto lam = sym4_eigenvalues(d);
  CHECK(lam[0] == doctest::Approx(-3.0));
  CHECK(lam[1] == doctest::Approx(1.0));
  CHECK(lam[2] == doctest::Approx(2.0));
  CHECK(lam[3] == doctest::Approx(2.0));
}

TEST_CASE("conformal metric validates cones and domain") {
  auto value = [](const Point4&) { return 0.0; };
  auto jet = [](const Point4&) { return Jet2{}; };
  CHECK_THROWS_AS(ConformalMetric(value, jet, {{Point4{{0.2, 0, 0, 0}}, -1.0}}, true), Error);
  CHECK_THROWS_AS(
      ConformalMetric(value, jet, {{Point4{{0.2, 0, 0, 0}}, 1.0}, {Point4{{0.2, 0, 0, 0}}, 2.0}},
                      true),
      Error);
  const ConformalMetric m(value, jet, {}, true);
  CHECK_THROWS_AS(m.value(Point4{{1.5, 0, 0, 0}}), Error);
}

}  // TEST_SUITE
