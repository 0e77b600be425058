#include <doctest.h>

#include <cmath>
#include <random>

#include "sigma2/errors.hpp"
#include "sigma2/metrics.hpp"

using namespace sigma2;

namespace {

// Valid test points away from boundary blow-up and cone neighborhoods.
std::vector<Point4> sample_points(const ConformalMetric& metric, int count, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  std::vector<Point4> pts;
  while (static_cast<int>(pts.size()) < count) {
    Point4 p{{u(rng), u(rng), u(rng), u(rng)}};
    const double r = p.r();
    if (r < std::max(0.1, metric.r_min() * 1.5) || r > 0.7) continue;
    bool near_cone = false;
    for (const auto& c : metric.cones())
      if (norm(p.x - c.position.x) < 0.05) near_cone = true;
    if (near_cone) continue;
    pts.push_back(p);
  }
  return pts;
}

void check_fd_agreement(const ConformalMetric& metric, double tol, unsigned seed) {
  auto f = [&](const Point4& p) { return metric.value(p); };
  for (const Point4& p : sample_points(metric, 50, seed)) {
    const Jet2 fd = finite_difference_jet(f, p, fd_default_step(p.r()));
    const Jet2 exact = metric.jet(p);
    for (int i = 0; i < 4; ++i) {
      CHECK(std::abs(fd.grad[i] - exact.grad[i]) < tol);
      for (int j = i; j < 4; ++j) CHECK(std::abs(fd.hess(i, j) - exact.hess(i, j)) < tol);
    }
  }
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("hyperbolic: curvature identities and boundary mass") {
  const ConformalMetric m = make_hyperbolic();
  for (const Point4& p : sample_points(m, 20, 1)) {
    const Jet2 jet = m.jet(p);
    CHECK(std::abs(sigma_k(jet, 2) - 1.5) < 1e-9);
    CHECK(std::abs(sigma_k(jet, 1) + 2.0) < 1e-9);
  }
  CHECK(m.boundary_f()(Vec4{1, 0, 0, 0}) == 0.0);
  CHECK(m.cones().empty());
}

TEST_CASE("chy metric: beta = 0 reduces to hyperbolic") {
  const ConformalMetric chy0 = make_chy_from_beta(0.0);
  const ConformalMetric hyp = make_hyperbolic();
  for (const Point4& p : sample_points(hyp, 25, 2)) {
    CHECK(std::abs(chy0.value(p) - hyp.value(p)) < 1e-9);
    const Jet2 a = chy0.jet(p), b = hyp.jet(p);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(a.grad[i] - b.grad[i]) < 1e-8);
  }
}

TEST_CASE("chy metric: cone behavior and constant sigma2") {
  const ConformalMetric m = make_chy_from_beta(1.0);
  REQUIRE(m.cones().size() == 1);
  CHECK(m.cones()[0].beta == doctest::Approx(1.0).epsilon(1e-12));

  // u - beta log r stays bounded toward the cone.
  const Vec4 dir{0.6, 0.8, 0.0, 0.0};
  double prev = 0.0;
  for (double rho : {1e-3, 1e-4, 1e-5}) {
    const Point4 p{rho * dir};
    const double q = m.value(p) - 1.0 * std::log(rho);
    if (prev != 0.0) CHECK(std::abs(q - prev) < 2e-3);
    prev = q;
  }

  for (const Point4& p : sample_points(m, 25, 3)) {
    CHECK(std::abs(sigma_k(m.jet(p), 2) - 1.5) < 1e-6);
  }
  CHECK(m.boundary_f()(Vec4{1, 0, 0, 0}) == doctest::Approx(-0.45));
}

TEST_CASE("rotsym metric: c == 1 reduces to the chy metric") {
  const ConformalMetric rot = make_rotsym_sigma2({1.0, 0.0, 1.0}, -0.45);
  const ConformalMetric chy = make_chy_from_beta(1.0);
  for (const Point4& p : sample_points(chy, 20, 4))
    CHECK(std::abs(rot.value(p) - chy.value(p)) < 1e-6);
}

TEST_CASE("rotsym metric: constant c = 1.2 gives sigma2 = 1.8 on the solved range") {
  // c(0) != 1 is incompatible with the boundary expansion, so seed at 0.5;
  // the prescribed curvature then holds inside r < e^{-0.5}.
  const ConformalMetric m = make_rotsym_sigma2({1.2, 0.0, 1.0}, -1.0, 0.5, 10.0);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-0.55, 0.55);
  int checked = 0;
  while (checked < 25) {
    Point4 p{{u(rng), u(rng), u(rng), u(rng)}};
    if (p.r() < 0.05 || p.r() > 0.55) continue;  // inside e^{-0.5} = 0.6065
    CHECK(std::abs(sigma_k(m.jet(p), 2) - 1.8) < 1e-6);
    ++checked;
  }
}

TEST_CASE("rotsym metric: decaying profile") {
  const ConformalMetric m = make_rotsym_sigma2({1.0, 0.5, 1.0}, -1.0, 0.5, 10.0);
  REQUIRE(m.cones().size() == 1);
  CHECK(m.cones()[0].beta > 1.0);
  // sigma2 = (3/2) c(s) at interior points of the solved range.
  const Point4 p{{0.3, 0.2, 0.1, 0.0}};
  const double s = -std::log(p.r());
  CHECK(sigma_k(m.jet(p), 2) ==
        doctest::Approx(1.5 * (1.0 + 0.5 * std::exp(-s))).epsilon(1e-6));
}

TEST_CASE("perturbed metric: mass and domain") {
  const ConformalMetric m = make_perturbed_ah({0.3, 0.1, 0.0, 0.0, 0.0});
  CHECK(m.boundary_f()(Vec4{1, 0, 0, 0}) == doctest::Approx(0.4));
  CHECK(m.boundary_f()(Vec4{-1, 0, 0, 0}) == doctest::Approx(0.2));
  CHECK_THROWS_AS(m.value(Point4{{5e-4, 0, 0, 0}}), Error);

  const ConformalMetric zero = make_perturbed_ah({0.0, 0.0, 0.0, 0.0, 0.0});
  const ConformalMetric hyp = make_hyperbolic();
  for (const Point4& p : sample_points(zero, 10, 6))
    CHECK(zero.value(p) == doctest::Approx(hyp.value(p)).epsilon(1e-14));
}

TEST_CASE("multicone metric: construction guards") {
  CHECK_THROWS_AS(make_multicone({{Point4{{0.34, 0, 0, 0}}, 1.0}}, {}, 0.35, 0.7), Error);
  CHECK_THROWS_AS(make_multicone({{Point4{{0.1, 0, 0, 0}}, 1.0}}, {}, 0.7, 0.35), Error);
}

TEST_CASE("multicone metric: cone structure at 1e-4 spheres") {
  const ConformalMetric m = make_multicone(
      {{Point4{{0.1, 0, 0, 0}}, 0.5}, {Point4{{-0.1, 0, 0, 0}}, 1.0}}, {0, 0, 0, 0, 0});
  std::mt19937 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  for (const auto& cone : m.cones()) {
    const double rho = 1e-4;
    // Gradient of the regular part, from a jet very near the cone.
    const Vec4 probe = cone.position.x + Vec4{1e-7, 0, 0, 0};
    Jet2 jnear = m.jet(Point4{probe});
    Vec4 gsm = jnear.grad;
    const Vec4 d{1e-7, 0, 0, 0};
    const double rho2 = dot(d, d);
    for (int i = 0; i < 4; ++i) gsm[i] -= cone.beta * d[i] / rho2;

    double lo = 1e300, hi = -1e300;
    for (int trial = 0; trial < 100; ++trial) {
      Vec4 v{g(rng), g(rng), g(rng), g(rng)};
      v = (1.0 / norm(v)) * v;
      const Point4 x{cone.position.x + rho * v};
      const double q =
          m.value(x) - cone.beta * std::log(rho) - dot(gsm, x.x - cone.position.x);
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    CHECK(hi - lo < 1e-6);  // second-order remainder only
  }
}

TEST_CASE("multicone metric: hypothesis violation is visible") {
  const ConformalMetric m = make_multicone(
      {{Point4{{0.1, 0, 0, 0}}, 0.5}, {Point4{{-0.1, 0, 0, 0}}, 1.0}}, {0, 0, 0, 0, 0});
  double min_sigma2 = 1e300;
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  int n = 0;
  while (n < 500) {
    Point4 p{{u(rng), u(rng), u(rng), u(rng)}};
    const double r = p.r();
    if (r < 0.02 || r > 0.9) continue;
    bool near = false;
    for (const auto& c : m.cones())
      if (norm(p.x - c.position.x) < 0.02) near = true;
    if (near) continue;
    min_sigma2 = std::min(min_sigma2, sigma_k(m.jet(p), 2));
    ++n;
  }
  CHECK(min_sigma2 < 1.5);  // the cutoff region breaks the bound
}

TEST_CASE("finite-difference jets agree with analytic jets for every family") {
  check_fd_agreement(make_hyperbolic(), 1e-6, 21);
  check_fd_agreement(make_chy_from_beta(1.0), 1e-6, 22);
  check_fd_agreement(make_rotsym_sigma2({1.0, 0.5, 1.0}, -1.0, 0.5, 10.0), 1e-6, 23);
  check_fd_agreement(make_perturbed_ah({0.3, 0.1, -0.05, 0.02, 0.0}), 1e-6, 24);
  check_fd_agreement(make_multicone({{Point4{{0.1, 0.05, 0, 0}}, 0.5},
                                     {Point4{{-0.1, 0, 0.05, 0}}, 1.0}},
                                    {0, 0, 0, 0, 0}),
                     1e-6, 25);
  check_fd_agreement(make_multicone({{Point4{{0.1, 0, 0, 0}}, 0.7}}, {0.1, 0.05, 0, 0, 0}), 1e-6,
                     26);
}

TEST_CASE("metric spec JSON round trip reproduces identical jets") {
  MetricSpec spec;
  spec.family = "chy";
  spec.beta = 1.0;
  spec.k = 3.0;
  const MetricSpec back = MetricSpec::from_json(spec.to_json());
  CHECK(back.family == spec.family);
  CHECK(back.k == spec.k);

  const ConformalMetric a = build_metric(spec);
  const ConformalMetric b = build_metric(back);
  for (const Point4& p : sample_points(a, 10, 31)) {
    CHECK(a.value(p) == b.value(p));  // bit-identical
    const Jet2 ja = a.jet(p), jb = b.jet(p);
    for (int i = 0; i < 10; ++i) CHECK(ja.hess.a[i] == jb.hess.a[i]);
  }

  MetricSpec mc;
  mc.family = "multi_cone";
  mc.cones = {{Point4{{0.1, 0, 0, 0}}, 0.5}, {Point4{{-0.1, 0, 0, 0}}, 1.0}};
  mc.f_coeffs = {0.1, 0.0, 0.0, 0.0, 0.0};
  const MetricSpec mc2 = MetricSpec::from_json(mc.to_json());
  CHECK(mc2.cones.size() == 2);
  CHECK(mc2.cones[1].beta == 1.0);
  const ConformalMetric ma = build_metric(mc), mb = build_metric(mc2);
  for (const Point4& p : sample_points(ma, 10, 32)) CHECK(ma.value(p) == mb.value(p));
}

TEST_CASE("metric spec rejects malformed input") {
  CHECK_THROWS_AS(MetricSpec::from_json("{not json"), Error);
  CHECK_THROWS_AS(MetricSpec::from_json("{\"schema\": 2, \"family\": \"chy\"}"), Error);
  CHECK_THROWS_AS(MetricSpec::from_json("{\"schema\": 1, \"family\": \"nope\"}"), Error);
  CHECK_THROWS_AS(MetricSpec::from_json("{\"schema\": 1, \"family\": \"chy\"}"), Error);
}

}  // TEST_SUITE
