#include <doctest.h>

#include <cmath>

#include "sigma2/errors.hpp"
#include "sigma2/quadrature.hpp"

using namespace sigma2;

namespace {

double average(const SphericalQuadrature& q, const std::function<double(const Vec4&)>& f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) acc += q.weights[i] * f(q.nodes[i]);
  return acc;
}

}  // namespace

TEST_SUITE("quadrature") {

TEST_CASE("weights are positive, normalized, nodes on the sphere") {
  const auto q = make_s3_quadrature(11);
  double total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    CHECK(q.weights[i] > 0.0);
    total += q.weights[i];
    CHECK(norm(q.nodes[i]) == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(std::abs(total - 1.0) < 1e-13);
}

TEST_CASE("first and second moments") {
  for (int degree : {5, 11, 17}) {
    const auto q = make_s3_quadrature(degree);
    for (int i = 0; i < 4; ++i)
      CHECK(std::abs(average(q, [i](const Vec4& th) { return th[i]; })) < 1e-12);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        const double expected = i == j ? 0.25 : 0.0;
        CHECK(std::abs(average(q, [i, j](const Vec4& th) { return th[i] * th[j]; }) - expected) <
              1e-12);
      }
    }
  }
}

TEST_CASE("doubling the degree leaves low moments fixed") {
  const auto lo = make_s3_quadrature(11);
  const auto hi = make_s3_quadrature(23);
  auto poly = [](const Vec4& th) {
    return th[0] * th[0] * th[1] * th[1] + th[2] * th[2] * th[2] * th[2] -
           0.3 * th[0] * th[3] * th[3];
  };
  CHECK(average(lo, poly) == doctest::Approx(average(hi, poly)).epsilon(1e-13));
}

TEST_CASE("known fourth moment") {
  // fint (theta^1)^4 = 3/(4*6) = 1/8 on S^3.
  const auto q = make_s3_quadrature(9);
  const double m4 = average(q, [](const Vec4& th) { return std::pow(th[0], 4); });
  CHECK(m4 == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("degree must be positive") { CHECK_THROWS_AS(make_s3_quadrature(0), Error); }

}  // TEST_SUITE
