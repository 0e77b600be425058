#ifndef SIGMA2_QUADRATURE_HPP
#define SIGMA2_QUADRATURE_HPP

#include <vector>

#include "sigma2/geometry.hpp"

namespace sigma2 {

// Product quadrature on S^3 with unit total weight, so that
// sum_j w_j f(theta_j) approximates the normalized average (1/|S^3|) * integral.
//
// Coordinates: theta = (c1, s1 c2, s1 s2 cos phi, s1 s2 sin phi) with
// c1 = cos chi1, c2 = cos chi2. The chi1 cosine carries the weight
// sqrt(1-c1^2) of the S^3 measure, so it gets a Gauss-Chebyshev (2nd kind)
// rule; the chi2 cosine has unit weight (Gauss-Legendre); the azimuth is a
// uniform midpoint rule. Exact for spherical polynomials up to `degree`.
struct SphericalQuadrature {
  std::vector<Vec4> nodes;
  std::vector<double> weights;  // positive, sum to 1
  int degree = 0;

  std::size_t size() const { return nodes.size(); }
};

SphericalQuadrature make_s3_quadrature(int degree);

// Gauss-Legendre nodes/weights on [-1,1] (Newton on the Legendre recurrence).
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

}  // namespace sigma2

#endif
