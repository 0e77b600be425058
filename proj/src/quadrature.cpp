#include "sigma2/quadrature.hpp"

#include <cmath>

#include "sigma2/errors.hpp"
#include "sigma2/summation.hpp"

namespace sigma2 {

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 1; i <= m; ++i) {
    double z = std::cos(M_PI * (i - 0.25) / (n + 0.5));
    double z1, pp;
    do {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      z1 = z;
      z = z1 - p1 / pp;
    } while (std::abs(z - z1) > 1e-15);
    x[i - 1] = -z;
    x[n - i] = z;
    w[i - 1] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - i] = w[i - 1];
  }
}

SphericalQuadrature make_s3_quadrature(int degree) {
  if (degree < 1) fail(errc::invalid_input, "quadrature degree must be >= 1");
  const int n = (degree + 2) / 2;
  const int nphi = degree + 1;

  // Gauss-Chebyshev 2nd kind: weight sqrt(1-x^2), closed-form nodes.
  std::vector<double> xc(n), wc(n);
  for (int i = 1; i <= n; ++i) {
    const double a = i * M_PI / (n + 1);
    xc[i - 1] = std::cos(a);
    wc[i - 1] = (M_PI / (n + 1)) * std::sin(a) * std::sin(a);
  }
  std::vector<double> xl, wl;
  gauss_legendre(n, xl, wl);

  SphericalQuadrature q;
  q.degree = degree;
  q.nodes.reserve(static_cast<std::size_t>(n) * n * nphi);
  q.weights.reserve(q.nodes.capacity());
  for (int i = 0; i < n; ++i) {
    const double c1 = xc[i];
    const double s1 = std::sqrt(1.0 - c1 * c1);
    for (int j = 0; j < n; ++j) {
      const double c2 = xl[j];
      const double s2 = std::sqrt(1.0 - c2 * c2);
      for (int k = 0; k < nphi; ++k) {
        const double phi = 2.0 * M_PI * (k + 0.5) / nphi;
        q.nodes.push_back({c1, s1 * c2, s1 * s2 * std::cos(phi), s1 * s2 * std::sin(phi)});
        q.weights.push_back(wc[i] * wl[j] * (2.0 * M_PI / nphi));
      }
    }
  }
  const double total = pairwise_sum(q.weights);
  for (double& w : q.weights) w /= total;
  return q;
}

}  // namespace sigma2
