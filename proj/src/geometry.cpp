#include "sigma2/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace sigma2 {

bool Jet2::finite() const {
  if (!std::isfinite(value)) return false;
  for (double g : grad)
    if (!std::isfinite(g)) return false;
  for (double h : hess.a)
    if (!std::isfinite(h)) return false;
  return true;
}

std::array<double, 4> sym4_eigenvalues(const Sym4& m) {
  double a[4][4];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a[i][j] = m(i, j);

  for (int sweep = 0; sweep < 50; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) off += a[i][j] * a[i][j];
    if (off < 1e-30) break;
    for (int p = 0; p < 4; ++p) {
      for (int q = p + 1; q < 4; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < 4; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 4; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::array<double, 4> ev{a[0][0], a[1][1], a[2][2], a[3][3]};
  std::sort(ev.begin(), ev.end());
  return ev;
}

Sym4 schouten_tensor(const Jet2& jet) {
  if (!jet.finite()) fail(errc::invalid_input, "schouten_tensor: non-finite jet");
  const double half_g2 = 0.5 * dot(jet.grad, jet.grad);
  Sym4 A;
  for (int i = 0; i < 4; ++i) {
    for (int j = i; j < 4; ++j) {
      double v = -jet.hess(i, j) + jet.grad[i] * jet.grad[j];
      if (i == j) v -= half_g2;
      A.at(i, j) = v;
    }
  }
  return A;
}

double sigma_k(const Jet2& jet, int k) {
  if (k < 1 || k > 4) fail(errc::invalid_input, "sigma_k: k must be in {1,2,3,4}");
  Sym4 A = schouten_tensor(jet);
  const double scale = std::exp(-2.0 * jet.value);
  for (double& v : A.a) v *= scale;
  if (!std::isfinite(A.a[0])) fail(errc::numeric_failure, "sigma_k: scaling overflow");
  const auto lam = sym4_eigenvalues(A);
  switch (k) {
    case 1:
      return lam[0] + lam[1] + lam[2] + lam[3];
    case 2: {
      double e2 = 0.0;
      for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) e2 += lam[i] * lam[j];
      return e2;
    }
    case 3: {
      double e3 = 0.0;
      for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
          for (int l = j + 1; l < 4; ++l) e3 += lam[i] * lam[j] * lam[l];
      return e3;
    }
    default:
      return lam[0] * lam[1] * lam[2] * lam[3];
  }
}

double mean_curvature(const Jet2& jet, double grad_floor) {
  const double gn = norm(jet.grad);
  if (!(gn > grad_floor))
    fail(errc::degenerate_gradient, "mean_curvature: |grad u| below floor (critical point?)");
  const Vec4 n = (1.0 / gn) * jet.grad;
  double lap = 0.0, nHn = 0.0;
  for (int i = 0; i < 4; ++i) {
    lap += jet.hess(i, i);
    for (int j = 0; j < 4; ++j) nHn += n[i] * jet.hess(i, j) * n[j];
  }
  return (lap - nHn) / gn;
}

double sigma1_tilde(const Jet2& jet, double grad_floor) {
  const double gn = norm(jet.grad);
  const double H = mean_curvature(jet, grad_floor);
  return -H * gn - 1.5 * gn * gn;
}

Jet2 finite_difference_jet(const std::function<double(const Point4&)>& u, const Point4& x,
                           double h, const std::function<bool(const Point4&)>& inside) {
  if (!(h > 0.0)) fail(errc::domain_error, "finite_difference_jet: step must be positive");
  auto shifted = [&](int i, double di, int j, double dj) {
    Point4 p = x;
    p.x[i] += di;
    if (j >= 0) p.x[j] += dj;
    if (inside && !inside(p)) fail(errc::domain_error, "finite_difference_jet: stencil exits domain");
    return p;
  };
  Jet2 jet;
  jet.value = u(x);
  const double u0 = jet.value;
  for (int i = 0; i < 4; ++i) {
    const double up = u(shifted(i, h, -1, 0));
    const double um = u(shifted(i, -h, -1, 0));
    jet.grad[i] = (up - um) / (2.0 * h);
    jet.hess.at(i, i) = (up - 2.0 * u0 + um) / (h * h);
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      const double upp = u(shifted(i, h, j, h));
      const double upm = u(shifted(i, h, j, -h));
      const double ump = u(shifted(i, -h, j, h));
      const double umm = u(shifted(i, -h, j, -h));
      jet.hess.at(i, j) = (upp - upm - ump + umm) / (4.0 * h * h);
    }
  }
  return jet;
}

ConformalMetric::ConformalMetric(std::function<double(const Point4&)> value_fn,
                                 std::function<Jet2(const Point4&)> jet_fn,
                                 std::vector<Cone> cones, bool analytic)
    : value_(std::move(value_fn)), jet_(std::move(jet_fn)), cones_(std::move(cones)),
      analytic_(analytic) {
  for (std::size_t i = 0; i < cones_.size(); ++i) {
    if (!(cones_[i].beta > 0.0)) fail(errc::invalid_input, "cone strength must be positive");
    if (!(cones_[i].position.r() < 1.0)) fail(errc::invalid_input, "cone must be interior");
    for (std::size_t j = i + 1; j < cones_.size(); ++j)
      if (norm(cones_[i].position.x - cones_[j].position.x) == 0.0)
        fail(errc::invalid_input, "cone positions must be distinct");
  }
}

std::vector<double> ConformalMetric::betas() const {
  std::vector<double> out;
  out.reserve(cones_.size());
  for (const auto& c : cones_) out.push_back(c.beta);
  return out;
}

bool ConformalMetric::inside_domain(const Point4& p) const {
  const double r = p.r();
  if (!(r > r_min_ && r < r_max_)) return false;
  for (const auto& c : cones_)
    if (norm(p.x - c.position.x) <= 0.0) return false;
  return true;
}

void ConformalMetric::require_inside(const Point4& p) const {
  if (!inside_domain(p)) fail(errc::domain_error, "point outside the metric's valid domain");
}

double ConformalMetric::value(const Point4& p) const {
  require_inside(p);
  return value_(p);
}

Jet2 ConformalMetric::jet(const Point4& p) const {
  require_inside(p);
  return jet_(p);
}

}  // namespace sigma2
