#ifndef SIGMA2_GEOMETRY_HPP
#define SIGMA2_GEOMETRY_HPP

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sigma2/errors.hpp"

namespace sigma2 {

using Vec4 = std::array<double, 4>;

inline double dot(const Vec4& a, const Vec4& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}
inline double norm(const Vec4& a) { return std::sqrt(dot(a, a)); }
inline Vec4 operator+(const Vec4& a, const Vec4& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}
inline Vec4 operator-(const Vec4& a, const Vec4& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]};
}
inline Vec4 operator*(double c, const Vec4& a) { return {c * a[0], c * a[1], c * a[2], c * a[3]}; }

// A position inside the unit disc. Distinct from plain Vec4 so that domain
// checks have a single choke point.
struct Point4 {
  Vec4 x{0, 0, 0, 0};
  double r() const { return norm(x); }
};

// Symmetric 4x4 matrix, packed upper triangle (row-major: 00,01,02,03,11,...).
struct Sym4 {
  std::array<double, 10> a{};

  static constexpr int index(int i, int j) {
    if (i > j) std::swap(i, j);
    // offset of row i = i*4 - i*(i-1)/2
    return i * 4 - i * (i - 1) / 2 + (j - i);
  }
  double operator()(int i, int j) const { return a[index(i, j)]; }
  double& at(int i, int j) { return a[index(i, j)]; }
};

// Value, gradient and Hessian of the conformal factor u at a point.
struct Jet2 {
  double value = 0.0;
  Vec4 grad{0, 0, 0, 0};
  Sym4 hess{};

  bool finite() const;
};

struct Cone {
  Point4 position;
  double beta = 0.0;  // > 0
};

// Eigenvalues of a symmetric 4x4 matrix by cyclic Jacobi rotations, sorted
// ascending. Robust near repeated eigenvalues, which the hyperbolic model
// hits everywhere (A_g = -g/2).
std::array<double, 4> sym4_eigenvalues(const Sym4& m);

// Schouten tensor of g = e^{2u} g_E in the Euclidean frame:
//   A_ij = -u_ij + u_i u_j - (|grad u|^2 / 2) delta_ij.
Sym4 schouten_tensor(const Jet2& jet);

// k-th elementary symmetric polynomial of the eigenvalues of e^{-2u} A.
double sigma_k(const Jet2& jet, int k);

// Mean curvature of the level set of u through the point, outward normal
// grad u / |grad u|:  H = (lap u - n.(hess u).n) / |grad u|.
double mean_curvature(const Jet2& jet, double grad_floor = 1e-10);

// sigma_1 of the tangential Schouten block:  -H|grad u| - (3/2)|grad u|^2.
double sigma1_tilde(const Jet2& jet, double grad_floor = 1e-10);

// Central finite differences, O(h^2); Hessian symmetrized by construction.
// `inside` guards the stencil; pass nullptr to skip the domain check.
Jet2 finite_difference_jet(const std::function<double(const Point4&)>& u, const Point4& x,
                           double h, const std::function<bool(const Point4&)>& inside = nullptr);

// Default step for finite-difference jets; shrinks nothing in practice but
// caps the step near the boundary where derivatives of u blow up.
inline double fd_default_step(double r) { return std::max(1e-4, 1e-5 * (1.0 - r)); }

// A conformal metric g = e^{2u} g_E on the punctured unit disc: an evaluable
// 2-jet of u plus singularity and boundary metadata. Immutable after
// construction; jets may be evaluated concurrently.
class ConformalMetric {
 public:
  ConformalMetric() = default;
  ConformalMetric(std::function<double(const Point4&)> value_fn,
                  std::function<Jet2(const Point4&)> jet_fn, std::vector<Cone> cones,
                  bool analytic);

  double value(const Point4& p) const;
  Jet2 jet(const Point4& p) const;

  const std::vector<Cone>& cones() const { return cones_; }
  std::vector<double> betas() const;
  bool analytic() const { return analytic_; }

  // Boundary profile f(theta) when known in closed form (built-in families).
  void set_boundary_f(std::function<double(const Vec4&)> f) { boundary_f_ = std::move(f); }
  const std::function<double(const Vec4&)>& boundary_f() const { return boundary_f_; }

  // Valid radial domain about the origin and the lower scan radius for
  // boundary-side level solves (families with interior artifacts raise it).
  void set_domain(double r_min, double r_max) { r_min_ = r_min; r_max_ = r_max; }
  void set_origin_scan_lo(double r) { origin_scan_lo_ = r; }
  double r_min() const { return r_min_; }
  double r_max() const { return r_max_; }
  double origin_scan_lo() const { return origin_scan_lo_; }

  // False when e^{4u} is not integrable down to the star centers (families
  // whose angular part blows up toward the origin); sublevel volume
  // integrals like A(t) are then reported as NaN.
  void set_volume_integrable(bool v) { volume_integrable_ = v; }
  bool volume_integrable() const { return volume_integrable_; }

  bool inside_domain(const Point4& p) const;
  void require_inside(const Point4& p) const;

  void set_descriptor(std::string d) { descriptor_ = std::move(d); }
  const std::string& descriptor() const { return descriptor_; }

 private:
  std::function<double(const Point4&)> value_;
  std::function<Jet2(const Point4&)> jet_;
  std::function<double(const Vec4&)> boundary_f_;
  std::vector<Cone> cones_;
  bool analytic_ = true;
  bool volume_integrable_ = true;
  double r_min_ = 0.0;
  double r_max_ = 1.0 - 1e-12;
  double origin_scan_lo_ = 1e-8;
  std::string descriptor_ = "custom";
};

}  // namespace sigma2

#endif
