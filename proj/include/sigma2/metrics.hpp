#ifndef SIGMA2_METRICS_HPP
#define SIGMA2_METRICS_HPP

#include <array>
#include <string>
#include <vector>

#include "sigma2/chy.hpp"
#include "sigma2/geometry.hpp"

namespace sigma2 {

// Exponential-decay sigma2 profile descriptor: c(s) = base + amp e^{-rate s}.
// Covers the constant case (amp = 0) and the CHY case (base = 1, amp = 0).
struct CProfile {
  double base = 1.0;
  double amp = 0.0;
  double rate = 1.0;
  double operator()(double s) const;
  bool is_one() const { return base == 1.0 && amp == 0.0; }
};

// Serializable description of a built-in metric; the CLI's input format
// (JSON schema version 1).
struct MetricSpec {
  std::string family = "hyperbolic";  // hyperbolic | chy | rotsym_sigma2 | perturbed_ah | multi_cone
  double beta = 0.0;                  // chy (beta and k kept consistent)
  double k = 0.0;
  CProfile c;                              // rotsym_sigma2
  double f_seed = 0.0;                     // rotsym_sigma2
  std::array<double, 5> f_coeffs{};        // perturbed_ah, multi_cone: a0 + a_i theta^i
  std::vector<Cone> cones;                 // multi_cone
  double r1 = 0.35, r2 = 0.7;              // multi_cone cutoff radii
  double s_start = 0.05, s_end = 10.0;     // ODE-backed families
  double tol = 1e-13;

  std::string to_json() const;             // stable key order
  static MetricSpec from_json(const std::string& text);
  std::string describe() const;
};

// u = s - log sinh s (= log(2/(1-r^2))), the standard hyperbolic 4-space.
ConformalMetric make_hyperbolic();

// Constant-sigma2 radial metric u = v(s) + s from the radial solve; one cone
// of strength beta at the origin when beta > 0; boundary profile f = -k^2/20.
ConformalMetric make_chy_from_k(double k, double s_start = 0.05, double s_end = 10.0,
                                double tol = 1e-13);
ConformalMetric make_chy_from_beta(double beta, double s_start = 0.05, double s_end = 10.0,
                                   double tol = 1e-13);

// Radial metric with sigma2 = (3/2) c(s) over the solved range; below s_start
// the seeded boundary expansion is used. For c(0) != 1 the expansion is only
// an approximate solution, so seed far enough in that the solve stays in the
// negative cone (the solver reports a cone violation otherwise).
ConformalMetric make_rotsym_sigma2(const CProfile& c, double f_seed, double s_start = 0.05,
                                   double s_end = 10.0, double tol = 1e-13);

// u = s - log sinh s + s^4 (a0 + sum a_i theta^i). Valid for r > 1e-3 (the
// angular part is singular at the origin); boundary-side level scans start
// at r = 0.45 to stay above the interior rise of s^4 f.
ConformalMetric make_perturbed_ah(const std::array<double, 5>& a);

// u = chi(r) sum_l beta_l log|x - p_l| + s - log sinh s + s^4 f(theta), with
// chi a C^2 quintic cutoff, 1 on [0, r1] and 0 on [r2, 1).
ConformalMetric make_multicone(const std::vector<Cone>& cones, const std::array<double, 5>& a,
                               double r1 = 0.35, double r2 = 0.7);

// Builds the metric a spec describes.
ConformalMetric build_metric(const MetricSpec& spec);

}  // namespace sigma2

#endif
