#ifndef SIGMA2_PENROSE_HPP
#define SIGMA2_PENROSE_HPP

#include <span>
#include <string>
#include <vector>

#include "sigma2/geometry.hpp"
#include "sigma2/levelset.hpp"
#include "sigma2/quadrature.hpp"

namespace sigma2 {

// beta_tilde = (sum beta_i^3)^{1/3}; empty list gives 0.
double beta_tilde(std::span<const double> betas);

// Cone functional, normalized so that the singular-end limit of m(t) equals
// F and a single cone gives F = beta^2 (beta+2)^2 / 20:
//   F = (1/20)[bt^2 (bt+2)^2 + (8/3 bt + 4)(sum beta_i^2 - bt^2)].
double F_of_beta(std::span<const double> betas);

// Independent form of the same quantity assembled from the level-set limits
//   z -> bt, P -> 3 sum beta_i^2, C -> 0:
//   (1/5)[bt^4/4 + bt^3/3 + (2/3) bt sum beta_i^2 + sum beta_i^2].
// Equal to F_of_beta identically; kept as the derivation oracle.
double F_limit_form(std::span<const double> betas);

// Quadrature average of boundary samples: m2 = fint f(theta) d theta.
double m2_of_boundary(std::span<const double> f_values, const SphericalQuadrature& quad);

// Per-direction least-squares fit of u - (s - log sinh s) against s^4 over
// the given s samples (all in (0, 0.2), at least 4 of them).
struct BoundaryFit {
  std::vector<double> coefficient;
  std::vector<double> residual;
  std::vector<bool> poor_fit;  // residual above 10% of the fitted term
};
BoundaryFit fit_boundary_coefficient(const ConformalMetric& metric,
                                     std::span<const Vec4> directions,
                                     std::span<const double> s_samples);

// Asymptotic limits of m(t) from the 5 most negative / most positive usable
// rows: Aitken extrapolation when the tail decays geometrically, last value
// otherwise; error bars from the extrapolation residuals.
struct LimitEstimates {
  double limit_neg = 0.0, limit_neg_err = 0.0;
  double limit_pos = 0.0, limit_pos_err = 0.0;
};
LimitEstimates limit_estimates(const MassProfile& profile);

struct PenroseReport {
  double beta_tilde = 0.0;
  double F = 0.0;
  double m2 = 0.0;
  double limit_neg = 0.0;
  double limit_pos = 0.0;
  double limit_neg_err = 0.0;
  double limit_pos_err = 0.0;
  std::string monotone_verdict;  // "pass" | "fail"
  double monotone_min_difference = 0.0;
  double penrose_gap = 0.0;  // -m2 - F
  bool inequality_pass = false;
  bool rigidity_flag = false;
  std::string rigidity_model;  // "consistent with CHY beta=..." | "consistent with H4" | ""
  double sigma2_min = 0.0;     // sampled; NaN when not sampled
  bool sigma2_hypothesis_ok = false;

  std::string to_json() const;  // stable key order, plus normalization_note
};

struct PenroseVerdictInputs {
  std::vector<double> betas;
  double m2 = 0.0;
  const MassProfile* profile = nullptr;  // optional
  double tol = 1e-6;
  double rigidity_tol = 1e-4;
  double sigma2_min = std::nan("");  // sampled min, when available
};
PenroseReport penrose_verdict(const PenroseVerdictInputs& in);

// Deterministic low-discrepancy sigma1/sigma2 sampling over the punctured
// disc (radius capped, cone neighborhoods excluded).
struct Sigma2Scan {
  int samples = 0;
  double min_sigma2 = 0.0, max_sigma2 = 0.0;
  double min_sigma1 = 0.0, max_sigma1 = 0.0;
  int sigma1_nonnegative_count = 0;  // negative-cone check: should stay 0
  std::vector<int> histogram;        // 20 bins over [min_sigma2, max_sigma2]
};
Sigma2Scan scan_sigma2(const ConformalMetric& metric, int samples, double r_lo = 0.02,
                       double r_hi = 0.98);

}  // namespace sigma2

#endif
