#include "sigma2/penrose.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sigma2/errors.hpp"
#include "sigma2/summation.hpp"

namespace sigma2 {

using ordered_json = nlohmann::ordered_json;

double beta_tilde(std::span<const double> betas) {
  double cubes = 0.0;
  for (double b : betas) {
    if (b < 0.0) fail(errc::invalid_input, "beta_tilde: betas must be >= 0");
    cubes += b * b * b;
  }
  return std::cbrt(cubes);
}

double F_of_beta(std::span<const double> betas) {
  if (betas.empty()) return 0.0;
  const double bt = beta_tilde(betas);
  double q = 0.0;
  for (double b : betas) q += b * b;
  return (bt * bt * (bt + 2.0) * (bt + 2.0) + (8.0 / 3.0 * bt + 4.0) * (q - bt * bt)) / 20.0;
}

double F_limit_form(std::span<const double> betas) {
  if (betas.empty()) return 0.0;
  const double bt = beta_tilde(betas);
  double q = 0.0;
  for (double b : betas) q += b * b;
  const double bt3 = bt * bt * bt;
  return (0.25 * bt3 * bt + bt3 / 3.0 + (2.0 / 3.0) * bt * q + q) / 5.0;
}

double m2_of_boundary(std::span<const double> f_values, const SphericalQuadrature& quad) {
  if (f_values.size() != quad.size())
    fail(errc::invalid_input, "m2_of_boundary: one value per quadrature node required");
  std::vector<double> acc(f_values.size());
  for (std::size_t i = 0; i < f_values.size(); ++i) {
    if (!std::isfinite(f_values[i])) fail(errc::invalid_input, "m2_of_boundary: non-finite value");
    acc[i] = quad.weights[i] * f_values[i];
  }
  return pairwise_sum(acc);
}

BoundaryFit fit_boundary_coefficient(const ConformalMetric& metric,
                                     std::span<const Vec4> directions,
                                     std::span<const double> s_samples) {
  if (s_samples.size() < 4)
    fail(errc::invalid_input, "fit_boundary_coefficient: need at least 4 s samples");
  for (double s : s_samples)
    if (!(s > 0.0 && s < 0.2))
      fail(errc::invalid_input, "fit_boundary_coefficient: s samples must lie in (0, 0.2)");

  std::vector<double> s4(s_samples.size()), w_ref(s_samples.size());
  double s8 = 0.0;
  for (std::size_t j = 0; j < s_samples.size(); ++j) {
    const double s = s_samples[j];
    s4[j] = s * s * s * s;
    w_ref[j] = s - std::log(std::sinh(s));
    s8 += s4[j] * s4[j];
  }

  BoundaryFit fit;
  fit.coefficient.reserve(directions.size());
  for (const auto& th : directions) {
    double num = 0.0;
    std::vector<double> ys(s_samples.size());
    for (std::size_t j = 0; j < s_samples.size(); ++j) {
      const double r = std::exp(-s_samples[j]);
      ys[j] = metric.value(Point4{r * th}) - w_ref[j];
      num += ys[j] * s4[j];
    }
    const double c = num / s8;
    double res2 = 0.0;
    for (std::size_t j = 0; j < s_samples.size(); ++j) {
      const double d = ys[j] - c * s4[j];
      res2 += d * d;
    }
    const double residual = std::sqrt(res2);
    fit.coefficient.push_back(c);
    fit.residual.push_back(residual);
    fit.poor_fit.push_back(residual > 0.1 * std::abs(c) * std::sqrt(s8));
  }
  return fit;
}

namespace {

// Aitken delta-squared on the last three of a sequence ordered toward its
// limit, falling back to the last value when the tail is not geometric.
void extrapolate(const double* m, std::size_t n, double& limit, double& err) {
  const double last = m[n - 1];
  limit = last;
  err = 0.0;
  if (n < 3) return;
  const double d1 = m[n - 2] - m[n - 3];
  const double d2 = m[n - 1] - m[n - 2];
  err = std::abs(d2);
  const double dd = d2 - d1;
  if (dd != 0.0) {
    const double q = d2 / d1;
    // Accept the geometric model only while it stays well-conditioned:
    // q near 1 amplifies noise by 1/(1-q).
    if (q > 0.0 && q < 0.9) {
      limit = last - d2 * d2 / dd;
      err = std::max(std::abs(limit - last) * 0.5, 1e-3 * std::abs(d2));
      return;
    }
  }
  err = std::max(err, std::abs(m[n - 1] - m[n - 3]));
}

}  // namespace

LimitEstimates limit_estimates(const MassProfile& profile) {
  const auto& rows = profile.rows;
  if (rows.size() < 10)
    fail(errc::insufficient_data,
         "limit_estimates: need at least 5 usable levels on each side of the profile");
  LimitEstimates est;
  double desc[5], asc[5];
  for (int i = 0; i < 5; ++i) {
    desc[i] = rows[4 - i].m;              // toward t -> -inf
    asc[i] = rows[rows.size() - 5 + i].m; // toward t -> +inf
  }
  extrapolate(desc, 5, est.limit_neg, est.limit_neg_err);
  extrapolate(asc, 5, est.limit_pos, est.limit_pos_err);
  return est;
}

PenroseReport penrose_verdict(const PenroseVerdictInputs& in) {
  PenroseReport rep;
  rep.beta_tilde = beta_tilde(in.betas);
  rep.F = F_of_beta(in.betas);
  rep.m2 = in.m2;
  rep.penrose_gap = -in.m2 - rep.F;
  rep.inequality_pass = rep.penrose_gap >= -in.tol;
  rep.sigma2_min = in.sigma2_min;
  rep.sigma2_hypothesis_ok = std::isfinite(in.sigma2_min) && in.sigma2_min >= 1.5 - in.tol;

  bool profile_flat = false;
  if (in.profile && in.profile->rows.size() >= 2) {
    const auto mono = monotonicity_check(*in.profile, in.tol);
    rep.monotone_verdict = mono.pass ? "pass" : "fail";
    rep.monotone_min_difference = mono.min_difference;
    const auto est = limit_estimates(*in.profile);
    rep.limit_neg = est.limit_neg;
    rep.limit_pos = est.limit_pos;
    rep.limit_neg_err = est.limit_neg_err;
    rep.limit_pos_err = est.limit_pos_err;
    double lo = in.profile->rows.front().m, hi = lo;
    for (const auto& r : in.profile->rows) {
      lo = std::min(lo, r.m);
      hi = std::max(hi, r.m);
    }
    profile_flat = (hi - lo) < in.rigidity_tol;
  } else {
    rep.monotone_verdict = "not-computed";
    rep.limit_neg = rep.limit_pos = std::nan("");
    rep.limit_neg_err = rep.limit_pos_err = std::nan("");
  }

  rep.rigidity_flag = std::abs(rep.penrose_gap) < in.rigidity_tol && profile_flat;
  if (rep.rigidity_flag) {
    if (in.betas.empty()) {
      rep.rigidity_model = "consistent with H4";
    } else {
      std::ostringstream os;
      os << "consistent with CHY beta=" << rep.beta_tilde;
      rep.rigidity_model = os.str();
    }
  }
  return rep;
}

std::string PenroseReport::to_json() const {
  ordered_json j;
  j["beta_tilde"] = beta_tilde;
  j["F"] = F;
  j["m2"] = m2;
  j["limit_neg"] = limit_neg;
  j["limit_pos"] = limit_pos;
  j["limit_neg_err"] = limit_neg_err;
  j["limit_pos_err"] = limit_pos_err;
  j["monotone_verdict"] = monotone_verdict;
  j["monotone_min_difference"] = monotone_min_difference;
  j["penrose_gap"] = penrose_gap;
  j["inequality_pass"] = inequality_pass;
  j["rigidity_flag"] = rigidity_flag;
  j["rigidity_model"] = rigidity_model;
  j["sigma2_min"] = sigma2_min;
  j["sigma2_hypothesis_ok"] = sigma2_hypothesis_ok;
  j["normalization_note"] =
      "F(beta) carries the 1/20 normalization, so the singular-end limit of m(t) equals F "
      "and a single cone gives F = beta^2 (beta+2)^2 / 20; the gap is -m2 - F. The k=1 "
      "rotationally symmetric model (m2 = -k^2/20) pins this convention; dropping the 1/20 "
      "from F, or keeping it while also writing the limit as F/20, is inconsistent with that "
      "oracle.";
  // NaN is not representable in JSON; emit null instead.
  for (auto& [key, val] : j.items())
    if (val.is_number_float() && !std::isfinite(val.get<double>())) j[key] = nullptr;
  return j.dump(2);
}

Sigma2Scan scan_sigma2(const ConformalMetric& metric, int samples, double r_lo, double r_hi) {
  if (samples < 1) fail(errc::invalid_input, "scan_sigma2: need at least one sample");
  Sigma2Scan scan;
  scan.min_sigma2 = scan.min_sigma1 = std::numeric_limits<double>::infinity();
  scan.max_sigma2 = scan.max_sigma1 = -std::numeric_limits<double>::infinity();

  // R4 additive low-discrepancy sequence (generalized golden ratio).
  const double phi = 1.1673039782614187;  // root of x^5 = x + 1
  Vec4 alpha;
  double p = 1.0;
  for (int i = 0; i < 4; ++i) {
    p /= phi;
    alpha[i] = p;
  }
  std::vector<double> s2s;
  s2s.reserve(samples);
  Vec4 state{0.5, 0.5, 0.5, 0.5};
  int accepted = 0;
  long iterations = 0;
  while (accepted < samples && iterations < 1000L * samples + 100000L) {
    ++iterations;
    for (int i = 0; i < 4; ++i) state[i] = std::fmod(state[i] + alpha[i], 1.0);
    Point4 x{Vec4{2.0 * state[0] - 1.0, 2.0 * state[1] - 1.0, 2.0 * state[2] - 1.0,
                  2.0 * state[3] - 1.0}};
    const double r = x.r();
    if (r < std::max(r_lo, metric.r_min() * 1.05) || r > std::min(r_hi, metric.r_max() * 0.999))
      continue;
    bool near_cone = false;
    for (const auto& c : metric.cones())
      if (norm(x.x - c.position.x) < 0.01) near_cone = true;
    if (near_cone) continue;

    const Jet2 jet = metric.jet(x);
    const double s1 = sigma_k(jet, 1);
    const double s2 = sigma_k(jet, 2);
    scan.min_sigma1 = std::min(scan.min_sigma1, s1);
    scan.max_sigma1 = std::max(scan.max_sigma1, s1);
    scan.min_sigma2 = std::min(scan.min_sigma2, s2);
    scan.max_sigma2 = std::max(scan.max_sigma2, s2);
    if (s1 >= 0.0) ++scan.sigma1_nonnegative_count;
    s2s.push_back(s2);
    ++accepted;
  }
  if (accepted == 0) fail(errc::numeric_failure, "scan_sigma2: no admissible sample points");
  scan.samples = accepted;
  scan.histogram.assign(20, 0);
  const double span = scan.max_sigma2 - scan.min_sigma2;
  for (double v : s2s) {
    int bin = span > 0.0 ? static_cast<int>(19.999 * (v - scan.min_sigma2) / span) : 0;
    ++scan.histogram[std::clamp(bin, 0, 19)];
  }
  return scan;
}

}  // namespace sigma2
