#include "sigma2/levelset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <thread>
#include <variant>

#include "sigma2/errors.hpp"
#include "sigma2/summation.hpp"

namespace sigma2 {

namespace {

constexpr int kScanIntervals = 64;

int count_sign_changes(const ConformalMetric& metric, const Vec4& th, double t,
                       const Point4& center, double r_lo, double r_hi) {
  int changes = 0;
  double prev = metric.value(Point4{center.x + r_lo * th}) - t;
  for (int i = 1; i <= kScanIntervals; ++i) {
    const double r = r_lo + (r_hi - r_lo) * i / kScanIntervals;
    const double cur = metric.value(Point4{center.x + r * th}) - t;
    if ((prev < 0.0 && cur >= 0.0) || (prev >= 0.0 && cur < 0.0)) ++changes;
    prev = cur;
  }
  return changes;
}

LevelFrame origin_frame(const ConformalMetric& metric) {
  return {Point4{}, metric.origin_scan_lo(), metric.r_max() * (1.0 - 1e-9)};
}

LevelFrame cone_frame(const ConformalMetric& metric, std::size_t l) {
  const auto& cones = metric.cones();
  const Point4& p = cones[l].position;
  double nearest = 1.0 - p.r();  // distance to the boundary
  for (std::size_t m = 0; m < cones.size(); ++m)
    if (m != l) nearest = std::min(nearest, norm(cones[m].position.x - p.x));
  return {p, 1e-12, 0.45 * nearest};
}

// Gauss-Legendre cache for the radial volume panels.
const std::vector<double>& gl32_x() {
  static const auto v = [] {
    std::vector<double> x, w;
    gauss_legendre(32, x, w);
    return x;
  }();
  return v;
}
const std::vector<double>& gl32_w() {
  static const auto v = [] {
    std::vector<double> x, w;
    gauss_legendre(32, x, w);
    return w;
  }();
  return v;
}

double panel_integral(const std::function<double(double)>& f, double a, double b) {
  const auto& xs = gl32_x();
  const auto& ws = gl32_w();
  std::array<double, 32> vals;
  for (int i = 0; i < 32; ++i) {
    const double r = 0.5 * (a + b) + 0.5 * (b - a) * xs[i];
    vals[i] = ws[i] * f(r);
  }
  return 0.5 * (b - a) * pairwise_sum(vals);
}

// Radial integral of f over [r_lo, r_hi] with panels refined toward the
// inner end, where cone factors concentrate the variation.
double radial_integral(const std::function<double(double)>& f, double r_lo, double r_hi) {
  if (r_hi <= r_lo) return 0.0;
  const double span = r_hi - r_lo;
  const double c1 = r_lo + span / 64.0;
  const double c2 = r_lo + span / 8.0;
  return panel_integral(f, r_lo, c1) + panel_integral(f, c1, c2) + panel_integral(f, c2, r_hi);
}

// fint_{S(t)} g dx over the given frames: per node, the radial integral of
// g(x) rho^3 from the frame center out to the level radius.
double sublevel_integral(const ConformalMetric& metric, const SphericalQuadrature& quad,
                         std::span<const LevelSetSample> samples,
                         std::span<const LevelFrame> frames,
                         const std::function<double(const Point4&)>& g) {
  std::vector<double> acc;
  acc.reserve(quad.size() * samples.size());
  for (std::size_t f = 0; f < samples.size(); ++f) {
    const Point4& c = frames[f].center;
    const double inner = std::max(metric.r_min() - c.r() > 0.0 ? metric.r_min() : 0.0, 0.0);
    for (std::size_t j = 0; j < quad.size(); ++j) {
      const Vec4& th = quad.nodes[j];
      auto integrand = [&](double rho) {
        const Point4 x{c.x + rho * th};
        return g(x) * rho * rho * rho;
      };
      acc.push_back(quad.weights[j] * radial_integral(integrand, inner, samples[f].radius[j]));
    }
  }
  return pairwise_sum(acc);
}

struct LevelComputation {
  LevelQuantities q;
  std::vector<LevelSetSample> samples;
  std::vector<LevelFrame> frames;
};

LevelComputation compute_level(const ConformalMetric& metric, double t,
                               const SphericalQuadrature& quad) {
  LevelComputation out;
  out.frames = level_frames(metric, t, quad);
  for (const auto& fr : out.frames) out.samples.push_back(sample_level(metric, t, quad, fr));

  std::vector<double> bacc;
  bacc.reserve(quad.size() * out.frames.size());
  for (const auto& s : out.samples)
    for (std::size_t j = 0; j < quad.size(); ++j) {
      const double r = s.radius[j];
      bacc.push_back(quad.weights[j] * r * r * r * r / 4.0);
    }
  const double B = pairwise_sum(bacc);

  double A = std::nan("");
  if (metric.volume_integrable())
    A = sublevel_integral(metric, quad, out.samples, out.frames,
                          [&](const Point4& x) { return std::exp(4.0 * metric.value(x)); });

  out.q = level_quantities(out.samples, B, A);
  return out;
}

}  // namespace

double solve_radius(const ConformalMetric& metric, const Vec4& direction, double t,
                    const Point4& center, double r_lo, double r_hi) {
  if (!(r_hi > r_lo)) fail(errc::invalid_input, "solve_radius: empty bracket");
  auto u_minus_t = [&](double r) { return metric.value(Point4{center.x + r * direction}) - t; };

  // Sign scan.
  double vals[kScanIntervals + 1];
  int changes = 0, first = -1;
  for (int i = 0; i <= kScanIntervals; ++i) {
    vals[i] = u_minus_t(r_lo + (r_hi - r_lo) * i / kScanIntervals);
    if (i > 0 && ((vals[i - 1] < 0.0 && vals[i] >= 0.0) || (vals[i - 1] >= 0.0 && vals[i] < 0.0))) {
      ++changes;
      if (first < 0) first = i;
    }
  }
  if (changes == 0) fail(errc::no_root, "solve_radius: no sign change on bracket");
  if (changes > 1)
    fail(errc::multi_root, "solve_radius: multiple sign changes (level not star-shaped here)");

  double a = r_lo + (r_hi - r_lo) * (first - 1) / kScanIntervals;
  double b = r_lo + (r_hi - r_lo) * first / kScanIntervals;
  double fa = vals[first - 1];
  while (b - a > 1e-3 * (std::abs(a) + 1e-300)) {
    const double mid = 0.5 * (a + b);
    const double fm = u_minus_t(mid);
    if ((fa < 0.0) == (fm < 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }

  // Newton polish with the jet's radial derivative. The contract is
  // |u - t| < 1e-12 (1 + |t|), but iterate to the roundoff floor: the
  // e^{4t}-sized cancellations in m(t) reward every digit of r.
  double r = 0.5 * (a + b);
  const double target = 1e-12 * (1.0 + std::abs(t));
  const double floor_target = 1e-15 * (1.0 + std::abs(t));
  double best_r = r, best_f = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 60; ++iter) {
    const double f = u_minus_t(r);
    if (std::abs(f) < best_f) {
      best_f = std::abs(f);
      best_r = r;
    }
    if (std::abs(f) < floor_target) return r;
    if (best_f < target && std::abs(f) > best_f) break;  // stalled at the roundoff floor
    const Jet2 jet = metric.jet(Point4{center.x + r * direction});
    const double df = dot(jet.grad, direction);
    if (df == 0.0) fail(errc::degenerate_gradient, "solve_radius: zero radial derivative");
    double rn = r - f / df;
    if (!(rn > a && rn < b)) rn = 0.5 * (a + b);  // fall back to bisection
    if ((u_minus_t(a) < 0.0) == (f < 0.0)) a = r; else b = r;
    r = rn;
  }
  if (best_f < target) return best_r;
  fail(errc::numeric_failure, "solve_radius: Newton polish did not converge");
}

std::vector<LevelFrame> level_frames(const ConformalMetric& metric, double t,
                                     const SphericalQuadrature& quad) {
  const LevelFrame of = origin_frame(metric);
  bool all_one = true, all_zero = true;
  for (const auto& th : quad.nodes) {
    const int c = count_sign_changes(metric, th, t, of.center, of.r_lo, of.r_hi);
    if (c != 1) all_one = false;
    if (c != 0) all_zero = false;
    if (!all_one && !all_zero) break;
  }
  if (all_one) return {of};
  if (!all_zero || metric.cones().empty())
    fail(errc::multi_root,
         "level is not star-shaped about the origin (topology transition at t = " +
             std::to_string(t) + ")");

  // Singular side: one component per cone, all of which must be clean.
  std::vector<LevelFrame> frames;
  for (std::size_t l = 0; l < metric.cones().size(); ++l) {
    const LevelFrame cf = cone_frame(metric, l);
    for (const auto& th : quad.nodes) {
      const int c = count_sign_changes(metric, th, t, cf.center, cf.r_lo, cf.r_hi);
      if (c != 1)
        fail(c == 0 ? errc::no_root : errc::multi_root,
             "cone-side component " + std::to_string(l) + " not star-shaped at t = " +
                 std::to_string(t));
    }
    frames.push_back(cf);
  }
  return frames;
}

LevelSetSample sample_level(const ConformalMetric& metric, double t,
                            const SphericalQuadrature& quad, const LevelFrame& frame) {
  LevelSetSample s;
  s.t = t;
  s.center = frame.center;
  const std::size_t n = quad.size();
  s.radius.resize(n);
  s.grad_norm.resize(n);
  s.mean_curv.resize(n);
  s.area_weight.resize(n);
  s.node_weights = quad.weights;
  for (std::size_t j = 0; j < n; ++j) {
    const Vec4& th = quad.nodes[j];
    const double r = solve_radius(metric, th, t, frame.center, frame.r_lo, frame.r_hi);
    const Jet2 jet = metric.jet(Point4{frame.center.x + r * th});
    const double gn = norm(jet.grad);
    const double radial = dot(jet.grad, th);
    if (!(gn > 1e-10) || radial <= 0.0)
      fail(errc::degenerate_gradient, "sample_level: degenerate or inward gradient on level set");
    // Tangential gradient of the graph: grad_{S3} r = -r grad^tan u / (grad u . theta).
    const Vec4 gtan = jet.grad - radial * th;
    const double slope = norm(gtan) / radial;
    s.radius[j] = r;
    s.grad_norm[j] = gn;
    s.mean_curv[j] = mean_curvature(jet);
    s.area_weight[j] = r * r * r * std::sqrt(1.0 + slope * slope);
  }
  return s;
}

LevelSetSample sample_level(const ConformalMetric& metric, double t,
                            const SphericalQuadrature& quad, const Point4& center) {
  if (center.r() < 1e-14) return sample_level(metric, t, quad, origin_frame(metric));
  for (std::size_t l = 0; l < metric.cones().size(); ++l)
    if (norm(metric.cones()[l].position.x - center.x) < 1e-14)
      return sample_level(metric, t, quad, cone_frame(metric, l));
  fail(errc::invalid_input, "sample_level: center must be the origin or a declared cone");
}

double volume_of_sublevel(const ConformalMetric& metric, double t,
                          const SphericalQuadrature& quad) {
  const auto frames = level_frames(metric, t, quad);
  std::vector<double> acc;
  acc.reserve(quad.size() * frames.size());
  for (const auto& fr : frames) {
    for (std::size_t j = 0; j < quad.size(); ++j) {
      const double r = solve_radius(metric, quad.nodes[j], t, fr.center, fr.r_lo, fr.r_hi);
      acc.push_back(quad.weights[j] * r * r * r * r / 4.0);
    }
  }
  return pairwise_sum(acc);
}

LevelQuantities level_quantities(std::span<const LevelSetSample> samples, double volume_B,
                                 double volume_A) {
  if (samples.empty()) fail(errc::invalid_input, "level_quantities: no samples");
  LevelQuantities q;
  q.t = samples.front().t;
  q.component_count = static_cast<int>(samples.size());

  std::vector<double> z3acc, pacc, lacc;
  for (const auto& s : samples) {
    // The sample's per-node weights were consumed at construction into
    // area_weight-free arrays, so reconstruct the averaged integrals here.
    const std::size_t n = s.radius.size();
    for (std::size_t j = 0; j < n; ++j) {
      const double aw = s.area_weight[j];
      const double gn = s.grad_norm[j];
      z3acc.push_back(s.node_weight(j) * gn * gn * gn * aw);
      pacc.push_back(s.node_weight(j) * s.mean_curv[j] * gn * gn * aw);
      lacc.push_back(s.node_weight(j) * aw);
    }
  }
  const double z3 = pairwise_sum(z3acc);
  if (z3 < 0.0) fail(errc::numeric_failure, "level_quantities: negative |grad u|^3 integral");
  q.z = std::cbrt(z3);
  q.P = pairwise_sum(pacc);
  q.area = pairwise_sum(lacc);
  q.D = 0.5 * q.P + 0.5 * z3;
  q.B = volume_B;
  q.A = volume_A;
  q.C = std::exp(4.0 * q.t) * volume_B;
  const double z4 = q.z * z3;
  q.m = ((2.0 / 3.0) * q.D + (4.0 / 9.0) * q.D * q.z + z4 / 36.0 - q.C) / 5.0;
  q.m_alt = (z4 / 4.0 + (2.0 / 9.0) * q.z * q.P + z3 / 3.0 + q.P / 3.0 - q.C) / 5.0;
  return q;
}

LevelQuantities level_quantities(const LevelSetSample& sample, double volume_B) {
  return level_quantities(std::span<const LevelSetSample>(&sample, 1), volume_B);
}

MassProfile mass_profile(const ConformalMetric& metric, std::span<const double> t_list,
                         const SphericalQuadrature& quad, const ProfileOptions& opts) {
  for (std::size_t i = 1; i < t_list.size(); ++i)
    if (!(t_list[i] > t_list[i - 1])) fail(errc::invalid_input, "mass_profile: t_list must be sorted");

  struct Slot {
    bool ok = false;
    LevelQuantities q;
    std::string reason;
  };
  std::vector<Slot> slots(t_list.size());

  int threads = opts.threads;
  if (threads <= 0)
    threads = static_cast<int>(std::min<unsigned>(std::thread::hardware_concurrency(), 8));
  threads = std::max(1, std::min<int>(threads, static_cast<int>(t_list.size())));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= t_list.size()) return;
      try {
        slots[i].q = compute_level(metric, t_list[i], quad).q;
        slots[i].ok = true;
      } catch (const Error& e) {
        slots[i].reason = std::string(errc_name(e.code())) + ": " + e.what();
      } catch (const std::exception& e) {
        slots[i].reason = e.what();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  MassProfile profile;
  profile.metric_descriptor = metric.descriptor();
  profile.quadrature_descriptor = "s3-product-degree-" + std::to_string(quad.degree);
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    if (slots[i].ok) {
      profile.rows.push_back(slots[i].q);
    } else if (!profile.gaps.empty() && profile.gaps.back().t_hi == t_list[i > 0 ? i - 1 : 0] &&
               i > 0 && !slots[i - 1].ok) {
      profile.gaps.back().t_hi = t_list[i];
    } else {
      profile.gaps.push_back({t_list[i], t_list[i], slots[i].reason});
    }
  }
  return profile;
}

MonotonicityReport monotonicity_check(const MassProfile& profile, double tol) {
  if (profile.rows.size() < 2)
    fail(errc::insufficient_data, "monotonicity_check: need at least 2 rows");
  MonotonicityReport rep;
  rep.min_difference = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < profile.rows.size(); ++i) {
    const double d = profile.rows[i].m - profile.rows[i - 1].m;
    if (d < rep.min_difference) {
      rep.min_difference = d;
      rep.worst_t_lo = profile.rows[i - 1].t;
      rep.worst_t_hi = profile.rows[i].t;
    }
  }
  rep.pass = rep.min_difference >= -tol;
  return rep;
}

namespace {

// 4th-order centered first derivative from samples at t + j dt, j = -2..2.
double diff4(const std::array<double, 5>& y, double dt) {
  return (-y[4] + 8.0 * y[3] - 8.0 * y[1] + y[0]) / (12.0 * dt);
}

}  // namespace

CoareaReport coarea_checks(const ConformalMetric& metric, double t, const SphericalQuadrature& quad,
                           double dt) {
  if (!(dt > 0.0)) fail(errc::invalid_input, "coarea_checks: dt must be positive");
  CoareaReport rep;
  rep.t = t;
  rep.dt = dt;

  std::array<double, 5> As, Bs, Cs, Ds, _ts;
  LevelComputation center;
  for (int j = -2; j <= 2; ++j) {
    const LevelComputation lc = compute_level(metric, t + j * dt, quad);
    As[j + 2] = lc.q.A;
    Bs[j + 2] = lc.q.B;
    Cs[j + 2] = lc.q.C;
    Ds[j + 2] = lc.q.D;
    _ts[j + 2] = lc.q.t;
    if (j == 0) center = lc;
  }
  if (!std::isfinite(As[2]))
    fail(errc::numeric_failure, "coarea_checks: sublevel volume integral unavailable for this metric");

  std::vector<double> invacc;
  for (const auto& s : center.samples)
    for (std::size_t j = 0; j < s.radius.size(); ++j)
      invacc.push_back(s.node_weight(j) / s.grad_norm[j] * s.area_weight[j]);
  const double inv_integral = pairwise_sum(invacc);

  rep.a_prime_fd = diff4(As, dt);
  rep.a_prime_level = std::exp(4.0 * t) * inv_integral;
  rep.rel_a = std::abs(rep.a_prime_fd / rep.a_prime_level - 1.0);
  rep.b_prime_fd = diff4(Bs, dt);
  rep.b_prime_level = inv_integral;
  rep.rel_b = std::abs(rep.b_prime_fd / rep.b_prime_level - 1.0);
  rep.c_prime_fd = diff4(Cs, dt);
  rep.c_prime_identity = 4.0 * Cs[2] + rep.a_prime_fd;
  rep.rel_c = std::abs(rep.c_prime_fd / rep.c_prime_identity - 1.0);
  rep.d_prime_fd = diff4(Ds, dt);
  rep.d_prime_bound = 1.5 * rep.a_prime_fd;

  // Shell form of the divergence identity: D(t2) - D(t1) as a volume
  // integral of sigma2 e^{4u} between the two levels.
  const double half = 0.2;
  const LevelComputation lo = compute_level(metric, t - half, quad);
  const LevelComputation hi = compute_level(metric, t + half, quad);
  rep.d_jump = hi.q.D - lo.q.D;
  if (lo.frames.size() != hi.frames.size())
    fail(errc::multi_root, "coarea_checks: component structure changed across the shell");
  std::vector<double> shell;
  for (std::size_t f = 0; f < lo.frames.size(); ++f) {
    const Point4& c = lo.frames[f].center;
    for (std::size_t j = 0; j < quad.size(); ++j) {
      const Vec4& th = quad.nodes[j];
      auto integrand = [&](double rho) {
        const Point4 x{c.x + rho * th};
        const Jet2 jet = metric.jet(x);
        return sigma_k(jet, 2) * std::exp(4.0 * jet.value) * rho * rho * rho;
      };
      shell.push_back(quad.weights[j] *
                      panel_integral(integrand, lo.samples[f].radius[j], hi.samples[f].radius[j]));
    }
  }
  rep.d_shell_integral = pairwise_sum(shell);
  rep.rel_d = std::abs(rep.d_jump / rep.d_shell_integral - 1.0);
  return rep;
}

AmGmReport amgm_check(const ConformalMetric& metric, double t, const SphericalQuadrature& quad,
                      double dt) {
  if (!(dt > 0.0)) fail(errc::invalid_input, "amgm_check: dt must be positive");
  std::array<double, 5> As, zs;
  LevelComputation center;
  for (int j = -2; j <= 2; ++j) {
    const LevelComputation lc = compute_level(metric, t + j * dt, quad);
    As[j + 2] = lc.q.A;
    zs[j + 2] = lc.q.z;
    if (j == 0) center = lc;
  }
  if (!std::isfinite(As[2]))
    fail(errc::numeric_failure, "amgm_check: sublevel volume integral unavailable for this metric");
  const double a_prime = diff4(As, dt);
  const double z_prime = diff4(zs, dt);

  std::vector<double> s1acc;
  for (const auto& s : center.samples)
    for (std::size_t j = 0; j < s.radius.size(); ++j) {
      const double gn = s.grad_norm[j];
      const double sig1t = -s.mean_curv[j] * gn - 1.5 * gn * gn;
      s1acc.push_back(s.node_weight(j) * std::abs(sig1t) * gn * s.area_weight[j]);
    }
  const double s1_integral = pairwise_sum(s1acc);

  AmGmReport rep;
  rep.lhs = 4.0 * center.q.C;
  rep.rhs = (2.0 * center.q.z * a_prime + (2.0 / 3.0) * z_prime * s1_integral) / 3.0;
  rep.slack_rel = (rep.rhs - rep.lhs) / std::abs(rep.lhs);
  return rep;
}

double isoperimetric_slack(const LevelQuantities& q) {
  const double l4 = q.area * q.area * q.area * q.area;
  return l4 - 64.0 * q.B * q.B * q.B;
}

void write_profile_csv(std::ostream& os, const MassProfile& profile) {
  os << "t,z,P,D,C,A,B,m,component_count\n";
  char buf[640];
  std::size_t gi = 0;
  auto emit_gaps_before = [&](double t) {
    while (gi < profile.gaps.size() && profile.gaps[gi].t_lo <= t) {
      const auto& g = profile.gaps[gi++];
      std::snprintf(buf, sizeof buf, "# gap %.17g %.17g %s\n", g.t_lo, g.t_hi, g.reason.c_str());
      os << buf;
    }
  };
  for (const auto& r : profile.rows) {
    emit_gaps_before(r.t);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", r.t, r.z,
                  r.P, r.D, r.C, r.A, r.B, r.m, r.component_count);
    os << buf;
  }
  emit_gaps_before(std::numeric_limits<double>::infinity());
}

}  // namespace sigma2
