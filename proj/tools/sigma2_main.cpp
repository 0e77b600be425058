// Command-line front end: radial solves, mass profiles, Penrose verification
// reports and sigma2 scans, emitted as CSV/JSON for plotting and CI.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "sigma2/chy.hpp"
#include "sigma2/errors.hpp"
#include "sigma2/levelset.hpp"
#include "sigma2/metrics.hpp"
#include "sigma2/penrose.hpp"
#include "sigma2/quadrature.hpp"

namespace {

using namespace sigma2;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitContradiction = 4;

struct MetricFlags {
  std::string metric = "hyperbolic";  // family shorthand or a JSON spec path
  double beta = -1.0, k = -1.0;
  double c_base = 1.0, c_amp = 0.0, c_rate = 1.0, f_seed = 0.0;
  std::vector<double> f_coeffs{0, 0, 0, 0, 0};
  std::vector<std::string> cone_strings;
  double r1 = 0.35, r2 = 0.7;
  double s_start = -1.0, s_end = 10.0, ode_tol = 1e-13;
};

void add_metric_flags(CLI::App* cmd, MetricFlags& mf) {
  cmd->add_option("--metric", mf.metric,
                  "metric family (hyperbolic|chy|rotsym|perturbed|multicone) or spec JSON path");
  cmd->add_option("--beta", mf.beta, "chy cone parameter");
  cmd->add_option("--k", mf.k, "chy first-integral constant");
  cmd->add_option("--c-base", mf.c_base, "rotsym c(s) = c_base + c_amp exp(-c_rate s)");
  cmd->add_option("--c-amp", mf.c_amp, "rotsym profile amplitude");
  cmd->add_option("--c-rate", mf.c_rate, "rotsym profile decay rate");
  cmd->add_option("--f-seed", mf.f_seed, "rotsym boundary s^4 coefficient");
  cmd->add_option("--a0", mf.f_coeffs[0], "boundary f constant term");
  cmd->add_option("--a1", mf.f_coeffs[1], "boundary f theta^1 coefficient");
  cmd->add_option("--a2", mf.f_coeffs[2], "boundary f theta^2 coefficient");
  cmd->add_option("--a3", mf.f_coeffs[3], "boundary f theta^3 coefficient");
  cmd->add_option("--a4", mf.f_coeffs[4], "boundary f theta^4 coefficient");
  cmd->add_option("--cone", mf.cone_strings, "cone as \"x,y,z,w:beta\" (repeatable)");
  cmd->add_option("--r1", mf.r1, "multicone cutoff start radius");
  cmd->add_option("--r2", mf.r2, "multicone cutoff end radius");
  cmd->add_option("--s-start", mf.s_start, "ODE seed location");
  cmd->add_option("--s-end", mf.s_end, "ODE integration end");
  cmd->add_option("--ode-tol", mf.ode_tol, "ODE solver tolerance");
}

Cone parse_cone(const std::string& text) {
  Cone c;
  const auto colon = text.find(':');
  if (colon == std::string::npos) fail(errc::invalid_input, "cone flag needs \"x,y,z,w:beta\"");
  std::istringstream pos(text.substr(0, colon));
  for (int i = 0; i < 4; ++i) {
    char sep;
    if (!(pos >> c.position.x[i])) fail(errc::invalid_input, "bad cone position: " + text);
    if (i < 3 && !(pos >> sep)) fail(errc::invalid_input, "bad cone position: " + text);
  }
  c.beta = std::stod(text.substr(colon + 1));
  return c;
}

MetricSpec spec_from_flags(const MetricFlags& mf) {
  // A JSON file path wins over inline flags.
  if (std::ifstream in{mf.metric}; in.good()) {
    std::ostringstream ss;
    ss << in.rdbuf();
    return MetricSpec::from_json(ss.str());
  }
  MetricSpec spec;
  spec.s_end = mf.s_end;
  spec.tol = mf.ode_tol;
  if (mf.metric == "hyperbolic") {
    spec.family = "hyperbolic";
  } else if (mf.metric == "chy") {
    spec.family = "chy";
    if (mf.k >= 0.0) {
      spec.k = mf.k;
      spec.beta = beta_of_k(mf.k);
    } else if (mf.beta >= 0.0) {
      spec.beta = mf.beta;
      spec.k = k_of_beta(mf.beta);
    } else {
      fail(errc::invalid_input, "chy metric needs --beta or --k (>= 0)");
    }
    spec.s_start = mf.s_start > 0.0 ? mf.s_start : 0.05;
  } else if (mf.metric == "rotsym") {
    spec.family = "rotsym_sigma2";
    spec.c = {mf.c_base, mf.c_amp, mf.c_rate};
    spec.f_seed = mf.f_seed;
    // c != 1 near s = 0 is incompatible with the seeded boundary expansion,
    // so such profiles default to seeding farther in.
    spec.s_start = mf.s_start > 0.0 ? mf.s_start : (spec.c.is_one() ? 0.05 : 0.5);
  } else if (mf.metric == "perturbed") {
    spec.family = "perturbed_ah";
    std::copy(mf.f_coeffs.begin(), mf.f_coeffs.end(), spec.f_coeffs.begin());
  } else if (mf.metric == "multicone") {
    spec.family = "multi_cone";
    for (const auto& s : mf.cone_strings) spec.cones.push_back(parse_cone(s));
    if (spec.cones.empty()) fail(errc::invalid_input, "multicone metric needs at least one --cone");
    std::copy(mf.f_coeffs.begin(), mf.f_coeffs.end(), spec.f_coeffs.begin());
    spec.r1 = mf.r1;
    spec.r2 = mf.r2;
  } else {
    fail(errc::invalid_input, "unknown metric \"" + mf.metric + "\" (and no such spec file)");
  }
  return spec;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);  // LF line endings on every platform
  if (!os) fail(errc::invalid_input, "cannot open output file: " + path);
  return os;
}

void write_or_print(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
  } else {
    auto os = open_out(path);
    os << content;
  }
}

int thread_count() {
  if (const char* env = std::getenv("SIGMA2_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 0;  // library default
}

// Level values spanning the regimes a family can reach, used when the caller
// does not pin a t-range.
std::vector<double> auto_levels(const ConformalMetric& metric, const MetricSpec& spec, int levels) {
  std::vector<double> ts;
  auto radial_t = [&](double s) { return metric.value(Point4{{std::exp(-s), 0, 0, 0}}); };
  if (spec.family == "chy" || spec.family == "rotsym_sigma2") {
    const double s_lo = spec.s_start * 1.1 + 0.25;
    const double s_hi = std::min(spec.s_end * 0.65, 6.5);
    for (int i = 0; i < levels; ++i) {
      const double s = s_hi + (s_lo - s_hi) * i / (levels - 1.0);
      ts.push_back(radial_t(s));
    }
  } else if (spec.family == "hyperbolic") {
    for (int i = 0; i < levels; ++i) ts.push_back(0.75 + (5.5 - 0.75) * i / (levels - 1.0));
  } else if (spec.family == "perturbed_ah") {
    for (int i = 0; i < levels; ++i) ts.push_back(3.0 + (5.5 - 3.0) * i / (levels - 1.0));
  } else {
    // multi_cone: cover the singular side and the boundary side; the
    // transition in between shows up as gaps.
    const int half = std::max(5, levels / 2);
    for (int i = 0; i < half; ++i) ts.push_back(-7.0 + 2.0 * i / (half - 1.0));
    for (int i = 0; i < half; ++i) ts.push_back(2.0 + 3.5 * i / (half - 1.0));
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

int cmd_chy(const MetricFlags& mf, double s0, double s1, double tol, const std::string& out) {
  double k;
  if (mf.k >= 0.0) k = mf.k;
  else if (mf.beta >= 0.0) k = k_of_beta(mf.beta);
  else fail(errc::invalid_input, "chy needs --beta or --k (>= 0)");
  const ChySolution sol = solve_chy(k, s0, s1, tol);
  std::ostringstream ss;
  write_radial_csv(ss, sol.grid);
  write_or_print(out, ss.str());
  std::cerr << "chy: k=" << sol.k << " beta=" << sol.beta << " beta_numeric=" << sol.beta_numeric
            << " m2=" << -sol.k * sol.k / 20.0 << " nodes=" << sol.grid.size() << "\n";
  return kExitOk;
}

int cmd_profile(const MetricFlags& mf, double t_min, double t_max, int levels, int degree,
                const std::string& out) {
  if (levels < 2) fail(errc::invalid_input, "profile needs --levels >= 2");
  if (degree < 3) fail(errc::invalid_input, "profile needs --degree >= 3");
  const MetricSpec spec = spec_from_flags(mf);
  const ConformalMetric metric = build_metric(spec);
  const SphericalQuadrature quad = make_s3_quadrature(degree);

  std::vector<double> ts;
  if (t_min < t_max) {
    for (int i = 0; i < levels; ++i) ts.push_back(t_min + (t_max - t_min) * i / (levels - 1.0));
  } else {
    ts = auto_levels(metric, spec, levels);
  }
  const MassProfile profile = mass_profile(metric, ts, quad, {thread_count()});
  if (profile.rows.empty()) fail(errc::numeric_failure, "every level failed; see gap reasons");
  std::ostringstream ss;
  write_profile_csv(ss, profile);
  write_or_print(out, ss.str());
  return kExitOk;
}

int cmd_verify(const MetricFlags& mf, int levels, int degree, double tol, const std::string& out) {
  if (levels < 10) fail(errc::invalid_input, "verify needs --levels >= 10");
  if (degree < 3) fail(errc::invalid_input, "verify needs --degree >= 3");
  if (!(tol > 0.0)) fail(errc::invalid_input, "verify needs --tol > 0");
  const MetricSpec spec = spec_from_flags(mf);
  const ConformalMetric metric = build_metric(spec);
  const SphericalQuadrature quad = make_s3_quadrature(degree);

  const MassProfile profile = mass_profile(metric, auto_levels(metric, spec, levels), quad,
                                           {thread_count()});

  // Boundary mass from the s^4 fit, sampled below the usual ODE seed.
  std::vector<double> s_samples;
  for (int i = 0; i < 8; ++i) s_samples.push_back(0.01 + 0.005 * i);
  const BoundaryFit fit = fit_boundary_coefficient(metric, quad.nodes, s_samples);
  const double m2 = m2_of_boundary(fit.coefficient, quad);

  const Sigma2Scan scan = scan_sigma2(metric, 2000);

  PenroseVerdictInputs in;
  in.betas = metric.betas();
  in.m2 = m2;
  in.profile = &profile;
  in.tol = tol;
  in.rigidity_tol = std::max(tol, 1e-4);
  in.sigma2_min = scan.min_sigma2;
  const PenroseReport report = penrose_verdict(in);

  write_or_print(out, report.to_json() + "\n");
  if (report.penrose_gap < -tol && report.sigma2_hypothesis_ok) {
    std::cerr << "verify: PENROSE GAP NEGATIVE WITH sigma2 >= 3/2 (gap=" << report.penrose_gap
              << ", min sigma2=" << scan.min_sigma2 << ") - counterexample signal\n";
    return kExitContradiction;
  }
  return kExitOk;
}

int cmd_scan(const MetricFlags& mf, int samples, double r_lo, double r_hi,
             const std::string& out) {
  if (samples < 1) fail(errc::invalid_input, "sigma2-scan needs --samples >= 1");
  const MetricSpec spec = spec_from_flags(mf);
  const ConformalMetric metric = build_metric(spec);
  const Sigma2Scan scan = scan_sigma2(metric, samples, r_lo, r_hi);

  std::ostringstream ss;
  char buf[256];
  ss << "# sigma2 scan: " << metric.descriptor() << "\n";
  ss << "samples,min_sigma2,max_sigma2,min_sigma1,max_sigma1,sigma1_nonnegative_count\n";
  std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%d\n", scan.samples, scan.min_sigma2,
                scan.max_sigma2, scan.min_sigma1, scan.max_sigma1, scan.sigma1_nonnegative_count);
  ss << buf << "bin_lo,bin_hi,count\n";
  const double width = (scan.max_sigma2 - scan.min_sigma2) / 20.0;
  for (int i = 0; i < 20; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", scan.min_sigma2 + i * width,
                  scan.min_sigma2 + (i + 1) * width, scan.histogram[i]);
    ss << buf;
  }
  write_or_print(out, ss.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sigma2 curvature and level-set quasi-local mass on conformal AH 4-discs"};
  app.require_subcommand(1);

  MetricFlags mf_chy, mf_profile, mf_verify, mf_scan;
  std::string out_chy, out_profile, out_verify, out_scan;

  auto* chy = app.add_subcommand("chy", "solve the constant-sigma2 radial model, write CSV");
  chy->add_option("--beta", mf_chy.beta, "cone parameter (beta >= 0)");
  chy->add_option("--k", mf_chy.k, "first-integral constant (k >= 0)");
  std::vector<double> s_range{0.05, 10.0};
  chy->add_option("--s-range", s_range, "integration range s_start s_end")->expected(2);
  double chy_tol = 1e-13;
  chy->add_option("--tol", chy_tol, "solver tolerance");
  chy->add_option("--out", out_chy, "output CSV path (stdout when omitted)");

  auto* prof = app.add_subcommand("profile", "level-set mass profile m(t), write CSV");
  add_metric_flags(prof, mf_profile);
  double t_min = 0.0, t_max = 0.0;
  int levels = 40, degree = 11;
  prof->add_option("--t-min", t_min, "lowest level (auto range when t-min >= t-max)");
  prof->add_option("--t-max", t_max, "highest level");
  prof->add_option("--levels", levels, "number of levels");
  prof->add_option("--degree", degree, "quadrature exactness degree");
  prof->add_option("--out", out_profile, "output CSV path");

  auto* verify = app.add_subcommand("verify", "full pipeline Penrose report, write JSON");
  add_metric_flags(verify, mf_verify);
  int vlevels = 40, vdegree = 11;
  double vtol = 1e-4;
  verify->add_option("--levels", vlevels, "number of levels");
  verify->add_option("--degree", vdegree, "quadrature exactness degree");
  verify->add_option("--tol", vtol, "verdict tolerance");
  verify->add_option("--out", out_verify, "output JSON path");

  auto* scan = app.add_subcommand("sigma2-scan", "sample sigma1/sigma2 over the disc, write CSV");
  add_metric_flags(scan, mf_scan);
  int samples = 1000;
  double scan_r_lo = 0.02, scan_r_hi = 0.98;
  scan->add_option("--samples", samples, "number of sample points");
  scan->add_option("--r-min", scan_r_lo, "inner sampling radius");
  scan->add_option("--r-max", scan_r_hi, "outer sampling radius");
  scan->add_option("--out", out_scan, "output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message/help
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (chy->parsed()) return cmd_chy(mf_chy, s_range[0], s_range[1], chy_tol, out_chy);
    if (prof->parsed()) return cmd_profile(mf_profile, t_min, t_max, levels, degree, out_profile);
    if (verify->parsed()) return cmd_verify(mf_verify, vlevels, vdegree, vtol, out_verify);
    if (scan->parsed()) return cmd_scan(mf_scan, samples, scan_r_lo, scan_r_hi, out_scan);
  } catch (const sigma2::Error& e) {
    std::cerr << "error (" << sigma2::errc_name(e.code()) << "): " << e.what() << "\n";
    return e.code() == sigma2::errc::invalid_input ? kExitUsage : kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitUsage;
}
