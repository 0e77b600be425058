#include "sigma2/metrics.hpp"

#include <cmath>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sigma2/errors.hpp"

namespace sigma2 {

using ordered_json = nlohmann::ordered_json;

double CProfile::operator()(double s) const { return base + amp * std::exp(-rate * s); }

namespace {

// Jet of a purely radial u from (u_r, u_rr): hess = u_rr P + (u_r/r)(I - P).
Jet2 radial_jet(const Vec4& x, double r, double u, double ur, double urr) {
  Jet2 jet;
  jet.value = u;
  if (r < 1e-12) {
    // Smooth radial center: u_r -> 0 and u_rr = lim u_r/r, so hess = u_rr I.
    for (int i = 0; i < 4; ++i) jet.hess.at(i, i) = urr;
    return jet;
  }
  const Vec4 xh = (1.0 / r) * x;
  const double tang = ur / r;
  for (int i = 0; i < 4; ++i) {
    jet.grad[i] = ur * xh[i];
    for (int j = i; j < 4; ++j) {
      double h = (urr - tang) * xh[i] * xh[j];
      if (i == j) h += tang;
      jet.hess.at(i, j) = h;
    }
  }
  return jet;
}

double w_value(double r2) { return std::log(2.0) - std::log1p(-r2); }
double w_r(double r, double r2) { return 2.0 * r / (1.0 - r2); }
double w_rr(double r2) {
  const double d = 1.0 - r2;
  return 2.0 * (1.0 + r2) / (d * d);
}

struct OdeRadial {
  // Either backing solution; exactly one engaged.
  std::shared_ptr<const ChySolution> chy;
  std::shared_ptr<const RotSymSolution> rot;

  RadialState eval(double s) const { return chy ? chy->eval(s) : rot->eval(s); }

  double value(const Point4& p) const {
    const double s = -std::log(p.r());
    return eval(s).v + s;
  }
  Jet2 jet(const Point4& p) const {
    const double r = p.r();
    const double s = -std::log(r);
    const RadialState st = eval(s);
    const double ur = -(st.v_s + 1.0) / r;
    const double urr = (st.v_ss + st.v_s + 1.0) / (r * r);
    return radial_jet(p.x, r, st.v + s, ur, urr);
  }
};

// u = W(r) + Q(r) (a . x) with W = w + a0 s^4 and Q = s^4 / r; closed-form
// first and second derivatives of both factors.
struct PerturbedAh {
  double a0 = 0.0;
  Vec4 a{0, 0, 0, 0};

  double value(const Point4& p) const {
    const double r = p.r();
    const double r2 = r * r;
    const double s = -std::log(r);
    const double s4 = s * s * s * s;
    return w_value(r2) + s4 * a0 + (s4 / r) * dot(a, p.x);
  }
  Jet2 jet(const Point4& p) const {
    const double r = p.r();
    const double r2 = r * r;
    const double s = -std::log(r);
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
    const Vec4 xh = (1.0 / r) * p.x;
    const double L = dot(a, p.x);

    const double Wr = w_r(r, r2) - 4.0 * a0 * s3 / r;
    const double Wrr = w_rr(r2) + 4.0 * a0 * s2 * (3.0 + s) / r2;
    const double Q = s4 / r;
    const double Qr = -s3 * (4.0 + s) / r2;
    const double Qrr = 2.0 * s2 * (6.0 + 6.0 * s + s2) / (r2 * r);

    Jet2 jet;
    jet.value = w_value(r2) + s4 * a0 + Q * L;
    const double tang = Wr / r;
    for (int i = 0; i < 4; ++i) {
      jet.grad[i] = Wr * xh[i] + Qr * xh[i] * L + Q * a[i];
      for (int j = i; j < 4; ++j) {
        double h = (Wrr - tang) * xh[i] * xh[j];
        if (i == j) h += tang;
        h += Qrr * xh[i] * xh[j] * L;
        h += Qr * L * ((i == j ? 1.0 : 0.0) - xh[i] * xh[j]) / r;
        h += Qr * (xh[i] * a[j] + xh[j] * a[i]);
        jet.hess.at(i, j) = h;
      }
    }
    return jet;
  }
};

// C^2 cutoff: 1 on [0,r1], 0 on [r2,inf), quintic smoothstep between.
void quintic_cut(double r, double r1, double r2, double& chi, double& chip, double& chipp) {
  if (r <= r1) { chi = 1.0; chip = 0.0; chipp = 0.0; return; }
  if (r >= r2) { chi = 0.0; chip = 0.0; chipp = 0.0; return; }
  const double d = 1.0 / (r2 - r1);
  const double t = (r - r1) * d;
  const double t2 = t * t, t3 = t2 * t;
  chi = 1.0 - (10.0 * t3 - 15.0 * t3 * t + 6.0 * t3 * t2);
  chip = -(30.0 * t2 - 60.0 * t3 + 30.0 * t2 * t2) * d;
  chipp = -(60.0 * t - 180.0 * t2 + 120.0 * t3) * d * d;
}

struct MultiCone {
  std::vector<Cone> cones;
  PerturbedAh pert;  // carries a0, a (all zero allowed)
  bool has_f = false;
  double r1 = 0.35, r2 = 0.7;

  double log_sum(const Point4& p) const {
    double G = 0.0;
    for (const auto& c : cones) G += c.beta * std::log(norm(p.x - c.position.x));
    return G;
  }
  double value(const Point4& p) const {
    const double r = p.r();
    double chi, chip, chipp;
    quintic_cut(r, r1, r2, chi, chip, chipp);
    const double base = has_f ? pert.value(p) : w_value(r * r);
    return chi * log_sum(p) + base;
  }
  Jet2 jet(const Point4& p) const {
    const double r = p.r();
    double chi, chip, chipp;
    quintic_cut(r, r1, r2, chi, chip, chipp);

    double G = 0.0;
    Vec4 Gg{0, 0, 0, 0};
    Sym4 Gh;
    for (const auto& c : cones) {
      const Vec4 d = p.x - c.position.x;
      const double rho2 = dot(d, d);
      G += c.beta * 0.5 * std::log(rho2);
      for (int i = 0; i < 4; ++i) {
        Gg[i] += c.beta * d[i] / rho2;
        for (int j = i; j < 4; ++j)
          Gh.at(i, j) += c.beta * (((i == j ? 1.0 : 0.0) - 2.0 * d[i] * d[j] / rho2) / rho2);
      }
    }

    Jet2 jet = has_f ? pert.jet(p) : radial_jet(p.x, r, w_value(r * r), w_r(r, r * r), w_rr(r * r));
    jet.value += chi * G;
    if (chi != 0.0 || chip != 0.0) {
      Vec4 xh{0, 0, 0, 0};
      if (r > 1e-12) xh = (1.0 / r) * p.x;
      for (int i = 0; i < 4; ++i) {
        jet.grad[i] += chip * xh[i] * G + chi * Gg[i];
        for (int j = i; j < 4; ++j) {
          double h = chipp * xh[i] * xh[j] * G;
          if (r > 1e-12) h += chip * G * ((i == j ? 1.0 : 0.0) - xh[i] * xh[j]) / r;
          h += chip * (xh[i] * Gg[j] + xh[j] * Gg[i]);
          h += chi * Gh(i, j);
          jet.hess.at(i, j) += h;
        }
      }
    }
    return jet;
  }
};

}  // namespace

ConformalMetric make_hyperbolic() {
  auto value = [](const Point4& p) { return w_value(p.r() * p.r()); };
  auto jet = [](const Point4& p) {
    const double r = p.r();
    const double r2 = r * r;
    return radial_jet(p.x, r, w_value(r2), w_r(r, r2), w_rr(r2));
  };
  ConformalMetric m(value, jet, {}, true);
  m.set_boundary_f([](const Vec4&) { return 0.0; });
  m.set_descriptor("hyperbolic");
  return m;
}

ConformalMetric make_chy_from_k(double k, double s_start, double s_end, double tol) {
  auto sol = std::make_shared<const ChySolution>(solve_chy(k, s_start, s_end, tol));
  OdeRadial backend{sol, nullptr};
  std::vector<Cone> cones;
  if (sol->beta > 1e-6) cones.push_back({Point4{}, sol->beta});
  ConformalMetric m([backend](const Point4& p) { return backend.value(p); },
                    [backend](const Point4& p) { return backend.jet(p); }, std::move(cones), true);
  const double f = sol->f_seed;
  m.set_boundary_f([f](const Vec4&) { return f; });
  std::ostringstream d;
  d << "chy(k=" << k << ",beta=" << sol->beta << ")";
  m.set_descriptor(d.str());
  return m;
}

ConformalMetric make_chy_from_beta(double beta, double s_start, double s_end, double tol) {
  return make_chy_from_k(k_of_beta(beta), s_start, s_end, tol);
}

ConformalMetric make_rotsym_sigma2(const CProfile& c, double f_seed, double s_start, double s_end,
                                   double tol) {
  auto sol = std::make_shared<const RotSymSolution>(
      solve_rotsym_sigma2([c](double s) { return c(s); }, f_seed, s_start, s_end, tol));
  OdeRadial backend{nullptr, sol};
  std::vector<Cone> cones;
  if (sol->beta > 1e-6) cones.push_back({Point4{}, sol->beta});
  ConformalMetric m([backend](const Point4& p) { return backend.value(p); },
                    [backend](const Point4& p) { return backend.jet(p); }, std::move(cones), true);
  m.set_boundary_f([f_seed](const Vec4&) { return f_seed; });
  std::ostringstream d;
  d << "rotsym_sigma2(c=" << c.base << "+" << c.amp << "*exp(-" << c.rate << "s),f_seed=" << f_seed
    << ",beta=" << sol->beta << ")";
  m.set_descriptor(d.str());
  return m;
}

ConformalMetric make_perturbed_ah(const std::array<double, 5>& a) {
  PerturbedAh backend;
  backend.a0 = a[0];
  backend.a = {a[1], a[2], a[3], a[4]};
  ConformalMetric m([backend](const Point4& p) { return backend.value(p); },
                    [backend](const Point4& p) { return backend.jet(p); }, {}, true);
  const Vec4 lin = backend.a;
  const double a0 = a[0];
  m.set_boundary_f([a0, lin](const Vec4& th) { return a0 + dot(lin, th); });
  m.set_domain(1e-3, 1.0 - 1e-12);
  m.set_origin_scan_lo(0.45);
  m.set_volume_integrable(false);
  std::ostringstream d;
  d << "perturbed_ah(a0=" << a[0] << ",a=[" << a[1] << "," << a[2] << "," << a[3] << "," << a[4]
    << "])";
  m.set_descriptor(d.str());
  return m;
}

ConformalMetric make_multicone(const std::vector<Cone>& cones, const std::array<double, 5>& a,
                               double r1, double r2) {
  if (!(0.0 < r1 && r1 < r2 && r2 < 1.0)) fail(errc::invalid_input, "multicone: need 0 < r1 < r2 < 1");
  for (const auto& c : cones)
    if (c.position.r() > r1 - 0.05)
      fail(errc::invalid_input, "multicone: cones must sit inside the cutoff, |p| < r1 - 0.05");
  MultiCone backend;
  backend.cones = cones;
  backend.pert.a0 = a[0];
  backend.pert.a = {a[1], a[2], a[3], a[4]};
  backend.has_f = a[0] != 0.0 || a[1] != 0.0 || a[2] != 0.0 || a[3] != 0.0 || a[4] != 0.0;
  backend.r1 = r1;
  backend.r2 = r2;
  ConformalMetric m([backend](const Point4& p) { return backend.value(p); },
                    [backend](const Point4& p) { return backend.jet(p); }, cones, true);
  const double a0 = a[0];
  const Vec4 lin{a[1], a[2], a[3], a[4]};
  m.set_boundary_f([a0, lin](const Vec4& th) { return a0 + dot(lin, th); });
  if (backend.has_f) {
    m.set_domain(1e-3, 1.0 - 1e-12);
    m.set_origin_scan_lo(0.45);
    m.set_volume_integrable(false);
  }
  std::ostringstream d;
  d << "multi_cone(";
  for (const auto& c : cones) d << "beta=" << c.beta << "@r=" << c.position.r() << ";";
  d << "a0=" << a[0] << ")";
  m.set_descriptor(d.str());
  return m;
}

ConformalMetric build_metric(const MetricSpec& spec) {
  if (spec.family == "hyperbolic") return make_hyperbolic();
  if (spec.family == "chy") return make_chy_from_k(spec.k, spec.s_start, spec.s_end, spec.tol);
  if (spec.family == "rotsym_sigma2")
    return make_rotsym_sigma2(spec.c, spec.f_seed, spec.s_start, spec.s_end, spec.tol);
  if (spec.family == "perturbed_ah") return make_perturbed_ah(spec.f_coeffs);
  if (spec.family == "multi_cone")
    return make_multicone(spec.cones, spec.f_coeffs, spec.r1, spec.r2);
  fail(errc::invalid_input, "unknown metric family: " + spec.family);
}

std::string MetricSpec::to_json() const {
  ordered_json j;
  j["schema"] = 1;
  j["family"] = family;
  if (family == "chy") {
    j["beta"] = beta;
    j["k"] = k;
  }
  if (family == "rotsym_sigma2") {
    j["c_base"] = c.base;
    j["c_amp"] = c.amp;
    j["c_rate"] = c.rate;
    j["f_seed"] = f_seed;
  }
  if (family == "perturbed_ah" || family == "multi_cone") j["f_coeffs"] = f_coeffs;
  if (family == "multi_cone") {
    ordered_json cl = ordered_json::array();
    for (const auto& c : cones) {
      ordered_json jc;
      jc["p"] = c.position.x;
      jc["beta"] = c.beta;
      cl.push_back(jc);
    }
    j["cones"] = cl;
    j["r1"] = r1;
    j["r2"] = r2;
  }
  if (family == "chy" || family == "rotsym_sigma2") {
    j["s_start"] = s_start;
    j["s_end"] = s_end;
    j["tol"] = tol;
  }
  return j.dump(2);
}

MetricSpec MetricSpec::from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    fail(errc::invalid_input, std::string("metric spec: bad JSON: ") + e.what());
  }
  if (j.value("schema", 0) != 1) fail(errc::invalid_input, "metric spec: unsupported schema");
  MetricSpec spec;
  spec.family = j.value("family", "");
  if (spec.family == "chy") {
    if (j.contains("k")) {
      spec.k = j["k"].get<double>();
      spec.beta = beta_of_k(spec.k);
    } else if (j.contains("beta")) {
      spec.beta = j["beta"].get<double>();
      spec.k = k_of_beta(spec.beta);
    } else {
      fail(errc::invalid_input, "metric spec: chy needs beta or k");
    }
  } else if (spec.family == "rotsym_sigma2") {
    spec.c.base = j.value("c_base", 1.0);
    spec.c.amp = j.value("c_amp", 0.0);
    spec.c.rate = j.value("c_rate", 1.0);
    spec.f_seed = j.value("f_seed", 0.0);
  } else if (spec.family == "perturbed_ah" || spec.family == "multi_cone") {
    if (j.contains("f_coeffs")) {
      auto v = j["f_coeffs"].get<std::vector<double>>();
      if (v.size() != 5) fail(errc::invalid_input, "metric spec: f_coeffs needs 5 entries");
      std::copy(v.begin(), v.end(), spec.f_coeffs.begin());
    }
    if (spec.family == "multi_cone") {
      for (const auto& jc : j.value("cones", ordered_json::array())) {
        Cone c;
        auto p = jc.at("p").get<std::vector<double>>();
        if (p.size() != 4) fail(errc::invalid_input, "metric spec: cone position needs 4 entries");
        std::copy(p.begin(), p.end(), c.position.x.begin());
        c.beta = jc.at("beta").get<double>();
        spec.cones.push_back(c);
      }
      spec.r1 = j.value("r1", 0.35);
      spec.r2 = j.value("r2", 0.7);
    }
  } else if (spec.family != "hyperbolic") {
    fail(errc::invalid_input, "metric spec: unknown family " + spec.family);
  }
  spec.s_start = j.value("s_start", 0.05);
  spec.s_end = j.value("s_end", 10.0);
  spec.tol = j.value("tol", 1e-13);
  return spec;
}

std::string MetricSpec::describe() const {
  std::ostringstream d;
  d << family;
  if (family == "chy") d << "(beta=" << beta << ")";
  if (family == "rotsym_sigma2")
    d << "(c=" << c.base << "+" << c.amp << "*exp(-" << c.rate << "s),f_seed=" << f_seed << ")";
  if (family == "perturbed_ah") d << "(a0=" << f_coeffs[0] << ")";
  if (family == "multi_cone") d << "(" << cones.size() << " cones)";
  return d.str();
}

}  // namespace sigma2
