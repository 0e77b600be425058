#include "sigma2/chy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "sigma2/errors.hpp"

namespace sigma2 {

double first_integral(double v, double v_s) {
  const double q = v_s * v_s - 1.0;
  return q * q - std::exp(4.0 * v);
}

double radial_mass(double v, double v_s) { return first_integral(v, v_s) / 20.0; }

double beta_of_k(double k) {
  if (k < 0.0) fail(errc::invalid_input, "beta_of_k: k must be >= 0");
  return k / (std::sqrt(k + 1.0) + 1.0);  // sqrt(k+1) - 1, stable near k = 0
}

double k_of_beta(double beta) {
  if (beta < 0.0) fail(errc::invalid_input, "k_of_beta: beta must be >= 0");
  return beta * (beta + 2.0);
}

namespace {

// Dormand-Prince 5(4) with standard step-size control. State dimension is
// tiny (1 or 2), so a fixed-size array keeps this allocation-free.
template <int N>
struct Dopri5 {
  using State = std::array<double, N>;
  using Rhs = std::function<void(double, const State&, State&)>;

  // Appends every accepted (s, y) to the callback. Throws stiffness when the
  // step size underflows; the caller may reinterpret that near a known
  // singular manifold.
  static void integrate(const Rhs& rhs, double s0, double s1, State y, double rtol, double atol,
                        double max_step,
                        const std::function<void(double, const State&)>& on_accept) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640,
                            e5 = -2187.0 / 6784 + 92097.0 / 339200, e6 = 11.0 / 84 - 187.0 / 2100,
                            e7 = -1.0 / 40;

    double s = s0;
    double h = std::min(max_step, (s1 - s0) / 16.0);
    const double h_min = 1e-14 * (s1 - s0);
    State k1, k2, k3, k4, k5, k6, k7, yt, ynew;
    rhs(s, y, k1);
    on_accept(s, y);
    int rejects_in_a_row = 0;
    while (s < s1) {
      h = std::min(h, s1 - s);
      if (h < h_min) fail(errc::stiffness, "ode step size underflow");

      for (int i = 0; i < N; ++i) yt[i] = y[i] + h * a21 * k1[i];
      rhs(s + c2 * h, yt, k2);
      for (int i = 0; i < N; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      rhs(s + c3 * h, yt, k3);
      for (int i = 0; i < N; ++i) yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      rhs(s + c4 * h, yt, k4);
      for (int i = 0; i < N; ++i)
        yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      rhs(s + c5 * h, yt, k5);
      for (int i = 0; i < N; ++i)
        yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      rhs(s + h, yt, k6);
      for (int i = 0; i < N; ++i)
        ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
      rhs(s + h, ynew, k7);

      double err = 0.0;
      bool finite = true;
      for (int i = 0; i < N; ++i) {
        const double ei =
            h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        if (!std::isfinite(ei) || !std::isfinite(ynew[i])) finite = false;
        err += (ei / sc) * (ei / sc);
      }
      err = std::sqrt(err / N);

      if (finite && err <= 1.0) {
        s += h;
        y = ynew;
        k1 = k7;  // FSAL
        on_accept(s, y);
        const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-16), -0.2), 1.0, 5.0);
        h = std::min(h * fac, max_step);
        rejects_in_a_row = 0;
      } else {
        const double fac =
            finite ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 0.9) : 0.2;
        h *= fac;
        if (++rejects_in_a_row > 200) fail(errc::stiffness, "ode step rejected repeatedly");
      }
    }
  }
};

// Boundary expansion v = -log sinh s + f s^4 + (2/21) f s^6 + O(s^8); the
// s^6 coefficient is forced by the equation once f is given and keeps the
// seeded first integral accurate to O(s^7).
double expansion_v(double s, double f_seed) {
  const double s2 = s * s, s4 = s2 * s2;
  return -std::log(std::sinh(s)) + f_seed * s4 * (1.0 + (2.0 / 21.0) * s2);
}
double expansion_vs(double s, double f_seed) {
  const double s2 = s * s, s3 = s2 * s;
  return -std::cosh(s) / std::sinh(s) + f_seed * s3 * (4.0 + (12.0 / 21.0) * s2);
}
double expansion_vss(double s, double f_seed) {
  const double csch = 1.0 / std::sinh(s);
  const double s2 = s * s;
  return csch * csch + f_seed * s2 * (12.0 + (60.0 / 21.0) * s2);
}

// Hermite cubic for y given (y, y') at bracketing nodes.
double hermite(double s, double s0, double s1, double y0, double y1, double d0, double d1) {
  const double h = s1 - s0;
  const double t = (s - s0) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 +
         (t3 - t2) * h * d1;
}

// Quintic Hermite from (y, y', y'') at both ends; returns value and
// derivative. The two-sided second-derivative data keeps the interpolant's
// curvature consistent with the stored v_ss to O(h^4).
void hermite5(double s, double s0, double s1, double y0, double y1, double d0, double d1,
              double c0, double c1, double& val, double& deriv) {
  const double h = s1 - s0;
  const double t = (s - s0) / h;
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double H0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
  const double H1 = t - 6 * t3 + 8 * t4 - 3 * t5;
  const double H2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5);
  const double H3 = 10 * t3 - 15 * t4 + 6 * t5;
  const double H4 = -4 * t3 + 7 * t4 - 3 * t5;
  const double H5 = 0.5 * (t3 - 2 * t4 + t5);
  val = H0 * y0 + h * H1 * d0 + h * h * H2 * c0 + H3 * y1 + h * H4 * d1 + h * h * H5 * c1;
  const double G0 = -30 * t2 + 60 * t3 - 30 * t4;
  const double G1 = 1 - 18 * t2 + 32 * t3 - 15 * t4;
  const double G2 = 0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t4);
  const double G3 = 30 * t2 - 60 * t3 + 30 * t4;
  const double G4 = -12 * t2 + 28 * t3 - 15 * t4;
  const double G5 = 0.5 * (3 * t2 - 8 * t3 + 5 * t4);
  deriv = (G0 * y0 + G3 * y1) / h + G1 * d0 + G4 * d1 + h * (G2 * c0 + G5 * c1);
}

// Locates the grid interval containing s; grid must be non-empty and sorted.
std::size_t locate(const std::vector<double>& s, double x) {
  auto it = std::upper_bound(s.begin(), s.end(), x);
  if (it == s.begin()) return 0;
  std::size_t i = static_cast<std::size_t>(it - s.begin()) - 1;
  return std::min(i, s.size() - 2);
}

void check_solve_preconditions(double s_start, double s_end, double tol) {
  if (!(s_start > 0.0) || !(s_end > s_start))
    fail(errc::invalid_input, "need 0 < s_start < s_end");
  if (!(tol > 0.0)) fail(errc::invalid_input, "tol must be positive");
}

}  // namespace

RadialState ChySolution::eval(double s) const {
  RadialState st;
  if (s <= 0.0) fail(errc::domain_error, "radial evaluation needs s > 0");
  if (s < grid.s.front()) {
    st.v = expansion_v(s, f_seed);
    st.v_s = expansion_vs(s, f_seed);
    st.v_ss = expansion_vss(s, f_seed);
    return st;
  }
  if (s > grid.s.back()) {
    st.v = grid.v.back() + grid.v_s.back() * (s - grid.s.back());
    st.v_s = grid.v_s.back();
  } else {
    const std::size_t i = locate(grid.s, s);
    double unused;
    hermite5(s, grid.s[i], grid.s[i + 1], grid.v[i], grid.v[i + 1], grid.v_s[i],
             grid.v_s[i + 1], grid.v_ss[i], grid.v_ss[i + 1], st.v, unused);
    // The first integral fixes v_s from v, so the conserved quantity is
    // exact at every evaluated point.
    st.v_s = -std::sqrt(1.0 + std::sqrt(k * k + std::exp(4.0 * st.v)));
  }
  st.v_ss = std::exp(4.0 * st.v) / (st.v_s * st.v_s - 1.0);
  return st;
}

RadialState RotSymSolution::eval(double s) const {
  RadialState st;
  if (s <= 0.0) fail(errc::domain_error, "radial evaluation needs s > 0");
  if (s < grid.s.front()) {
    st.v = expansion_v(s, f_seed);
    st.v_s = expansion_vs(s, f_seed);
    st.v_ss = expansion_vss(s, f_seed);
    return st;
  }
  double q;
  if (s > grid.s.back()) {
    st.v = grid.v.back() + grid.v_s.back() * (s - grid.s.back());
    q = fi.back();
  } else {
    const std::size_t i = locate(grid.s, s);
    double unused;
    hermite5(s, grid.s[i], grid.s[i + 1], grid.v[i], grid.v[i + 1], grid.v_s[i],
             grid.v_s[i + 1], grid.v_ss[i], grid.v_ss[i + 1], st.v, unused);
    q = hermite(s, grid.s[i], grid.s[i + 1], fi[i], fi[i + 1], fi_s[i], fi_s[i + 1]);
  }
  const double e4v = std::exp(4.0 * st.v);
  st.v_s = -std::sqrt(1.0 + std::sqrt(std::max(q + e4v, 0.0)));
  const double c = c_profile(std::min(s, grid.s.back()));
  st.v_ss = c * e4v / (st.v_s * st.v_s - 1.0);
  return st;
}

ChySolution solve_chy(double k, double s_start, double s_end, double tol) {
  if (k < 0.0) fail(errc::invalid_input, "solve_chy: k must be >= 0");
  check_solve_preconditions(s_start, s_end, tol);
  const double rtol = std::max(tol, 1e-14);

  ChySolution sol;
  sol.k = k;
  sol.beta = beta_of_k(k);
  sol.f_seed = -k * k / 20.0;

  auto rhs = [k](double, const std::array<double, 1>& y, std::array<double, 1>& dy) {
    dy[0] = -std::sqrt(1.0 + std::sqrt(k * k + std::exp(4.0 * y[0])));
  };
  std::array<double, 1> y0{expansion_v(s_start, sol.f_seed)};
  Dopri5<1>::integrate(rhs, s_start, s_end, y0, rtol, rtol, 0.1,
                       [&](double s, const std::array<double, 1>& y) {
                         sol.grid.s.push_back(s);
                         sol.grid.v.push_back(y[0]);
                       });

  sol.grid.v_s.resize(sol.grid.size());
  sol.grid.v_ss.resize(sol.grid.size());
  for (std::size_t i = 0; i < sol.grid.size(); ++i) {
    const double v = sol.grid.v[i];
    const double vs = -std::sqrt(1.0 + std::sqrt(k * k + std::exp(4.0 * v)));
    sol.grid.v_s[i] = vs;
    sol.grid.v_ss[i] = std::exp(4.0 * v) / (vs * vs - 1.0);
    if (!(vs <= -1.0)) fail(errc::numeric_failure, "solve_chy: left the negative cone");
    if (i > 0 && !(v < sol.grid.v[i - 1]))
      fail(errc::numeric_failure, "solve_chy: profile not strictly decreasing");
  }
  sol.beta_numeric = -sol.grid.v_s.back() - 1.0;
  return sol;
}

RotSymSolution solve_rotsym_sigma2(const std::function<double(double)>& c_profile, double f_seed,
                                   double s_start, double s_end, double tol, double delta_cone) {
  check_solve_preconditions(s_start, s_end, tol);
  if (f_seed > 0.0) fail(errc::invalid_input, "solve_rotsym_sigma2: f_seed must be <= 0");
  for (int i = 0; i <= 256; ++i) {
    const double s = s_start + (s_end - s_start) * i / 256.0;
    if (!(c_profile(s) >= 1.0))
      fail(errc::invalid_input, "solve_rotsym_sigma2: c(s) must be >= 1 on [s_start, s_end]");
  }
  const double rtol = std::max(tol, 1e-14);

  RotSymSolution sol;
  sol.c_profile = c_profile;
  sol.f_seed = f_seed;

  // State (v, q) with q = (v_s^2-1)^2 - e^{4v}; cone violation is
  // q + e^{4v} -> 0. NaN makes the controller reject and shrink, and the
  // underflow diagnosis below turns that into a typed error.
  const double q_floor = delta_cone * delta_cone;
  auto rhs = [&](double s, const std::array<double, 2>& y, std::array<double, 2>& dy) {
    const double e4v = std::exp(4.0 * y[0]);
    const double qq = y[1] + e4v;
    // Second clause: q ~ -e^{4v} means (v_s^2-1)^2 is a catastrophic
    // cancellation, i.e. the true solution has crossed the cone boundary
    // even though the computed difference is still positive noise.
    if (!(qq > q_floor) || (y[1] < 0.0 && qq < 1e-10 * e4v)) {
      dy[0] = dy[1] = std::numeric_limits<double>::quiet_NaN();
      return;
    }
    const double vs = -std::sqrt(1.0 + std::sqrt(qq));
    dy[0] = vs;
    dy[1] = 4.0 * vs * (c_profile(s) - 1.0) * e4v;
  };
  std::array<double, 2> y0{expansion_v(s_start, f_seed),
                           first_integral(expansion_v(s_start, f_seed),
                                          expansion_vs(s_start, f_seed))};
  try {
    Dopri5<2>::integrate(rhs, s_start, s_end, y0, rtol, rtol, 0.1,
                         [&](double s, const std::array<double, 2>& y) {
                           sol.grid.s.push_back(s);
                           sol.grid.v.push_back(y[0]);
                           sol.fi.push_back(y[1]);
                         });
  } catch (const Error& e) {
    if (e.code() == errc::stiffness && !sol.fi.empty()) {
      const double e4v = std::exp(4.0 * sol.grid.v.back());
      const double qq = sol.fi.back() + e4v;
      if (qq < 1e6 * q_floor || (sol.fi.back() < 0.0 && qq < 1e-8 * e4v))
        fail(errc::cone_violation,
             "solve_rotsym_sigma2: v_s^2 - 1 collapsed (solution left the negative cone) near s = " +
                 std::to_string(sol.grid.s.back()));
    }
    throw;
  }

  sol.grid.v_s.resize(sol.grid.size());
  sol.grid.v_ss.resize(sol.grid.size());
  sol.fi_s.resize(sol.grid.size());
  for (std::size_t i = 0; i < sol.grid.size(); ++i) {
    const double e4v = std::exp(4.0 * sol.grid.v[i]);
    const double qq = sol.fi[i] + e4v;
    if (!(qq > q_floor))
      fail(errc::cone_violation, "solve_rotsym_sigma2: cone condition v_s^2 > 1 failed at a node");
    const double vs = -std::sqrt(1.0 + std::sqrt(qq));
    const double c = c_profile(sol.grid.s[i]);
    sol.grid.v_s[i] = vs;
    sol.grid.v_ss[i] = c * e4v / (vs * vs - 1.0);
    sol.fi_s[i] = 4.0 * vs * (c - 1.0) * e4v;
  }
  sol.beta = -sol.grid.v_s.back() - 1.0;
  return sol;
}

void write_radial_csv(std::ostream& os, const RadialGrid& grid) {
  os << "s,r,v,v_s,first_integral,radial_mass\n";
  char buf[512];
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = grid.s[i], v = grid.v[i], vs = grid.v_s[i];
    const double fi = first_integral(v, vs);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s, std::exp(-s), v, vs,
                  fi, fi / 20.0);
    os << buf;
  }
}

}  // namespace sigma2
