#ifndef SIGMA2_CHY_HPP
#define SIGMA2_CHY_HPP

#include <functional>
#include <iosfwd>
#include <vector>

namespace sigma2 {

// First integral of the constant-sigma2 radial equation:
//   (v_s^2 - 1) v_ss = e^{4v}   has   (v_s^2 - 1)^2 - e^{4v} = k^2.
double first_integral(double v, double v_s);

// Rotationally symmetric quasi-local mass m(s) = first_integral / 20.
double radial_mass(double v, double v_s);

// beta = sqrt(k+1) - 1 and its inverse k = beta (beta + 2).
double beta_of_k(double k);
double k_of_beta(double beta);

// One interpolated sample of a radial profile.
struct RadialState {
  double v = 0.0;
  double v_s = 0.0;
  double v_ss = 0.0;
};

// Shared grid storage for radial solutions: strictly increasing s with the
// profile and its derivatives at every accepted solver step.
struct RadialGrid {
  std::vector<double> s;
  std::vector<double> v;
  std::vector<double> v_s;
  std::vector<double> v_ss;

  std::size_t size() const { return s.size(); }
};

// The constant-sigma2 radial solution for a given first-integral constant k.
// Between grid nodes, v is cubic-Hermite interpolated and v_s, v_ss are
// recovered from the first integral and the ODE, so the conserved quantity
// holds exactly at every evaluated point. Below the seeded s the boundary
// expansion v = -log sinh s + f_seed s^4 is used; beyond the grid the profile
// continues linearly (the cone regime, where v_s has converged).
class ChySolution {
 public:
  double k = 0.0;
  double beta = 0.0;          // sqrt(k+1) - 1
  double beta_numeric = 0.0;  // -v_s(s_end) - 1, cross-check
  double f_seed = 0.0;        // -k^2/20
  RadialGrid grid;

  RadialState eval(double s) const;
};

// Radial solution with prescribed sigma2 = (3/2) c(s), c >= 1. The solver
// integrates the pair (v, q) with q = (v_s^2-1)^2 - e^{4v}, whose evolution
// q' = 4 v_s (c-1) e^{4v} is the conservation law deformed by c; for c == 1
// the invariant is preserved bit-exactly. v_s and v_ss are recovered from
// (v, q) and the ODE.
class RotSymSolution {
 public:
  std::function<double(double)> c_profile;
  double f_seed = 0.0;
  double beta = 0.0;  // -v_s(s_end) - 1
  RadialGrid grid;
  std::vector<double> fi;    // q at the nodes
  std::vector<double> fi_s;  // q' at the nodes

  RadialState eval(double s) const;
};

// Integrates the first-order reduction v_s = -sqrt(1 + sqrt(k^2 + e^{4v}))
// with adaptive Dormand-Prince 5(4), seeded at s_start from the boundary
// expansion. The first-order form keeps the first integral exact by
// construction.
ChySolution solve_chy(double k, double s_start = 0.05, double s_end = 10.0, double tol = 1e-13);

// Integrates v_ss = c(s) e^{4v}/(v_s^2 - 1) as a second-order system. Stops
// with a cone-violation error if v_s^2 - 1 falls to delta_cone: the right
// side blows up there and the solution has left the negative cone.
RotSymSolution solve_rotsym_sigma2(const std::function<double(double)>& c_profile, double f_seed,
                                   double s_start = 0.05, double s_end = 10.0, double tol = 1e-13,
                                   double delta_cone = 1e-8);

// CSV with columns s, r, v, v_s, first_integral, radial_mass (17 significant
// digits, header row mandatory).
void write_radial_csv(std::ostream& os, const RadialGrid& grid);

}  // namespace sigma2

#endif
