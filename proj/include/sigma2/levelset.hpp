#ifndef SIGMA2_LEVELSET_HPP
#define SIGMA2_LEVELSET_HPP

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sigma2/geometry.hpp"
#include "sigma2/quadrature.hpp"

namespace sigma2 {

// One star-shaped component of a level set L(t) = {u = t}, sampled on the
// quadrature directions: radius, |grad u|, mean curvature and the radial
// graph area element r^3 sqrt(1 + |grad_{S^3} r|^2 / r^2) per node.
struct LevelSetSample {
  double t = 0.0;
  Point4 center;
  std::vector<double> radius;
  std::vector<double> grad_norm;
  std::vector<double> mean_curv;
  std::vector<double> area_weight;
  std::vector<double> node_weights;  // copied from the quadrature; sum to 1

  double node_weight(std::size_t j) const { return node_weights[j]; }
};

// Level-set functionals at one level. All averaged integrals carry the
// normalized fint convention (1/|S^3| times the geometric integral).
struct LevelQuantities {
  double t = 0.0;
  double z = 0.0;   // (fint |grad u|^3 dl)^{1/3}
  double P = 0.0;   // fint H |grad u|^2 dl
  double D = 0.0;   // (1/2) P + (1/2) z^3
  double C = 0.0;   // e^{4t} B
  double A = 0.0;   // fint_{S(t)} e^{4u} dx (NaN when the core is outside the domain)
  double B = 0.0;   // fint_{S(t)} dx
  double m = 0.0;   // (1/5)[(2/3)D + (4/9)Dz + z^4/36 - C]
  double m_alt = 0.0;  // (1/5)[z^4/4 + (2/9)zP + z^3/3 + P/3 - C], must match m
  double area = 0.0;   // fint dl
  int component_count = 1;
};

struct GapRecord {
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::string reason;
};

struct MassProfile {
  std::vector<LevelQuantities> rows;  // strictly increasing t
  std::vector<GapRecord> gaps;
  std::string metric_descriptor;
  std::string quadrature_descriptor;
};

// A star center with the radial bracket used for root solves about it.
struct LevelFrame {
  Point4 center;
  double r_lo = 0.0;
  double r_hi = 0.0;
};

struct MonotonicityReport {
  double min_difference = 0.0;
  double worst_t_lo = 0.0;
  double worst_t_hi = 0.0;
  bool pass = false;
};

// Relative discrepancies of the co-area/divergence identities at one level,
// with derivatives taken as 4th-order centered differences of step dt.
struct CoareaReport {
  double t = 0.0, dt = 0.0;
  double a_prime_fd = 0.0, a_prime_level = 0.0, rel_a = 0.0;
  double b_prime_fd = 0.0, b_prime_level = 0.0, rel_b = 0.0;
  double c_prime_fd = 0.0, c_prime_identity = 0.0, rel_c = 0.0;
  double d_jump = 0.0, d_shell_integral = 0.0, rel_d = 0.0;
  double d_prime_fd = 0.0, d_prime_bound = 0.0;  // bound = (3/2) A'
};

struct AmGmReport {
  double lhs = 0.0;  // 4 C(t)
  double rhs = 0.0;  // (1/3)(2 z A' + (2/3) z' fint |sigma1(Atilde)| |grad u|)
  double slack_rel = 0.0;
};

// Solves u(center + r theta) = t for r in the bracket: a 64-interval sign
// scan, bisection to 1e-3 relative, then Newton polish with the jet's radial
// derivative. Exactly one sign change is required; zero raises no-root, more
// raise multi-root (the level set is not star-shaped about this center).
double solve_radius(const ConformalMetric& metric, const Vec4& direction, double t,
                    const Point4& center, double r_lo, double r_hi);

// Star centers and brackets for the level t: the origin frame for
// boundary-side levels, one frame per cone for singular-side levels. Raises
// no-root/multi-root when the level is in a topology transition.
std::vector<LevelFrame> level_frames(const ConformalMetric& metric, double t,
                                     const SphericalQuadrature& quad);

LevelSetSample sample_level(const ConformalMetric& metric, double t,
                            const SphericalQuadrature& quad, const LevelFrame& frame);
// Convenience overload with the default bracket for the given center.
LevelSetSample sample_level(const ConformalMetric& metric, double t,
                            const SphericalQuadrature& quad, const Point4& center);

// fint_{S(t)} dx: sum over components of the quadrature average of r^4/4.
double volume_of_sublevel(const ConformalMetric& metric, double t,
                          const SphericalQuadrature& quad);

LevelQuantities level_quantities(std::span<const LevelSetSample> samples, double volume_B,
                                 double volume_A = std::nan(""));
LevelQuantities level_quantities(const LevelSetSample& sample, double volume_B);

struct ProfileOptions {
  int threads = 0;  // 0 = hardware concurrency (capped)
};

// LevelQuantities per level; levels that fail (topology transitions, escaped
// brackets, degenerate gradients) are recorded as gaps and skipped.
MassProfile mass_profile(const ConformalMetric& metric, std::span<const double> t_list,
                         const SphericalQuadrature& quad, const ProfileOptions& opts = {});

MonotonicityReport monotonicity_check(const MassProfile& profile, double tol);

CoareaReport coarea_checks(const ConformalMetric& metric, double t,
                           const SphericalQuadrature& quad, double dt);

AmGmReport amgm_check(const ConformalMetric& metric, double t, const SphericalQuadrature& quad,
                      double dt);

// Isoperimetric slack (fint dl)^4 - 64 B^3 in normalized units; >= 0 up to
// roundoff for every valid level, equality on round spheres.
double isoperimetric_slack(const LevelQuantities& q);

// CSV columns t,z,P,D,C,A,B,m,component_count; 17 significant digits; gaps
// appear in t-order as lines "# gap <t_lo> <t_hi> <reason>".
void write_profile_csv(std::ostream& os, const MassProfile& profile);

}  // namespace sigma2

#endif
