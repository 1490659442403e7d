#pragma once

#include <array>
#include <string>
#include <vector>

#include "dlab/common.hpp"
#include "dlab/system.hpp"

namespace dlab {

// lambda1 >= lambda2 are hyperbolic rates: sqrt of the eigenvalues of A (-Hess V).
// For A = I and Z_i = c_i (cos X_i - 1) the rates are sqrt(c_i).
struct HyperbolicData {
  Vec2 fixed_point{0, 0};
  double lambda1 = 0, lambda2 = 0;
  Vec2 v1{1, 0}, v2{0, 1};  // configuration eigenvectors, v^t A^-1 v = 1
  // unstable u_i and stable s_i directions in (X1, X2, Y1, Y2), unit amplitude in the
  // hyperbolic coordinates alpha_i, beta_i
  std::array<State, 2> unstable{}, stable{};
  Mat2 hessV{};
  double local_radius = 0.3;
  Report report;
};

struct HyperbolicParams {
  int scan = 128;  // grid per axis for the maximum search
  double c8 = 0;   // required gap lambda1 - lambda2 (0: not asserted)
  double c9 = 0;   // required ratio lambda1 / lambda2 - 1
  double local_radius = 0.3;
};

HyperbolicData hyperbolic_fixed_point(const MechanicalSystem& sys, const HyperbolicParams& p = {});
// max |finite-difference Hessian - analytic Hessian| at X with central step h
double fd_hessian_error(const MechanicalSystem& sys, const Vec2& X, double h = 1e-4);

// Darboux coordinates with quadratic part sum lambda_i (P_i^2 - Q_i^2) / 2, and the
// 1/sqrt2 rotation alpha = (Q + P)/sqrt2 (unstable), beta = (P - Q)/sqrt2 (stable).
struct LocalLinearForm {
  HyperbolicData hyp;
  std::array<double, 16> T{};     // columns Q1, Q2, P1, P2 in (X1, X2, Y1, Y2)
  std::array<double, 16> Tinv{};
  std::array<double, 16> quad{};  // T^t Hess(H) T; diag(-l1, -l2, l1, l2) in exact arithmetic
  double residual = 0;            // sup |H - H2| / sup |H2| on the sphere of radius r
  std::array<double, 4> to_QP(const State& z) const;
  State from_QP(const std::array<double, 4>& w) const;
  // (alpha1, alpha2, beta1, beta2)
  std::array<double, 4> to_hyperbolic(const State& z) const;
};

LocalLinearForm local_linear_form(const MechanicalSystem& sys, const HyperbolicData& h, double r = 0.3,
                                  int samples = 2000);

// Orbit piece shot to a section X_axis = value, carrying the action int Y.dX.
struct ShotResult {
  State z{};
  double time = 0;
  double action = 0;
  bool hit = false;
};
// direction +1 integrates forward, -1 backward; the action then runs along the path
// actually traversed, so it is S(end) - S(start) for a Lagrangian graph either way.
ShotResult shoot_to_section(const MechanicalSystem& sys, const State& z0, double direction, int axis, double value,
                            double dt, double t_max, Trajectory* record = nullptr);

// plane {X_other = x*_other, Y_other = 0} of the factor `axis` is invariant
bool factor_plane_invariant(const MechanicalSystem& sys, const HyperbolicData& h, int axis, double tol = 1e-12);

enum class Branch { unstable, stable };

// Trace of the one-dimensional invariant manifold of the fixed point inside the plane of one
// factor (X_axis, Y_axis), with the other coordinate frozen at the fixed point. Requires that
// plane to be invariant (no coupling force across it).
struct GraphFunction {
  int axis = 0;
  Branch which = Branch::unstable;
  std::vector<double> x, S, dS;
  double hj_residual = 0;  // max |H(X, dS) - 0| on the nodes
};
GraphFunction manifold_graph(const MechanicalSystem& sys, const HyperbolicData& h, int axis, Branch which, double x_lo,
                             double x_hi, int n, double dt = 1e-3);

struct HomoclinicResult {
  Vec2 g{1, 0};
  int section_axis = 0;        // axis of g: section {X_axis = x* + pi}
  double minimizer = 0;        // transverse coordinate on the section
  double splitting_value = 0;  // S^u - S^s at the minimizer
  double splitting_d2 = 0;     // its second derivative along the section
  std::vector<double> scan_x, scan_splitting;
  Trajectory orbit;            // launch near x* to the section, then on to the launch near x* + 2 pi g
  double decay_rate_back = 0;  // measured exponential approach rates of the two ends
  double decay_rate_fwd = 0;
  Report report;
};

struct HomoclinicParams {
  double window = 0.05;  // half-width of the transverse scan on the section
  int scan = 21;
  double dt = 2e-3;
  double t_max = 200;
  double fd_step = 2e-3;
};

// g in {(1,0), (0,1), (-1,0), (0,-1)}
HomoclinicResult find_homoclinic(const MechanicalSystem& sys, const HyperbolicData& h, Vec2 g,
                                 const HomoclinicParams& p = {});

struct PeriodFit {
  int axis = 1;
  std::vector<double> E, T, b_points;
  double slope = 0, intercept = 0, max_residual = 0, b_spread = 0;
  std::vector<std::string> failures;
};
// Return times of the rotational orbits Y_axis^2 a/2 + Z_axis(X_axis) = E on the invariant
// plane of one factor, fitted as T = slope ln(1/E) + intercept.
PeriodFit period_law(const MechanicalSystem& sys, const HyperbolicData& h, int axis, const std::vector<double>& E_list,
                     double dt = 1e-3);

struct SectionRates {
  std::vector<double> E, local_expansion, local_contraction, global_max, global_min, angle;
  double slope = 0;  // d log(local expansion) / d log(1/E)
  double c13 = 0;
  bool global_bounded = false;
  bool nu_parallel = false;
  Report report;
};
// Local map Sigma^- = {X_a = -zeta} -> Sigma^+ = {X_a = +zeta} past the fixed point along the
// periodic orbit of energy E in factor a (the weak one), and the global map back around.
SectionRates section_expansion_rates(const MechanicalSystem& sys, const HyperbolicData& h,
                                     const std::vector<double>& E_list, double zeta = 0.2, double nu = 0.1,
                                     double dt = 1e-3);

struct FlowDifference {
  double A = 0, B = 0, t = 0, bound = 0;
  double max_state_diff = 0, max_jac_diff = 0;
  int samples = 0, excluded = 0;
  double slack = 0;  // bound / max(measured)
  Report report;
};
// sysB = sysA + tail; A, B measured by sampling over |X| in the torus and |Y| <= y_max.
FlowDifference flow_difference_bound(const MechanicalSystem& sysA, const MechanicalSystem& sysB, double t,
                                     int samples = 1000, double y_max = 1.0, unsigned seed = 1, double dt = 1e-3);

Report check_U5prime(double lambda1, double lambda2, int k, double tol = 1e-9);

struct U6Result {
  double exponent_out = 0, C_hat = 0;
  double exponent_in = 0, C_check = 0;
  int points_out = 0, points_in = 0;
  Report report;
};
U6Result check_U6_U7(const MechanicalSystem& sys, const LocalLinearForm& L, const HomoclinicResult& hc,
                     double c8_cap = 1e6);

}  // namespace dlab
