#pragma once

#include <algorithm>
#include <array>
#include <functional>
#include <string>
#include <vector>

#include "dlab/common.hpp"
#include "dlab/system.hpp"

namespace dlab {

// Upper separatrix of Y^2 a/2 + Z(X) = 0, as a table of X(s) with X(0) = pi,
// X -> 0 as s -> -inf and X -> 2 pi as s -> +inf. Z must be <= 0 with its only
// zero at X = 0 (mod 2 pi).
class Separatrix {
 public:
  Separatrix() = default;
  Separatrix(const Trig1& Z, double a, double s_max, double h = 1e-3);

  double X(double s) const;      // clamped outside the table
  double speed(double s) const;  // dX/ds >= 0
  double accel(double s) const;  // d2X/ds2 = -a Z'(X)
  double time_of(double x) const;  // s with X(s) = x, x in (0, 2 pi)
  double rate() const { return rate_; }
  double s_max() const { return s_max_; }

 private:
  Trig1 Z_;
  double a_ = 1, h_ = 1e-3, s_max_ = 0, rate_ = 0;
  std::vector<double> x_, v_;  // nodes s = -s_max + i h
};

// Unperturbed homoclinic family of H0 = sum a_i Y_i^2/2 + Z_i(X_i) in homology class
// sigma = (+-1, +-1): gamma_i(t) = Gamma_i(sigma_i t + tau_i), where tau_i is the time
// coordinate of the starting point on separatrix i. In the flow coordinates (tau1, tau2)
// the vector field of H0_i is sigma_i d/dtau_i.
struct HomoclinicFamily {
  Vec2 a{1, 1};
  Vec2 sigma{1, 1};
  Separatrix sep[2];

  // needs A diagonal and no drift, cubic, coupling or tail
  static HomoclinicFamily from(const MechanicalSystem& h0, Vec2 sigma);
  State state(double tau1, double tau2, double t) const;
  double rate_min() const { return std::min(sep[0].rate(), sep[1].rate()); }
};

struct MelnikovParams {
  double panel = 0.5;     // Gauss-Legendre panel width in t
  double rel_cut = 1e-12; // stop when the integrand is below rel_cut * peak
  bool parallel = true;
};

// M(x, q) = - int (H1(gamma(t)) - H1(fixed point)) dt along the homoclinic through (x, q).
// Values on the grid xs x qs (row-major, q fastest). For a potential perturbation the
// flow-coordinate derivatives are integrated as well:
//   D_i = dM/dtau_i, D_ij = d2M/dtau_i dtau_j.
struct MelnikovField {
  Vec2 sigma{1, 1};
  std::vector<double> xs, qs;
  std::vector<double> values;
  bool has_derivatives = false;
  std::vector<double> D1, D2, D11, D12, D22;
  double tail_cut = 0;       // largest T used
  double tail_estimate = 0;  // worst exponential-envelope bound on the discarded tails
  Report report;

  size_t index(size_t i, size_t j) const { return i * qs.size() + j; }
  double value(size_t i, size_t j) const { return values[index(i, j)]; }
  std::string csv() const;  // x,q,M
};

using Perturbation = std::function<double(const State&)>;

MelnikovField melnikov_evaluate(const HomoclinicFamily& fam, const TrigSeries& Z3, const std::vector<double>& xs,
                                const std::vector<double>& qs, const MelnikovParams& p = {});
MelnikovField melnikov_evaluate(const HomoclinicFamily& fam, const Perturbation& H1, const std::vector<double>& xs,
                                const std::vector<double>& qs, const MelnikovParams& p = {});

// M and its flow-coordinate derivatives at a single point (tau1, tau2); d = {D1, D2, D11, D12, D22}
double melnikov_at(const HomoclinicFamily& fam, const TrigSeries& Z3, double tau1, double tau2,
                   std::array<double, 5>* d = nullptr, double* tail = nullptr, double* t_cut = nullptr,
                   const MelnikovParams& p = {});

struct FlowInvariance {
  double residual = 0;       // max |sigma1 u1 dM/dx + sigma2 u2 dM/dq|, central differences
  double antisymmetry = 0;   // max |grad_{H0,1} M + grad_{H0,2} M| from the integrated derivatives
  double spacing = 0;
  int interior = 0;
};
FlowInvariance check_flow_invariance(const MelnikovField& field, const HomoclinicFamily& fam);

// pointwise singular values of (grad_{H0,i} grad_{H0,j} M)
struct HessianRankScan {
  int max_rank = 0;
  double worst_ratio = 0;  // max sigma_min / scale
  double scale = 0;        // max |entry| over the grid
};
HessianRankScan hessian_rank_scan(const MelnikovField& field, double rel_threshold = 1e-8);

struct MelnikovCritical {
  Vec2 point{0, 0};   // point of the critical orbit nearest to the ball center
  double distance = 0;
  double delta = 0;   // transverse invariant sigma1 tau1 - sigma2 tau2
  Vec2 gradient{0, 0};
  std::array<double, 4> hessian{};
  int rank = 0;
};

// M is invariant under the H0 flow, so critical points come in whole orbits. They are
// counted as orbits meeting the ball; each is located on the transverse invariant delta.
struct CriticalScan {
  std::vector<MelnikovCritical> points;
  double delta_lo = 0, delta_hi = 0;
  double scale = 0;
  Report report;
};
CriticalScan critical_points(const HomoclinicFamily& fam, const TrigSeries& Z3, Vec2 center, double radius,
                             int scan = 256, const MelnikovParams& p = {});

}  // namespace dlab
