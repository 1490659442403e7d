#pragma once

#include <array>
#include <string>
#include <vector>

#include "dlab/trig.hpp"

namespace dlab {

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<double, 4>;  // row-major, symmetric where it matters

// (X1, X2, Y1, Y2)
using State = std::array<double, 4>;

// H = T(Y) + drift.Y + Z1(X1) + Z2(X2) + eps Z3(X1,X2) + tail_amp R(X, S)
// with T(Y) = 1/2 <Y, A Y> + (cubic_scale / 6) C(Y, Y, Y). R's k3 is the
// S-frequency (period 1 in S).
struct MechanicalSystem {
  Mat2 A{1, 0, 0, 1};
  Trig1 Z1, Z2;
  TrigSeries Z3;
  double eps = 0;
  TrigSeries tail;
  double tail_amp = 0;
  Vec2 drift{0, 0};
  std::array<double, 8> cubic{};  // C_ijk at index 4i+2j+k
  double cubic_scale = 0;

  double V(double x1, double x2, double s = 0) const;
  Vec2 gradV(double x1, double x2, double s = 0) const;
  Mat2 hessV(double x1, double x2, double s = 0) const;
  double T(const Vec2& y) const;
  Vec2 gradT(const Vec2& y) const;  // includes drift
  double H(const State& z, double s = 0) const;
  bool autonomous() const { return tail_amp == 0 || tail.modes.empty(); }
  void validate() const;  // A symmetric positive definite
};

struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<double> energies;

  // cubic Hermite interpolation between samples
  State at(double t, const MechanicalSystem& sys) const;
  double max_energy_drift() const;
  std::string csv() const;  // t,X1,X2,Y1,Y2,H
};

// One kick-drift-kick step. The tail is evaluated at the time of each half
// kick (s and s + dt), which keeps the scheme symmetric in extended phase space.
State leapfrog_step(const MechanicalSystem& sys, const State& z, double s, double dt);
// Fourth-order Yoshida composition of leapfrog steps.
State yoshida_step(const MechanicalSystem& sys, const State& z, double s, double dt);

enum class Scheme { leapfrog, yoshida4 };

Trajectory integrate(const MechanicalSystem& sys, const State& z0, double t0, double t1, double dt,
                     Scheme scheme = Scheme::leapfrog, int record_every = 1);

// Final state only; cheap inner loop for shooting and section maps.
State flow(const MechanicalSystem& sys, const State& z0, double t0, double t1, double dt,
           Scheme scheme = Scheme::yoshida4);

// Flow together with the 4x4 Jacobian of the discrete map, propagated step by
// step through the exact tangent map of each substep.
struct FlowWithJacobian {
  State z;
  std::array<double, 16> J;
};
FlowWithJacobian flow_jacobian(const MechanicalSystem& sys, const State& z0, double t0, double t1, double dt);

// canonical two-form on R^4 with ordering (X1, X2, Y1, Y2): sum dY_i ^ dX_i
double two_form(const State& u, const State& v);

MechanicalSystem uncoupled_pendulums(double lambda1, double lambda2);

}  // namespace dlab
