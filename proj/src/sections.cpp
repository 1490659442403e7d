#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "dlab/dynamics.hpp"

namespace dlab {

namespace {

constexpr double kPi = std::numbers::pi;

void require_plane(const MechanicalSystem& sys, const HyperbolicData& h, int axis, const char* who) {
  if (!factor_plane_invariant(sys, h, axis))
    throw Error(Module::dynamics, std::string(who) + ": the factor plane is not invariant (coupling present)");
}

// state on the factor plane at X_axis = x with energy E above the fixed point, Y_axis > 0
State on_plane(const MechanicalSystem& sys, const HyperbolicData& h, int axis, double x, double E) {
  State z{h.fixed_point[0], h.fixed_point[1], 0, 0};
  z[axis] = x;
  double a = sys.A[3 * axis];
  double kin = E - (sys.V(z[0], z[1]) - sys.V(h.fixed_point[0], h.fixed_point[1]));
  if (!(kin > 0)) throw Error(Module::dynamics, "energy below the potential on the section");
  z[2 + axis] = std::sqrt(2 * kin / a);
  return z;
}

// 2x2 transverse block (X_b, Y_b) of the Poincare map from z0 to the section X_a = value
struct MapDerivative {
  Eigen::Matrix2d D;
  State end{};
  double time = 0;
};

MapDerivative section_map(const MechanicalSystem& sys, const State& z0, int a, double value, double dt) {
  auto shot = shoot_to_section(sys, z0, 1, a, value, dt, 1e4);
  if (!shot.hit) throw Error(Module::dynamics, "section not reached");
  auto fj = flow_jacobian(sys, z0, 0, shot.time, dt);
  const State& z = fj.z;
  auto v = sys.gradT({z[2], z[3]});
  auto g = sys.gradV(z[0], z[1]);
  State f{v[0], v[1], -g[0], -g[1]};
  if (std::abs(f[a]) < 1e-12) throw Error(Module::dynamics, "section not transverse to the flow");
  // DP = (I - f e_a^t / f_a) Dphi
  Eigen::Matrix4d J;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) J(i, j) = fj.J[4 * i + j];
  Eigen::Matrix4d P = Eigen::Matrix4d::Identity();
  for (int i = 0; i < 4; ++i) P(i, a) -= f[i] / f[a];
  Eigen::Matrix4d DP = P * J;
  int b = 1 - a;
  MapDerivative out;
  out.D << DP(b, b), DP(b, 2 + b), DP(2 + b, b), DP(2 + b, 2 + b);
  out.end = shot.z;
  out.time = shot.time;
  return out;
}

}  // namespace

PeriodFit period_law(const MechanicalSystem& sys, const HyperbolicData& h, int axis, const std::vector<double>& E_list,
                     double dt) {
  require_plane(sys, h, axis, "period_law");
  PeriodFit F;
  F.axis = axis;
  double x0 = h.fixed_point[axis] + kPi;
  for (double E : E_list) {
    if (!(E > 0)) {
      F.failures.push_back("E must be positive");
      continue;
    }
    State z = on_plane(sys, h, axis, x0, E);
    auto r = shoot_to_section(sys, z, 1, axis, x0 + 2 * kPi, dt, 1e4);
    std::ostringstream os;
    if (!r.hit) {
      os << "E=" << E << ": orbit did not return";
      F.failures.push_back(os.str());
      continue;
    }
    if (std::abs(r.z[2 + axis] - z[2 + axis]) > 1e-6 * (1 + std::abs(z[2 + axis]))) {
      os << "E=" << E << ": orbit does not close";
      F.failures.push_back(os.str());
      continue;
    }
    F.E.push_back(E);
    F.T.push_back(r.time);
  }
  size_t n = F.E.size();
  if (n < 2) throw Error(Module::dynamics, "period_law: fewer than two closed orbits");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    double x = std::log(1 / F.E[i]);
    sx += x;
    sy += F.T[i];
    sxx += x * x;
    sxy += x * F.T[i];
  }
  double d = double(n) * sxx - sx * sx;
  F.slope = (double(n) * sxy - sx * sy) / d;
  F.intercept = (sy - F.slope * sx) / double(n);
  double bmin = 1e300, bmax = -1e300;
  for (size_t i = 0; i < n; ++i) {
    double b = F.T[i] - F.slope * std::log(1 / F.E[i]);
    F.b_points.push_back(b);
    bmin = std::min(bmin, b);
    bmax = std::max(bmax, b);
    F.max_residual = std::max(F.max_residual, std::abs(b - F.intercept));
  }
  F.b_spread = bmax - bmin;
  return F;
}

SectionRates section_expansion_rates(const MechanicalSystem& sys, const HyperbolicData& h,
                                     const std::vector<double>& E_list, double zeta, double nu, double dt) {
  // the cylinder factor is the weak mode
  int a = std::abs(h.v2[0]) >= std::abs(h.v2[1]) ? 0 : 1, b = 1 - a;
  require_plane(sys, h, a, "section_expansion_rates");
  if (!(zeta > 0 && zeta <= h.local_radius)) throw Error(Module::dynamics, "zeta must lie in (0, local radius]");
  SectionRates R;
  double xa = h.fixed_point[a];
  double slope_u = h.lambda1 / sys.A[3 * b];  // unstable direction (1, slope_u) in (X_b, Y_b)
  Eigen::Vector2d eu(1, slope_u);
  eu.normalize();
  for (double E : E_list) {
    State zm = on_plane(sys, h, a, xa - zeta, E);
    auto loc = section_map(sys, zm, a, xa + zeta, dt);
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(loc.D);
    R.E.push_back(E);
    R.local_expansion.push_back(svd.singularValues()(0));
    R.local_contraction.push_back(svd.singularValues()(1));
    // a vector nu-tilted from the unstable trace stays close to it
    double c = std::cos(nu), s = std::sin(nu);
    Eigen::Vector2d v(c * eu(0) - s * eu(1), s * eu(0) + c * eu(1));
    Eigen::Vector2d w = loc.D * v;
    double ang = std::acos(std::min(1.0, std::abs(w.normalized().dot(eu))));
    R.angle.push_back(ang);
    // global map around the loop back to Sigma^- shifted by one period
    auto glob = section_map(sys, loc.end, a, xa + 2 * kPi - zeta, dt);
    Eigen::JacobiSVD<Eigen::Matrix2d> sg(glob.D);
    R.global_max.push_back(sg.singularValues()(0));
    R.global_min.push_back(sg.singularValues()(1));
  }
  size_t n = R.E.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    double x = std::log(1 / R.E[i]), y = std::log(R.local_expansion[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  R.slope = n >= 2 ? (double(n) * sxy - sx * sy) / (double(n) * sxx - sx * sx) : 0;
  // c13 from the smallest energy
  size_t k = size_t(std::min_element(R.E.begin(), R.E.end()) - R.E.begin());
  R.c13 = std::max(R.global_max[k], 1 / R.global_min[k]);
  R.global_bounded = true;
  R.nu_parallel = true;
  for (size_t i = 0; i < n; ++i) {
    if (R.global_max[i] > 2 * R.c13 || R.global_min[i] < 1 / (2 * R.c13)) R.global_bounded = false;
    if (R.angle[i] > nu) R.nu_parallel = false;
  }
  double target = h.lambda1 / h.lambda2;
  auto& rep = R.report;
  rep.title = "section expansion rates";
  std::ostringstream os;
  os << "slope " << R.slope << " target " << target;
  rep.le("local_slope", std::abs(R.slope / target - 1), 0.05, os.str());
  rep.flag("global_bounded", R.global_bounded, R.c13, "c13 from the smallest E");
  rep.flag("nu_parallel", R.nu_parallel, nu);
  return R;
}

namespace {

double spectral_norm4(const Eigen::Matrix4d& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(M);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

FlowDifference flow_difference_bound(const MechanicalSystem& sysA, const MechanicalSystem& sysB, double t,
                                     int samples, double y_max, unsigned seed, double dt) {
  FlowDifference F;
  F.t = t;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0, 2 * kPi), uy(-y_max, y_max), us(0, 1);
  // A: sup of the Hessian of H_A; B: sup of |grad (H_B - H_A)|
  for (int n = 0; n < 4096; ++n) {
    double x1 = ux(rng), x2 = ux(rng), s = us(rng);
    Vec2 y{uy(rng), uy(rng)};
    auto HV = sysA.hessV(x1, x2, s);
    Eigen::Matrix4d Hh = Eigen::Matrix4d::Zero();
    Hh(0, 0) = HV[0];
    Hh(0, 1) = Hh(1, 0) = HV[1];
    Hh(1, 1) = HV[3];
    // kinetic Hessian by central differences of gradT (exact for quadratic and cubic T)
    for (int j = 0; j < 2; ++j) {
      Vec2 yp = y, ym = y;
      yp[j] += 1e-4;
      ym[j] -= 1e-4;
      auto gp = sysA.gradT(yp), gm = sysA.gradT(ym);
      for (int i = 0; i < 2; ++i) Hh(2 + i, 2 + j) = (gp[i] - gm[i]) / 2e-4;
    }
    Hh = 0.5 * (Hh + Hh.transpose()).eval();
    F.A = std::max(F.A, spectral_norm4(Hh));
    auto ga = sysA.gradV(x1, x2, s), gb = sysB.gradV(x1, x2, s);
    auto ta = sysA.gradT(y), tb = sysB.gradT(y);
    double d = std::sqrt(std::pow(ga[0] - gb[0], 2) + std::pow(ga[1] - gb[1], 2) + std::pow(ta[0] - tb[0], 2) +
                         std::pow(ta[1] - tb[1], 2));
    F.B = std::max(F.B, d);
  }
  F.bound = F.A > 0 ? F.B / F.A * (std::exp(2 * F.A * t) - std::exp(F.A * t)) : 0;

  std::vector<State> z0(static_cast<size_t>(samples));
  for (auto& z : z0) z = {ux(rng), ux(rng), uy(rng), uy(rng)};
  std::vector<double> ds(size_t(samples), 0), dj(size_t(samples), 0);
  std::vector<char> bad(size_t(samples), 0);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < samples; ++i) {
    try {
      auto fa = flow_jacobian(sysA, z0[size_t(i)], 0, t, dt);
      auto fb = flow_jacobian(sysB, z0[size_t(i)], 0, t, dt);
      double s = 0, j = 0;
      for (int k = 0; k < 4; ++k) s += std::pow(fa.z[k] - fb.z[k], 2);
      for (int k = 0; k < 16; ++k) j += std::pow(fa.J[k] - fb.J[k], 2);
      ds[size_t(i)] = std::sqrt(s);
      dj[size_t(i)] = std::sqrt(j);
    } catch (const Error&) {
      bad[size_t(i)] = 1;
    }
  }
  for (int i = 0; i < samples; ++i) {
    if (bad[size_t(i)]) {
      ++F.excluded;
      continue;
    }
    ++F.samples;
    F.max_state_diff = std::max(F.max_state_diff, ds[size_t(i)]);
    F.max_jac_diff = std::max(F.max_jac_diff, dj[size_t(i)]);
  }
  double worst = std::max(F.max_state_diff, F.max_jac_diff);
  F.slack = worst > 0 ? F.bound / worst : INFINITY;
  auto& r = F.report;
  r.title = "Gronwall flow difference";
  r.le("state_difference", F.max_state_diff, F.bound);
  r.le("jacobian_difference", F.max_jac_diff, F.bound, "Frobenius norm");
  r.le("slack_at_least_2", 2, F.slack);
  return F;
}

}  // namespace dlab
