#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dlab/dynamics.hpp"

namespace dlab {

namespace {

constexpr double kPi = std::numbers::pi;

// Y . dX/dt
double action_rate(const MechanicalSystem& sys, const State& z) {
  auto v = sys.gradT({z[2], z[3]});
  return z[2] * v[0] + z[3] * v[1];
}

// d/dt of action_rate along the flow; gradT is at most quadratic in Y, so the central
// difference below is exact up to rounding
double action_rate_dot(const MechanicalSystem& sys, const State& z, double s) {
  Vec2 y{z[2], z[3]};
  auto g = sys.gradV(z[0], z[1], s);
  Vec2 yd{-g[0], -g[1]};
  auto v = sys.gradT(y);
  double n = std::hypot(yd[0], yd[1]);
  if (n == 0) return 0;
  double e = 1e-3 * (1 + std::hypot(y[0], y[1])) / n;
  auto vp = sys.gradT({y[0] + e * yd[0], y[1] + e * yd[1]});
  auto vm = sys.gradT({y[0] - e * yd[0], y[1] - e * yd[1]});
  double dv0 = (vp[0] - vm[0]) / (2 * e), dv1 = (vp[1] - vm[1]) / (2 * e);
  return yd[0] * v[0] + yd[1] * v[1] + y[0] * dv0 + y[1] * dv1;
}

// trapezoid with the endpoint-derivative correction: fourth order
double step_action(const MechanicalSystem& sys, const State& a, const State& b, double s, double h) {
  return h / 2 * (action_rate(sys, a) + action_rate(sys, b)) +
         h * h / 12 * (action_rate_dot(sys, a, s) - action_rate_dot(sys, b, s + h));
}

// fraction theta of the step h at which X_axis hits value
double refine(const MechanicalSystem& sys, const State& z, double s, double h, int axis, double value) {
  auto F = [&](double th) { return yoshida_step(sys, z, s, th * h)[axis] - value; };
  double a = 0, b = 1, fa = z[axis] - value, fb = F(1);
  int side = 0;
  for (int it = 0; it < 100; ++it) {
    double c = (a * fb - b * fa) / (fb - fa);
    double fc = F(c);
    if (fc == 0 || std::abs(b - a) < 1e-16) return c;
    if ((fc < 0) == (fb < 0)) {
      b = c;
      fb = fc;
      if (side == -1) fa /= 2;
      side = -1;
    } else {
      a = c;
      fa = fc;
      if (side == 1) fb /= 2;
      side = 1;
    }
    if (std::abs(fc) < 1e-15 * (1 + std::abs(value))) return c;
  }
  return (a + b) / 2;
}

void push(Trajectory* tr, const MechanicalSystem& sys, double t, const State& z) {
  if (!tr) return;
  tr->times.push_back(t);
  tr->states.push_back(z);
  tr->energies.push_back(sys.H(z, t));
}

double norm4(const State& z) { return std::sqrt(z[0] * z[0] + z[1] * z[1] + z[2] * z[2] + z[3] * z[3]); }

}  // namespace

ShotResult shoot_to_section(const MechanicalSystem& sys, const State& z0, double direction, int axis, double value,
                            double dt, double t_max, Trajectory* record) {
  if (!(dt > 0)) throw Error(Module::dynamics, "dt must be positive");
  ShotResult r;
  State z = z0;
  double s = 0, h = direction > 0 ? dt : -dt;
  push(record, sys, 0, z);
  double fprev = z[axis] - value;
  long steps = long(std::ceil(t_max / dt));
  for (long i = 0; i < steps; ++i) {
    State zn = yoshida_step(sys, z, s, h);
    for (double v : zn)
      if (!std::isfinite(v)) throw Error(Module::dynamics, "integration overflow while shooting to a section");
    double fn = zn[axis] - value;
    if (fprev != 0 && (fprev < 0) != (fn < 0)) {
      double th = refine(sys, z, s, h, axis, value);
      State ze = yoshida_step(sys, z, s, th * h);
      r.action += step_action(sys, z, ze, s, th * h);
      r.time = s + th * h;
      r.z = ze;
      r.z[axis] = value;
      r.hit = true;
      push(record, sys, r.time, r.z);
      return r;
    }
    r.action += step_action(sys, z, zn, s, h);
    z = zn;
    s += h;
    fprev = fn;
    push(record, sys, s, z);
  }
  r.z = z;
  r.time = s;
  return r;
}

bool factor_plane_invariant(const MechanicalSystem& sys, const HyperbolicData& h, int axis, double tol) {
  int o = 1 - axis;
  if (sys.A[1] != 0 || sys.A[2] != 0) return false;
  if (sys.drift[o] != 0) return false;
  if (sys.cubic_scale != 0) return false;
  double scale = 0, worst = 0;
  for (int i = 0; i < 512; ++i) {
    Vec2 X = h.fixed_point;
    X[axis] += 2 * kPi * i / 512;
    auto g = sys.gradV(X[0], X[1]);
    scale = std::max(scale, std::abs(g[axis]));
    worst = std::max(worst, std::abs(g[o]));
  }
  return worst <= tol * (1 + scale);
}

GraphFunction manifold_graph(const MechanicalSystem& sys, const HyperbolicData& h, int axis, Branch which, double x_lo,
                             double x_hi, int n, double dt) {
  if (!factor_plane_invariant(sys, h, axis))
    throw Error(Module::dynamics, "manifold_graph: the factor plane is not invariant (coupling present)");
  double xs = h.fixed_point[axis];
  if (!(x_lo < xs && xs < x_hi && x_hi - xs < 2 * kPi && xs - x_lo < 2 * kPi) || n < 3)
    throw Error(Module::dynamics, "manifold_graph: domain must contain the fixed point and stay within one period");
  int o = 1 - axis;
  double a = sys.A[3 * axis];
  double c = -sys.hessV(h.fixed_point[0], h.fixed_point[1])[3 * axis];
  if (!(c > 0)) throw Error(Module::dynamics, "manifold_graph: factor is not hyperbolic");
  double k = std::sqrt(a * c) / a * (which == Branch::unstable ? 1 : -1);
  double dir = which == Branch::unstable ? 1 : -1;
  double rho = 1e-6 * h.local_radius;
  double V0 = sys.V(h.fixed_point[0], h.fixed_point[1]);

  GraphFunction G;
  G.axis = axis;
  G.which = which;
  G.x.resize(n);
  G.S.assign(n, NAN);
  G.dS.assign(n, NAN);
  for (int i = 0; i < n; ++i) G.x[i] = x_lo + (x_hi - x_lo) * i / (n - 1);

  for (int side : {1, -1}) {
    State z{};
    z[o] = h.fixed_point[o];
    z[axis] = xs + side * rho;
    z[2 + axis] = k * side * rho;
    double S = 0.5 * side * rho * z[2 + axis];
    double budget = 400;
    std::vector<int> idx;
    for (int i = 0; i < n; ++i) {
      double d = (G.x[i] - xs) * side;
      if (d > rho) idx.push_back(i);
      else if (d >= 0) {
        G.S[i] = 0.5 * k * d * d;
        G.dS[i] = k * (G.x[i] - xs);
      }
    }
    if (side == -1) std::reverse(idx.begin(), idx.end());
    for (int i : idx) {
      auto r = shoot_to_section(sys, z, dir, axis, G.x[i], dt, budget);
      if (!r.hit) {
        std::ostringstream os;
        os << "manifold_graph: fold or unreachable node at X = " << G.x[i];
        throw Error(Module::dynamics, os.str());
      }
      budget -= std::abs(r.time);
      S += r.action;
      z = r.z;
      G.S[i] = S;
      G.dS[i] = z[2 + axis];
    }
  }
  for (int i = 0; i < n; ++i) {
    Vec2 X = h.fixed_point;
    X[axis] = G.x[i];
    double H = 0.5 * a * G.dS[i] * G.dS[i] + sys.V(X[0], X[1]) - V0;
    G.hj_residual = std::max(G.hj_residual, std::abs(H));
  }
  return G;
}

namespace {

struct Leg {
  double xo = 0, yo = 0, S = 0, eta = 0;
  State z{};
  bool hit = false;
};

struct HomoclinicSetup {
  const MechanicalSystem* sys;
  int ax, o;
  double section;
  State base_u, base_s, dir_u, dir_s;  // launch = base + eta * dir
  Vec2 fp_u, fp_s;
  double dt, t_max;
  double amp = 1;  // rough d X_o / d eta at the section

  Leg shoot(bool unstable, double eta, Trajectory* rec = nullptr) const {
    const State& b = unstable ? base_u : base_s;
    const State& d = unstable ? dir_u : dir_s;
    const Vec2& fp = unstable ? fp_u : fp_s;
    State z;
    for (int i = 0; i < 4; ++i) z[i] = b[i] + eta * d[i];
    // linear graph Y = K (X - x*), K symmetric: S = (X - x*).Y / 2
    double S0 = 0.5 * ((z[0] - fp[0]) * z[2] + (z[1] - fp[1]) * z[3]);
    auto r = shoot_to_section(*sys, z, unstable ? 1 : -1, ax, section, dt, t_max, rec);
    Leg L;
    L.hit = r.hit;
    L.z = r.z;
    L.xo = r.z[o];
    L.yo = r.z[2 + o];
    L.S = S0 + r.action;
    L.eta = eta;
    return L;
  }

  // eta with X_o at the section equal to target
  Leg solve(bool unstable, double target) const {
    double e0 = 0, e1 = 1e-3 / amp;
    Leg l0 = shoot(unstable, e0), l1 = shoot(unstable, e1);
    if (!l0.hit || !l1.hit) throw Error(Module::dynamics, "homoclinic shooting missed the section");
    double f0 = l0.xo - target, f1 = l1.xo - target;
    for (int it = 0; it < 60; ++it) {
      if (std::abs(f1) < 1e-13) return l1;
      if (f1 == f0) break;
      double e2 = e1 - f1 * (e1 - e0) / (f1 - f0);
      Leg l2 = shoot(unstable, e2);
      if (!l2.hit) throw Error(Module::dynamics, "homoclinic shooting missed the section");
      e0 = e1;
      f0 = f1;
      e1 = e2;
      f1 = l2.xo - target;
      l1 = l2;
    }
    if (std::abs(f1) > 1e-10) throw Error(Module::dynamics, "homoclinic shooting did not converge");
    return l1;
  }

  double dsplit(double x) const { return solve(true, x).yo - solve(false, x).yo; }
};

double fit_rate(const std::vector<double>& t, const std::vector<double>& logd) {
  size_t n = t.size();
  if (n < 2) return 0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += t[i];
    sy += logd[i];
    sxx += t[i] * t[i];
    sxy += t[i] * logd[i];
  }
  return (double(n) * sxy - sx * sy) / (double(n) * sxx - sx * sx);
}

}  // namespace

HomoclinicResult find_homoclinic(const MechanicalSystem& sys, const HyperbolicData& h, Vec2 g,
                                 const HomoclinicParams& p) {
  bool ok = (std::abs(g[0]) == 1 && g[1] == 0) || (g[0] == 0 && std::abs(g[1]) == 1);
  if (!ok) throw Error(Module::dynamics, "homology class must be one of (+-1, 0), (0, +-1)");
  HomoclinicResult R;
  R.g = g;
  int ax = g[0] != 0 ? 0 : 1, o = 1 - ax;
  double sgn = g[ax] > 0 ? 1 : -1;
  R.section_axis = ax;
  // eigen-mode travelling along the axis of g
  int mg = std::abs(h.v1[ax]) >= std::abs(h.v2[ax]) ? 0 : 1, mo = 1 - mg;
  double lam[2] = {h.lambda1, h.lambda2};
  double kappa = lam[mo] / lam[mg];
  // launch radius: the transverse amplification (pi / rho)^kappa stays below 1e6
  double rho = std::max(1e-6, kPi * std::pow(1e-6, 1 / kappa));

  HomoclinicSetup H;
  H.sys = &sys;
  H.ax = ax;
  H.o = o;
  H.section = h.fixed_point[ax] + sgn * kPi;
  H.dt = p.dt;
  H.t_max = p.t_max;
  H.fp_u = h.fixed_point;
  H.fp_s = {h.fixed_point[0] + 2 * kPi * g[0], h.fixed_point[1] + 2 * kPi * g[1]};
  State ug = h.unstable[mg], uo = h.unstable[mo], sg = h.stable[mg], so = h.stable[mo];
  auto flip = [](State& v) {
    for (auto& x : v) x = -x;
  };
  if (ug[ax] * sgn < 0) flip(ug);
  if (sg[ax] * sgn > 0) flip(sg);
  if (uo[o] < 0) flip(uo);
  if (so[o] < 0) flip(so);
  State base_u{H.fp_u[0], H.fp_u[1], 0, 0}, base_s{H.fp_s[0], H.fp_s[1], 0, 0};
  for (int i = 0; i < 4; ++i) {
    base_u[i] += rho * ug[i];
    base_s[i] += rho * sg[i];
  }
  H.base_u = base_u;
  H.base_s = base_s;
  H.dir_u = uo;
  H.dir_s = so;
  H.amp = std::pow(kPi / rho, kappa);

  double xc = h.fixed_point[o];
  std::vector<double> dsp;
  for (int i = 0; i < p.scan; ++i) {
    double x = xc + p.window * (2.0 * i / (p.scan - 1) - 1);
    Leg u = H.solve(true, x), s = H.solve(false, x);
    R.scan_x.push_back(x);
    R.scan_splitting.push_back(u.S - s.S);
    dsp.push_back(u.yo - s.yo);
  }
  std::vector<int> brackets;
  for (int i = 0; i + 1 < p.scan; ++i)
    if (dsp[i] < 0 && dsp[i + 1] >= 0) brackets.push_back(i);
  if (brackets.empty()) throw Error(Module::dynamics, "no splitting minimizer in the section window");
  if (brackets.size() > 1) {
    std::ostringstream os;
    os << "ambiguous homoclinic: " << brackets.size() << " splitting minimizers on the section";
    throw Error(Module::dynamics, os.str());
  }
  double a = R.scan_x[brackets[0]], b = R.scan_x[brackets[0] + 1];
  double fa = dsp[brackets[0]], fb = dsp[brackets[0] + 1];
  double x = a;
  int side = 0;
  for (int it = 0; it < 60; ++it) {
    x = (a * fb - b * fa) / (fb - fa);
    double fx = H.dsplit(x);
    if (std::abs(fx) < 1e-12 || b - a < 1e-14) break;
    if ((fx < 0) == (fa < 0)) {
      a = x;
      fa = fx;
      if (side == 1) fb /= 2;
      side = 1;
    } else {
      b = x;
      fb = fx;
      if (side == -1) fa /= 2;
      side = -1;
    }
  }
  R.minimizer = x;
  Leg u = H.solve(true, x), s = H.solve(false, x);
  R.splitting_value = u.S - s.S;
  double grad = u.yo - s.yo;
  R.splitting_d2 = (H.dsplit(x + p.fd_step) - H.dsplit(x - p.fd_step)) / (2 * p.fd_step);

  // the orbit: replay the two converged legs with recording
  Trajectory tu, ts;
  H.shoot(true, u.eta, &tu);
  H.shoot(false, s.eta, &ts);
  double Tu = tu.times.back(), Ts = -ts.times.back();
  R.orbit = tu;
  for (size_t i = ts.states.size() - 1; i-- > 0;) {
    R.orbit.times.push_back(Tu + Ts + ts.times[i]);
    R.orbit.states.push_back(ts.states[i]);
    R.orbit.energies.push_back(ts.energies[i]);
  }

  // decay toward the fixed point at both ends
  auto rate = [&](const Trajectory& tr, const Vec2& fp) {
    std::vector<double> t, ld;
    for (size_t i = 0; i < tr.states.size(); ++i) {
      State d = tr.states[i];
      d[0] -= fp[0];
      d[1] -= fp[1];
      double n = norm4(d);
      if (n > 10 * rho && n < 0.1) {
        t.push_back(std::abs(tr.times[i]));
        ld.push_back(std::log(n));
      }
    }
    // both legs are recorded running away from their fixed point
    return fit_rate(t, ld);
  };
  R.decay_rate_back = rate(tu, H.fp_u);
  R.decay_rate_fwd = rate(ts, H.fp_s);

  auto& rep = R.report;
  rep.title = "homoclinic";
  rep.flag("unique_section_minimizer", true, double(brackets.size()));
  rep.le("splitting_gradient", std::abs(grad), 1e-9);
  rep.lt("splitting_d2_positive", 0, R.splitting_d2, "uniqueness certificate up to grid resolution");
  double lo = 0.9 * h.lambda2, hi = 1.1 * h.lambda1;
  rep.flag("alpha_limit_rate", R.decay_rate_back >= lo && R.decay_rate_back <= hi, R.decay_rate_back);
  rep.flag("omega_limit_rate", R.decay_rate_fwd >= lo && R.decay_rate_fwd <= hi, R.decay_rate_fwd);
  double E = sys.H(u.z) - sys.V(h.fixed_point[0], h.fixed_point[1]);
  rep.le("energy_on_section", std::abs(E), 1e-9);
  return R;
}

}  // namespace dlab
