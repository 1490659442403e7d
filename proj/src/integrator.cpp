#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "dlab/common.hpp"
#include "dlab/system.hpp"

namespace dlab {

double MechanicalSystem::V(double x1, double x2, double s) const {
  double v = Z1.value(x1) + Z2.value(x2);
  if (eps != 0) v += eps * Z3.value(x1, x2);
  if (tail_amp != 0) v += tail_amp * tail.value(x1, x2, s);
  return v;
}

Vec2 MechanicalSystem::gradV(double x1, double x2, double s) const {
  Vec2 g{Z1.d1(x1), Z2.d1(x2)};
  if (eps != 0) {
    auto g3 = Z3.grad(x1, x2);
    g[0] += eps * g3[0];
    g[1] += eps * g3[1];
  }
  if (tail_amp != 0) {
    auto gt = tail.grad(x1, x2, s);
    g[0] += tail_amp * gt[0];
    g[1] += tail_amp * gt[1];
  }
  return g;
}

Mat2 MechanicalSystem::hessV(double x1, double x2, double s) const {
  Mat2 h{Z1.d2(x1), 0, 0, Z2.d2(x2)};
  auto add = [&](const std::array<double, 3>& q, double w) {
    h[0] += w * q[0];
    h[1] += w * q[1];
    h[2] += w * q[1];
    h[3] += w * q[2];
  };
  if (eps != 0) add(Z3.hess(x1, x2), eps);
  if (tail_amp != 0) add(tail.hess(x1, x2, s), tail_amp);
  return h;
}

double MechanicalSystem::T(const Vec2& y) const {
  double t = 0.5 * (A[0] * y[0] * y[0] + 2 * A[1] * y[0] * y[1] + A[3] * y[1] * y[1]);
  t += drift[0] * y[0] + drift[1] * y[1];
  if (cubic_scale != 0) {
    double c = 0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) c += cubic[4 * i + 2 * j + k] * y[i] * y[j] * y[k];
    t += cubic_scale / 6 * c;
  }
  return t;
}

Vec2 MechanicalSystem::gradT(const Vec2& y) const {
  Vec2 g{A[0] * y[0] + A[1] * y[1] + drift[0], A[2] * y[0] + A[3] * y[1] + drift[1]};
  if (cubic_scale != 0)
    for (int i = 0; i < 2; ++i) {
      double c = 0;
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) c += cubic[4 * i + 2 * j + k] * y[j] * y[k];
      g[i] += cubic_scale / 2 * c;
    }
  return g;
}

namespace {

Mat2 hessT(const MechanicalSystem& sys, const Vec2& y) {
  Mat2 h = sys.A;
  if (sys.cubic_scale != 0)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double c = 0;
        for (int k = 0; k < 2; ++k) c += sys.cubic[4 * i + 2 * j + k] * y[k];
        h[2 * i + j] += sys.cubic_scale * c;
      }
  return h;
}

// Yoshida fourth-order coefficients
const double kW1 = 1 / (2 - std::cbrt(2.0));
const double kW0 = -std::cbrt(2.0) * kW1;

void check_finite(const State& z) {
  for (double v : z)
    if (!std::isfinite(v)) throw Error(Module::dynamics, "integration overflow: non-finite state");
}

}  // namespace

double MechanicalSystem::H(const State& z, double s) const { return T({z[2], z[3]}) + V(z[0], z[1], s); }

void MechanicalSystem::validate() const {
  if (std::abs(A[1] - A[2]) > 1e-14 * (std::abs(A[0]) + std::abs(A[3])))
    throw Error(Module::dynamics, "kinetic matrix must be symmetric");
  double det = A[0] * A[3] - A[1] * A[2];
  if (!(A[0] > 0 && det > 0)) throw Error(Module::dynamics, "kinetic matrix must be positive definite");
}

State leapfrog_step(const MechanicalSystem& sys, const State& z, double s, double dt) {
  State out = z;
  auto g = sys.gradV(out[0], out[1], s);
  out[2] -= 0.5 * dt * g[0];
  out[3] -= 0.5 * dt * g[1];
  auto v = sys.gradT({out[2], out[3]});
  out[0] += dt * v[0];
  out[1] += dt * v[1];
  g = sys.gradV(out[0], out[1], s + dt);
  out[2] -= 0.5 * dt * g[0];
  out[3] -= 0.5 * dt * g[1];
  return out;
}

State yoshida_step(const MechanicalSystem& sys, const State& z, double s, double dt) {
  State a = leapfrog_step(sys, z, s, kW1 * dt);
  State b = leapfrog_step(sys, a, s + kW1 * dt, kW0 * dt);
  return leapfrog_step(sys, b, s + (kW1 + kW0) * dt, kW1 * dt);
}

namespace {

State step(const MechanicalSystem& sys, const State& z, double s, double dt, Scheme sc) {
  return sc == Scheme::leapfrog ? leapfrog_step(sys, z, s, dt) : yoshida_step(sys, z, s, dt);
}

// leapfrog with its tangent map applied to the 4x4 matrix J (columns are tangents)
void leapfrog_tangent(const MechanicalSystem& sys, State& z, std::array<double, 16>& J, double s, double dt) {
  auto kick = [&](double t, double h) {
    auto g = sys.gradV(z[0], z[1], t);
    auto H = sys.hessV(z[0], z[1], t);
    z[2] -= h * g[0];
    z[3] -= h * g[1];
    for (int c = 0; c < 4; ++c) {
      double dx1 = J[0 * 4 + c], dx2 = J[1 * 4 + c];
      J[2 * 4 + c] -= h * (H[0] * dx1 + H[1] * dx2);
      J[3 * 4 + c] -= h * (H[2] * dx1 + H[3] * dx2);
    }
  };
  kick(s, 0.5 * dt);
  auto v = sys.gradT({z[2], z[3]});
  auto HT = hessT(sys, {z[2], z[3]});
  z[0] += dt * v[0];
  z[1] += dt * v[1];
  for (int c = 0; c < 4; ++c) {
    double dy1 = J[2 * 4 + c], dy2 = J[3 * 4 + c];
    J[0 * 4 + c] += dt * (HT[0] * dy1 + HT[1] * dy2);
    J[1 * 4 + c] += dt * (HT[2] * dy1 + HT[3] * dy2);
  }
  kick(s + dt, 0.5 * dt);
}

}  // namespace

Trajectory integrate(const MechanicalSystem& sys, const State& z0, double t0, double t1, double dt, Scheme scheme,
                     int record_every) {
  if (!(dt > 0)) throw Error(Module::dynamics, "dt must be positive");
  Trajectory tr;
  long n = long(std::ceil(std::abs(t1 - t0) / dt - 1e-9));
  double h = n > 0 ? (t1 - t0) / double(n) : 0;
  State z = z0;
  tr.times.push_back(t0);
  tr.states.push_back(z);
  tr.energies.push_back(sys.H(z, t0));
  for (long i = 0; i < n; ++i) {
    double t = t0 + h * double(i);
    z = step(sys, z, t, h, scheme);
    check_finite(z);
    if ((i + 1) % record_every == 0 || i + 1 == n) {
      tr.times.push_back(t + h);
      tr.states.push_back(z);
      tr.energies.push_back(sys.H(z, t + h));
    }
  }
  return tr;
}

State flow(const MechanicalSystem& sys, const State& z0, double t0, double t1, double dt, Scheme scheme) {
  long n = long(std::ceil(std::abs(t1 - t0) / dt - 1e-9));
  if (n == 0) return z0;
  double h = (t1 - t0) / double(n);
  State z = z0;
  for (long i = 0; i < n; ++i) z = step(sys, z, t0 + h * double(i), h, scheme);
  check_finite(z);
  return z;
}

FlowWithJacobian flow_jacobian(const MechanicalSystem& sys, const State& z0, double t0, double t1, double dt) {
  FlowWithJacobian out{z0, {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1}};
  long n = long(std::ceil(std::abs(t1 - t0) / dt - 1e-9));
  if (n == 0) return out;
  double h = (t1 - t0) / double(n);
  for (long i = 0; i < n; ++i) {
    double t = t0 + h * double(i);
    leapfrog_tangent(sys, out.z, out.J, t, kW1 * h);
    leapfrog_tangent(sys, out.z, out.J, t + kW1 * h, kW0 * h);
    leapfrog_tangent(sys, out.z, out.J, t + (kW1 + kW0) * h, kW1 * h);
  }
  check_finite(out.z);
  return out;
}

State Trajectory::at(double t, const MechanicalSystem& sys) const {
  if (times.empty()) throw Error(Module::dynamics, "empty trajectory");
  bool fwd = times.back() >= times.front();
  auto cmp = [&](double a, double b) { return fwd ? a < b : a > b; };
  auto it = std::lower_bound(times.begin(), times.end(), t, cmp);
  if (it == times.begin()) return states.front();
  if (it == times.end()) return states.back();
  size_t i = size_t(it - times.begin()) - 1;
  double h = times[i + 1] - times[i], u = (t - times[i]) / h;
  const State &a = states[i], &b = states[i + 1];
  // derivatives from the vector field
  auto deriv = [&](const State& z, double s) {
    auto v = sys.gradT({z[2], z[3]});
    auto g = sys.gradV(z[0], z[1], s);
    return State{v[0], v[1], -g[0], -g[1]};
  };
  State da = deriv(a, times[i]), db = deriv(b, times[i + 1]);
  double h00 = 2 * u * u * u - 3 * u * u + 1, h10 = u * u * u - 2 * u * u + u;
  double h01 = -2 * u * u * u + 3 * u * u, h11 = u * u * u - u * u;
  State out;
  for (int k = 0; k < 4; ++k) out[k] = h00 * a[k] + h10 * h * da[k] + h01 * b[k] + h11 * h * db[k];
  return out;
}

double Trajectory::max_energy_drift() const {
  double d = 0;
  for (double e : energies) d = std::max(d, std::abs(e - energies.front()));
  return d;
}

std::string Trajectory::csv() const {
  std::ostringstream os;
  os << "t,X1,X2,Y1,Y2,H\n";
  char buf[256];
  for (size_t i = 0; i < times.size(); ++i) {
    const auto& z = states[i];
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", times[i], z[0], z[1], z[2], z[3],
                  energies[i]);
    os << buf;
  }
  return os.str();
}

double two_form(const State& u, const State& v) { return u[2] * v[0] - u[0] * v[2] + u[3] * v[1] - u[1] * v[3]; }

MechanicalSystem uncoupled_pendulums(double lambda1, double lambda2) {
  MechanicalSystem s;
  s.Z1.terms = {{0, -lambda1, 0}, {1, lambda1, 0}};
  s.Z2.terms = {{0, -lambda2, 0}, {1, lambda2, 0}};
  return s;
}

}  // namespace dlab
