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

double wrap_pi(double x) {
  x = std::fmod(x + kPi, 2 * kPi);
  if (x < 0) x += 2 * kPi;
  return x - kPi;
}

Eigen::Matrix2d m2(const Mat2& a) {
  Eigen::Matrix2d M;
  M << a[0], a[1], a[2], a[3];
  return M;
}

}  // namespace

double fd_hessian_error(const MechanicalSystem& sys, const Vec2& X, double h) {
  auto H = sys.hessV(X[0], X[1]);
  double worst = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Vec2 p = X, m = X;
      p[j] += h;
      m[j] -= h;
      double fd = (sys.gradV(p[0], p[1])[i] - sys.gradV(m[0], m[1])[i]) / (2 * h);
      worst = std::max(worst, std::abs(fd - H[2 * i + j]));
    }
  return worst;
}

HyperbolicData hyperbolic_fixed_point(const MechanicalSystem& sys, const HyperbolicParams& p) {
  sys.validate();
  if (!sys.autonomous()) throw Error(Module::dynamics, "fixed point analysis needs an autonomous system");
  HyperbolicData out;
  out.local_radius = p.local_radius;
  // scan
  double best = -1e300;
  Vec2 X{0, 0};
  for (int i = 0; i < p.scan; ++i)
    for (int j = 0; j < p.scan; ++j) {
      double x1 = 2 * kPi * i / p.scan, x2 = 2 * kPi * j / p.scan;
      double v = sys.V(x1, x2);
      if (v > best) {
        best = v;
        X = {x1, x2};
      }
    }
  // Newton polish on grad V = 0
  for (int it = 0; it < 50; ++it) {
    auto g = sys.gradV(X[0], X[1]);
    auto H = sys.hessV(X[0], X[1]);
    double det = H[0] * H[3] - H[1] * H[2];
    if (det == 0) break;
    double d0 = (H[3] * g[0] - H[1] * g[1]) / det, d1 = (-H[2] * g[0] + H[0] * g[1]) / det;
    X[0] -= d0;
    X[1] -= d1;
    if (std::hypot(d0, d1) < 1e-15) break;
  }
  X = {wrap_pi(X[0]), wrap_pi(X[1])};
  out.fixed_point = X;
  out.hessV = sys.hessV(X[0], X[1]);
  auto g = sys.gradV(X[0], X[1]);

  Eigen::Matrix2d A = m2(sys.A), N = -m2(out.hessV);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> es(N, A.inverse());
  auto mu = es.eigenvalues();  // ascending
  if (!(mu(0) > 1e-12 * std::abs(mu(1)))) {
    std::ostringstream os;
    os << "non-hyperbolic fixed point: eigenvalue " << mu(0) << " of A(-Hess V)";
    throw Error(Module::dynamics, os.str());
  }
  out.lambda1 = std::sqrt(mu(1));
  out.lambda2 = std::sqrt(mu(0));
  Eigen::Vector2d w1 = es.eigenvectors().col(1), w2 = es.eigenvectors().col(0);
  // a fixed orientation: largest component positive
  auto orient = [](Eigen::Vector2d v) { return (std::abs(v(0)) >= std::abs(v(1)) ? v(0) : v(1)) < 0 ? Eigen::Vector2d(-v) : v; };
  w1 = orient(w1);
  w2 = orient(w2);
  out.v1 = {w1(0), w1(1)};
  out.v2 = {w2(0), w2(1)};
  Eigen::Matrix2d Ainv = A.inverse();
  double lam[2] = {out.lambda1, out.lambda2};
  Eigen::Vector2d ws[2] = {w1, w2};
  for (int i = 0; i < 2; ++i) {
    Eigen::Vector2d q = ws[i] / std::sqrt(lam[i]), pp = std::sqrt(lam[i]) * (Ainv * ws[i]);
    double c = 1 / std::sqrt(2.0);
    out.unstable[i] = {c * q(0), c * q(1), c * pp(0), c * pp(1)};
    out.stable[i] = {-c * q(0), -c * q(1), c * pp(0), c * pp(1)};
  }

  auto& r = out.report;
  r.title = "hyperbolic fixed point";
  r.le("gradient_zero", std::hypot(g[0], g[1]), 1e-10);
  r.flag("max_value_zero", std::abs(sys.V(X[0], X[1])) <= 1e-12, sys.V(X[0], X[1]), "C4 normalization");
  r.le("fd_hessian", fd_hessian_error(sys, X), 1e-8);
  r.flag("hyperbolic", out.lambda2 > 0, out.lambda2);
  if (p.c8 > 0) r.le("U3p_gap", p.c8, out.lambda1 - out.lambda2);
  if (p.c9 > 0) r.le("U3p_ratio", 1 + p.c9, out.lambda1 / out.lambda2);
  return out;
}

std::array<double, 4> LocalLinearForm::to_QP(const State& z) const {
  State d{z[0] - hyp.fixed_point[0], z[1] - hyp.fixed_point[1], z[2], z[3]};
  std::array<double, 4> w{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) w[i] += Tinv[4 * i + j] * d[j];
  return w;
}

State LocalLinearForm::from_QP(const std::array<double, 4>& w) const {
  State z{hyp.fixed_point[0], hyp.fixed_point[1], 0, 0};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) z[i] += T[4 * i + j] * w[j];
  return z;
}

std::array<double, 4> LocalLinearForm::to_hyperbolic(const State& z) const {
  auto w = to_QP(z);
  double c = 1 / std::sqrt(2.0);
  return {c * (w[0] + w[2]), c * (w[1] + w[3]), c * (w[2] - w[0]), c * (w[3] - w[1])};
}

LocalLinearForm local_linear_form(const MechanicalSystem& sys, const HyperbolicData& h, double r, int samples) {
  LocalLinearForm L;
  L.hyp = h;
  Eigen::Matrix2d A = m2(sys.A), Ainv = A.inverse();
  double lam[2] = {h.lambda1, h.lambda2};
  Vec2 vs[2] = {h.v1, h.v2};
  Eigen::Matrix4d T = Eigen::Matrix4d::Zero();
  for (int i = 0; i < 2; ++i) {
    Eigen::Vector2d v(vs[i][0], vs[i][1]);
    Eigen::Vector2d q = v / std::sqrt(lam[i]), p = std::sqrt(lam[i]) * (Ainv * v);
    T(0, i) = q(0);
    T(1, i) = q(1);
    T(2, 2 + i) = p(0);
    T(3, 2 + i) = p(1);
  }
  Eigen::Matrix4d Ti = T.inverse();
  Eigen::Matrix4d HH = Eigen::Matrix4d::Zero();
  HH.topLeftCorner<2, 2>() = m2(h.hessV);
  HH.bottomRightCorner<2, 2>() = A;
  Eigen::Matrix4d Q = T.transpose() * HH * T;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      L.T[4 * i + j] = T(i, j);
      L.Tinv[4 * i + j] = Ti(i, j);
      L.quad[4 * i + j] = Q(i, j);
    }
  // sampled remainder on the sphere of radius r
  std::mt19937_64 rng(17);
  std::normal_distribution<double> G;
  double H0 = sys.V(h.fixed_point[0], h.fixed_point[1]);
  double rem = 0, quad = 0;
  for (int n = 0; n < samples; ++n) {
    std::array<double, 4> w;
    double s = 0;
    for (auto& x : w) {
      x = G(rng);
      s += x * x;
    }
    for (auto& x : w) x *= r / std::sqrt(s);
    double h2 = 0.5 * (h.lambda1 * (w[2] * w[2] - w[0] * w[0]) + h.lambda2 * (w[3] * w[3] - w[1] * w[1]));
    double full = sys.H(L.from_QP(w)) - H0;
    rem = std::max(rem, std::abs(full - h2));
    quad = std::max(quad, std::abs(h2));
  }
  L.residual = quad > 0 ? rem / quad : 0;
  return L;
}

Report check_U5prime(double lambda1, double lambda2, int k, double tol) {
  if (k < 1) throw Error(Module::dynamics, "U5' order must be >= 1");
  Report r;
  r.title = "U5' k-nonresonance";
  double worst = 1e300;
  int bad_d1 = 0, bad_d2 = 0;
  long count = 0;
  for (int m1 = 0; m1 <= k; ++m1)
    for (int m2 = 0; m1 + m2 <= k; ++m2)
      for (int m3 = 0; m1 + m2 + m3 <= k; ++m3)
        for (int m4 = 0; m1 + m2 + m3 + m4 <= k; ++m4) {
          if (m1 == m2 || m3 == m4) continue;
          ++count;
          double v = std::abs((m1 - m2) * lambda1 + (m3 - m4) * lambda2);
          if (v < worst) {
            worst = v;
            bad_d1 = m1 - m2;
            bad_d2 = m3 - m4;
          }
        }
  std::ostringstream os;
  os << "numeric-only certificate; " << count << " multi-indices; closest relation (" << bad_d1 << ", " << bad_d2
     << ")";
  r.lt("k_nonresonant", tol, worst, os.str());
  return r;
}

namespace {

struct Fit {
  double slope = 0, intercept = 0;
  int n = 0;
};

Fit linfit(const std::vector<double>& x, const std::vector<double>& y) {
  Fit f;
  f.n = int(x.size());
  if (f.n < 2) return f;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < f.n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double d = f.n * sxx - sx * sx;
  f.slope = (f.n * sxy - sx * sy) / d;
  f.intercept = (sy - f.slope * sx) / f.n;
  return f;
}

}  // namespace

U6Result check_U6_U7(const MechanicalSystem& sys, const LocalLinearForm& L, const HomoclinicResult& hc, double cap) {
  (void)sys;
  U6Result out;
  auto& rep = out.report;
  rep.title = "U6 asymptotic directions";
  double r = L.hyp.local_radius;
  double ratio = L.hyp.lambda1 / L.hyp.lambda2;
  Vec2 shift{2 * kPi * hc.g[0], 2 * kPi * hc.g[1]};
  // departure: unstable coordinates near the fixed point; approach: stable ones near its translate
  for (int end = 0; end < 2; ++end) {
    std::vector<double> lw, ls;
    double max_strong = 0, max_weak = 0;
    for (const auto& z0 : hc.orbit.states) {
      State z = z0;
      if (end == 1) {
        z[0] -= shift[0];
        z[1] -= shift[1];
      }
      auto w = L.to_QP(z);
      double nrm = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2] + w[3] * w[3]);
      if (nrm > r / 2) continue;
      auto hy = L.to_hyperbolic(z);
      double strong = std::abs(end == 0 ? hy[0] : hy[2]), weak = std::abs(end == 0 ? hy[1] : hy[3]);
      max_strong = std::max(max_strong, strong);
      max_weak = std::max(max_weak, weak);
      if (nrm < 1e-9) continue;
      if (strong > 0 && weak > 0) {
        lw.push_back(std::log(weak));
        ls.push_back(std::log(strong));
      }
    }
    const char* tag = end == 0 ? "departure" : "approach";
    double& expo = end == 0 ? out.exponent_out : out.exponent_in;
    double& C = end == 0 ? out.C_hat : out.C_check;
    (end == 0 ? out.points_out : out.points_in) = int(lw.size());
    if (max_weak <= 1e-9 * std::max(max_strong, 1e-300) || lw.size() < 5) {
      // leaves along the strong direction: the extreme case C = infinity
      C = INFINITY;
      rep.flag(std::string("U6_") + tag + "_weak_direction", false, max_weak,
               "orbit leaves along the strong direction; C = infinity");
      continue;
    }
    if (max_strong <= 1e-9 * max_weak) {
      C = 0;
      expo = ratio;
      rep.flag(std::string("U6_") + tag + "_weak_direction", true, 0, "strong component vanishes; C = 0");
      continue;
    }
    auto f = linfit(lw, ls);
    expo = f.slope;
    C = std::exp(f.intercept);
    std::ostringstream os;
    os << "fit over " << f.n << " points, target " << ratio;
    rep.le(std::string("U6_") + tag + "_exponent", std::abs(expo / ratio - 1), 0.05, os.str());
    rep.le(std::string("U6_") + tag + "_prefactor", C, cap);
  }
  return out;
}

}  // namespace dlab
