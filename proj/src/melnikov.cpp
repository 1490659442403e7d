#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "dlab/melnikov.hpp"

namespace dlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kNodes = 10;

// Z(d) for small |d| without the cos(nd) - 1 cancellation; assumes Z(0) = 0
double z_near(const Trig1& Z, double d) {
  double v = 0;
  for (const auto& h : Z.terms) {
    if (h.n == 0) continue;
    double s = std::sin(0.5 * h.n * d);
    v += -2 * h.a * s * s + h.b * std::sin(h.n * d);
  }
  return v;
}

double z_rel(const Trig1& Z, double x) {
  double d = x > kPi ? x - 2 * kPi : x;
  return z_near(Z, d);
}

struct GL {
  std::array<double, kNodes> x{}, w{};
  GL() {
    using Q = boost::math::quadrature::gauss<double, kNodes>;
    const auto& a = Q::abscissa();
    const auto& b = Q::weights();
    int k = 0;
    for (size_t i = 0; i < a.size(); ++i) {
      x[k] = a[i];
      w[k++] = b[i];
      if (a[i] != 0) {
        x[k] = -a[i];
        w[k++] = b[i];
      }
    }
  }
};

const GL& gl() {
  static const GL g;
  return g;
}

// Integrates n quantities f(t, out) over R outward from t = 0 in panels, stopping on
// each side once every quantity is below rel_cut * peak on a whole panel.
template <class F>
void integrate_line(F&& f, int n, double rate, double t_limit, const MelnikovParams& p, double* acc, double* t_used,
                    double* tail) {
  const auto& q = gl();
  std::array<double, 8> buf{};
  for (int k = 0; k < n; ++k) acc[k] = 0;
  double peak = 0, T = 0, tail_sum = 0;
  double t_min = 8 / rate;
  for (int side : {1, -1}) {
    double a = 0;
    for (;;) {
      double b = a + p.panel;
      if (b > t_limit) {
        std::ostringstream os;
        os << "non-convergent Melnikov tail: integrand above " << p.rel_cut << " * peak at |t| = " << a;
        throw Error(Module::melnikov, os.str());
      }
      double mid = 0.5 * (a + b), half = 0.5 * (b - a), m = 0;
      for (int i = 0; i < kNodes; ++i) {
        f(side * (mid + half * q.x[i]), buf.data());
        for (int k = 0; k < n; ++k) {
          acc[k] += half * q.w[i] * buf[k];
          m = std::max(m, std::abs(buf[k]));
        }
      }
      peak = std::max(peak, m);
      a = b;
      if (a >= t_min && m <= p.rel_cut * peak) {
        // envelope e^{-rate |t|} beyond the cut
        f(side * a, buf.data());
        double e = 0;
        for (int k = 0; k < n; ++k) e = std::max(e, std::abs(buf[k]));
        tail_sum += e / rate;
        break;
      }
    }
    T = std::max(T, a);
  }
  if (t_used) *t_used = T;
  if (tail) *tail = tail_sum;
}

}  // namespace

Separatrix::Separatrix(const Trig1& Z, double a, double s_max, double h) : Z_(Z), a_(a), h_(h), s_max_(s_max) {
  if (!(a > 0) || !(h > 0) || !(s_max > h)) throw Error(Module::melnikov, "separatrix needs a > 0 and s_max > h > 0");
  double scale = 1 + Z.c2_proxy();
  if (std::abs(Z.value(0)) > 1e-12 * scale) throw Error(Module::melnikov, "separatrix potential must vanish at 0");
  double c = -a * Z.d2(0);
  if (!(c > 1e-12 * scale)) throw Error(Module::melnikov, "degenerate maximum of the separatrix potential");
  rate_ = std::sqrt(c);
  for (int i = 1; i < 4096; ++i) {
    double x = 2 * kPi * i / 4096, d = std::min(x, 2 * kPi - x);
    // a second zero shows up as a value far above the quadratic envelope
    if (!(a * z_rel(Z, x) < -1e-6 * c * d * d / 2)) {
      std::ostringstream os;
      os << "potential is not negative away from 0 (Z(" << x << ") = " << Z.value(x) << ")";
      throw Error(Module::melnikov, os.str());
    }
  }

  auto f = [&](double x) { return std::sqrt(std::max(0.0, -2 * a_ * z_rel(Z_, x))); };
  int n = int(std::ceil(s_max / h));
  s_max_ = n * h;
  x_.assign(2 * n + 1, kPi);
  // classical RK4 both ways from X = pi
  for (int dir : {1, -1}) {
    double x = kPi, dt = dir * h;
    for (int i = 1; i <= n; ++i) {
      double k1 = f(x), k2 = f(x + 0.5 * dt * k1), k3 = f(x + 0.5 * dt * k2), k4 = f(x + dt * k3);
      x += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      x = std::clamp(x, 0.0, 2 * kPi);
      x_[n + dir * i] = x;
    }
  }
  v_.resize(x_.size());
  for (size_t i = 0; i < x_.size(); ++i) v_[i] = f(x_[i]);
}

double Separatrix::X(double s) const {
  if (s <= -s_max_) return x_.front();
  if (s >= s_max_) return x_.back();
  double u = (s + s_max_) / h_;
  size_t i = std::min(size_t(u), x_.size() - 2);
  double t = u - double(i);
  double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t), h01 = t * t * (3 - 2 * t),
         h11 = t * t * (t - 1);
  return h00 * x_[i] + h10 * h_ * v_[i] + h01 * x_[i + 1] + h11 * h_ * v_[i + 1];
}

double Separatrix::speed(double s) const { return std::sqrt(std::max(0.0, -2 * a_ * z_rel(Z_, X(s)))); }

double Separatrix::accel(double s) const { return -a_ * Z_.d1(X(s)); }

double Separatrix::time_of(double x) const {
  if (!(x > x_.front() && x < x_.back())) {
    std::ostringstream os;
    os << "point " << x << " is not on the tabulated separatrix";
    throw Error(Module::melnikov, os.str());
  }
  size_t i = size_t(std::lower_bound(x_.begin(), x_.end(), x) - x_.begin());
  double s = -s_max_ + double(i) * h_;
  for (int it = 0; it < 50; ++it) {
    double v = speed(s);
    if (v == 0) break;
    double ds = (X(s) - x) / v;
    s -= ds;
    if (std::abs(ds) < 1e-15 * (1 + std::abs(s))) break;
  }
  return s;
}

HomoclinicFamily HomoclinicFamily::from(const MechanicalSystem& h0, Vec2 sigma) {
  if (h0.A[1] != 0 || h0.A[2] != 0) throw Error(Module::melnikov, "unperturbed system must have diagonal A");
  if (h0.drift[0] != 0 || h0.drift[1] != 0 || h0.cubic_scale != 0)
    throw Error(Module::melnikov, "unperturbed system must be mechanical (no drift, no cubic term)");
  if (std::abs(sigma[0]) != 1 || std::abs(sigma[1]) != 1)
    throw Error(Module::melnikov, "homology class must be (+-1, +-1)");
  HomoclinicFamily f;
  f.a = {h0.A[0], h0.A[3]};
  f.sigma = sigma;
  double c1 = -h0.A[0] * h0.Z1.d2(0), c2 = -h0.A[3] * h0.Z2.d2(0);
  double lmin = std::sqrt(std::max(1e-300, std::min(c1, c2)));
  // long enough for the integrand cut at 1e-12 plus the shifts of the grid points
  double s_max = 45 / lmin + 20;
  f.sep[0] = Separatrix(h0.Z1, f.a[0], s_max);
  f.sep[1] = Separatrix(h0.Z2, f.a[1], s_max);
  return f;
}

State HomoclinicFamily::state(double tau1, double tau2, double t) const {
  double s1 = sigma[0] * t + tau1, s2 = sigma[1] * t + tau2;
  return {sep[0].X(s1), sep[1].X(s2), sigma[0] * sep[0].speed(s1) / a[0], sigma[1] * sep[1].speed(s2) / a[1]};
}

double melnikov_at(const HomoclinicFamily& fam, const TrigSeries& Z3, double tau1, double tau2,
                   std::array<double, 5>* d, double* tail, double* t_cut, const MelnikovParams& p) {
  double z0 = Z3.value(0, 0);
  double limit = std::min(fam.sep[0].s_max() - std::abs(tau1), fam.sep[1].s_max() - std::abs(tau2));
  auto f = [&](double t, double* out) {
    double s1 = fam.sigma[0] * t + tau1, s2 = fam.sigma[1] * t + tau2;
    double x1 = fam.sep[0].X(s1), x2 = fam.sep[1].X(s2);
    out[0] = -(Z3.value(x1, x2) - z0);
    if (!d) return;
    double u1 = fam.sep[0].speed(s1), u2 = fam.sep[1].speed(s2);
    auto g = Z3.grad(x1, x2);
    auto H = Z3.hess(x1, x2);
    out[1] = -g[0] * u1;
    out[2] = -g[1] * u2;
    out[3] = -(H[0] * u1 * u1 + g[0] * fam.sep[0].accel(s1));
    out[4] = -H[1] * u1 * u2;
    out[5] = -(H[2] * u2 * u2 + g[1] * fam.sep[1].accel(s2));
  };
  double acc[6];
  integrate_line(f, d ? 6 : 1, fam.rate_min(), limit, p, acc, t_cut, tail);
  if (d) *d = {acc[1], acc[2], acc[3], acc[4], acc[5]};
  return acc[0];
}

namespace {

void finish_field(MelnikovField& F) {
  double lo = 1e300, hi = -1e300;
  for (double v : F.values) {
    lo = std::min(lo, std::abs(v));
    hi = std::max(hi, std::abs(v));
  }
  F.report.title = "Melnikov field";
  F.report.le("tail_certificate", F.tail_estimate, 1e-3 * (hi - lo), "exponential envelope beyond T_cut");
}

}  // namespace

MelnikovField melnikov_evaluate(const HomoclinicFamily& fam, const TrigSeries& Z3, const std::vector<double>& xs,
                                const std::vector<double>& qs, const MelnikovParams& p) {
  if (!Z3.autonomous()) throw Error(Module::melnikov, "perturbation potential must be autonomous");
  MelnikovField F;
  F.sigma = fam.sigma;
  F.xs = xs;
  F.qs = qs;
  F.has_derivatives = true;
  size_t N = xs.size() * qs.size();
  F.values.assign(N, 0);
  for (auto* v : {&F.D1, &F.D2, &F.D11, &F.D12, &F.D22}) v->assign(N, 0);
  std::vector<double> t1(xs.size()), t2(qs.size()), tails(N, 0), cuts(N, 0);
  for (size_t i = 0; i < xs.size(); ++i) t1[i] = fam.sep[0].time_of(xs[i]);
  for (size_t j = 0; j < qs.size(); ++j) t2[j] = fam.sep[1].time_of(qs[j]);
  long n = long(N);
  std::string err;
#pragma omp parallel for schedule(dynamic, 8) if (p.parallel)
  for (long k = 0; k < n; ++k) {
    size_t i = size_t(k) / qs.size(), j = size_t(k) % qs.size();
    std::array<double, 5> d{};
    try {
      F.values[k] = melnikov_at(fam, Z3, t1[i], t2[j], &d, &tails[k], &cuts[k], p);
    } catch (const Error& e) {
#pragma omp critical
      err = e.what();
    }
    F.D1[k] = d[0];
    F.D2[k] = d[1];
    F.D11[k] = d[2];
    F.D12[k] = d[3];
    F.D22[k] = d[4];
  }
  if (!err.empty()) throw Error(Module::melnikov, err);
  for (size_t k = 0; k < N; ++k) {
    F.tail_estimate = std::max(F.tail_estimate, tails[k]);
    F.tail_cut = std::max(F.tail_cut, cuts[k]);
  }
  finish_field(F);
  return F;
}

MelnikovField melnikov_evaluate(const HomoclinicFamily& fam, const Perturbation& H1, const std::vector<double>& xs,
                                const std::vector<double>& qs, const MelnikovParams& p) {
  MelnikovField F;
  F.sigma = fam.sigma;
  F.xs = xs;
  F.qs = qs;
  size_t N = xs.size() * qs.size();
  F.values.assign(N, 0);
  std::vector<double> tails(N, 0), cuts(N, 0);
  double h0 = H1({0, 0, 0, 0});
  long n = long(N);
  std::string err;
#pragma omp parallel for schedule(dynamic, 8) if (p.parallel)
  for (long k = 0; k < n; ++k) {
    size_t i = size_t(k) / qs.size(), j = size_t(k) % qs.size();
    try {
      double tau1 = fam.sep[0].time_of(xs[i]), tau2 = fam.sep[1].time_of(qs[j]);
      double limit = std::min(fam.sep[0].s_max() - std::abs(tau1), fam.sep[1].s_max() - std::abs(tau2));
      auto f = [&](double t, double* out) { out[0] = -(H1(fam.state(tau1, tau2, t)) - h0); };
      double acc;
      integrate_line(f, 1, fam.rate_min(), limit, p, &acc, &cuts[k], &tails[k]);
      F.values[k] = acc;
    } catch (const Error& e) {
#pragma omp critical
      err = e.what();
    }
  }
  if (!err.empty()) throw Error(Module::melnikov, err);
  for (size_t k = 0; k < N; ++k) {
    F.tail_estimate = std::max(F.tail_estimate, tails[k]);
    F.tail_cut = std::max(F.tail_cut, cuts[k]);
  }
  finish_field(F);
  return F;
}

std::string MelnikovField::csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "x,q,M\n";
  for (size_t i = 0; i < xs.size(); ++i)
    for (size_t j = 0; j < qs.size(); ++j) os << xs[i] << ',' << qs[j] << ',' << value(i, j) << '\n';
  return os.str();
}

FlowInvariance check_flow_invariance(const MelnikovField& F, const HomoclinicFamily& fam) {
  FlowInvariance r;
  size_t nx = F.xs.size(), nq = F.qs.size();
  if (nx < 3 || nq < 3) throw Error(Module::melnikov, "flow invariance needs at least a 3x3 grid");
  r.spacing = std::max(F.xs[1] - F.xs[0], F.qs[1] - F.qs[0]);
  for (size_t i = 1; i + 1 < nx; ++i) {
    double u1 = fam.sep[0].speed(fam.sep[0].time_of(F.xs[i]));
    for (size_t j = 1; j + 1 < nq; ++j) {
      double u2 = fam.sep[1].speed(fam.sep[1].time_of(F.qs[j]));
      double mx = (F.value(i + 1, j) - F.value(i - 1, j)) / (F.xs[i + 1] - F.xs[i - 1]);
      double mq = (F.value(i, j + 1) - F.value(i, j - 1)) / (F.qs[j + 1] - F.qs[j - 1]);
      r.residual = std::max(r.residual, std::abs(F.sigma[0] * u1 * mx + F.sigma[1] * u2 * mq));
      ++r.interior;
    }
  }
  if (F.has_derivatives)
    for (size_t k = 0; k < F.values.size(); ++k)
      r.antisymmetry = std::max(r.antisymmetry, std::abs(F.sigma[0] * F.D1[k] + F.sigma[1] * F.D2[k]));
  return r;
}

namespace {

// eigenvalues of a symmetric 2x2 matrix, by absolute value ascending
std::array<double, 2> sym_eigs(double a, double b, double c) {
  double m = 0.5 * (a + c), r = std::hypot(0.5 * (a - c), b);
  double e1 = m - r, e2 = m + r;
  if (std::abs(e1) > std::abs(e2)) std::swap(e1, e2);
  return {std::abs(e1), std::abs(e2)};
}

}  // namespace

HessianRankScan hessian_rank_scan(const MelnikovField& F, double rel_threshold) {
  if (!F.has_derivatives) throw Error(Module::melnikov, "Hessian scan needs a potential perturbation");
  HessianRankScan r;
  double sg = F.sigma[0] * F.sigma[1];
  for (size_t k = 0; k < F.values.size(); ++k)
    r.scale = std::max({r.scale, std::abs(F.D11[k]), std::abs(F.D12[k]), std::abs(F.D22[k])});
  if (r.scale == 0) return r;
  for (size_t k = 0; k < F.values.size(); ++k) {
    auto e = sym_eigs(F.D11[k], sg * F.D12[k], F.D22[k]);
    int rank = int(e[0] > rel_threshold * r.scale) + int(e[1] > rel_threshold * r.scale);
    r.max_rank = std::max(r.max_rank, rank);
    r.worst_ratio = std::max(r.worst_ratio, e[0] / r.scale);
  }
  return r;
}

CriticalScan critical_points(const HomoclinicFamily& fam, const TrigSeries& Z3, Vec2 center, double radius,
                             int scan, const MelnikovParams& p) {
  if (!(radius > 0) || center[0] - radius <= 0 || center[0] + radius >= 2 * kPi || center[1] - radius <= 0 ||
      center[1] + radius >= 2 * kPi)
    throw Error(Module::melnikov, "ball must lie inside the open square (0, 2 pi)^2");
  if (scan < 8) throw Error(Module::melnikov, "critical point scan needs at least 8 samples");
  CriticalScan out;
  const Vec2& sg = fam.sigma;
  // range of the transverse invariant over the ball
  std::vector<double> tx(scan), tq(scan);
  for (int i = 0; i < scan; ++i) {
    double u = -radius + 2 * radius * i / (scan - 1);
    tx[i] = fam.sep[0].time_of(center[0] + u);
    tq[i] = fam.sep[1].time_of(center[1] + u);
  }
  out.delta_lo = 1e300;
  out.delta_hi = -1e300;
  for (int i = 0; i < scan; ++i)
    for (int j = 0; j < scan; ++j) {
      double u = -radius + 2 * radius * i / (scan - 1), v = -radius + 2 * radius * j / (scan - 1);
      if (u * u + v * v > radius * radius) continue;
      double d = sg[0] * tx[i] - sg[1] * tq[j];
      out.delta_lo = std::min(out.delta_lo, d);
      out.delta_hi = std::max(out.delta_hi, d);
    }
  double tc1 = fam.sep[0].time_of(center[0]), tc2 = fam.sep[1].time_of(center[1]);
  double dc = sg[0] * tc1 - sg[1] * tc2;
  auto taus = [&](double delta) {
    return Vec2{tc1 + sg[0] * (delta - dc) / 2, tc2 - sg[1] * (delta - dc) / 2};
  };
  // g(delta) = grad_{H0,1} M on the transverse line; g' = (D11 - s1 s2 D12) / 2
  auto eval = [&](double delta, std::array<double, 5>& d) {
    auto t = taus(delta);
    return melnikov_at(fam, Z3, t[0], t[1], &d, nullptr, nullptr, p);
  };
  std::vector<double> ds(scan), gs(scan);
  double mscale = 0, hscale = 0;
  for (int i = 0; i < scan; ++i) {
    ds[i] = out.delta_lo + (out.delta_hi - out.delta_lo) * i / (scan - 1);
    std::array<double, 5> d;
    double m = eval(ds[i], d);
    gs[i] = sg[0] * d[0];
    out.scale = std::max(out.scale, std::abs(gs[i]));
    mscale = std::max(mscale, std::abs(m));
    hscale = std::max({hscale, std::abs(d[2]), std::abs(d[3]), std::abs(d[4])});
  }
  if (out.scale <= 1e-13 * (1 + mscale + Z3.c2_proxy()))
    throw Error(Module::melnikov, "degenerate Melnikov field: the gradient vanishes on the whole ball");

  for (int i = 0; i + 1 < scan; ++i) {
    bool root_here = gs[i] == 0 || (gs[i] < 0) != (gs[i + 1] < 0);
    if (!root_here || (i > 0 && gs[i] == 0 && gs[i - 1] == 0)) continue;
    if (gs[i + 1] == 0 && i + 2 < scan) continue;  // counted at the next interval
    // safeguarded Newton
    double a = ds[i], b = ds[i + 1], ga = gs[i];
    double x = gs[i] == 0 ? a : 0.5 * (a + b);
    std::array<double, 5> d{};
    for (int it = 0; it < 100; ++it) {
      eval(x, d);
      double g = sg[0] * d[0];
      if (std::abs(g) <= 1e-12 * std::max(1.0, out.scale)) break;
      if ((g < 0) == (ga < 0)) {
        a = x;
        ga = g;
      } else {
        b = x;
      }
      double gp = 0.5 * (d[2] - sg[0] * sg[1] * d[3]) * sg[0];
      double nx = gp != 0 ? x - g / gp : 0.5 * (a + b);
      if (!(nx > a && nx < b)) nx = 0.5 * (a + b);
      if (std::abs(nx - x) < 1e-15) break;
      x = nx;
    }
    MelnikovCritical c;
    c.delta = x;
    eval(x, d);
    c.gradient = {sg[0] * d[0], sg[1] * d[1]};
    c.hessian = {d[2], sg[0] * sg[1] * d[3], sg[0] * sg[1] * d[3], d[4]};
    auto e = sym_eigs(d[2], sg[0] * sg[1] * d[3], d[4]);
    double thr = 1e-8 * std::max(hscale, 1e-300);
    c.rank = int(e[0] > thr) + int(e[1] > thr);
    // point of the orbit nearest to the center
    auto t = taus(x);
    auto at = [&](double s) {
      return Vec2{fam.sep[0].X(t[0] + sg[0] * s), fam.sep[1].X(t[1] + sg[1] * s)};
    };
    auto dist = [&](double s) {
      auto P = at(s);
      return std::hypot(P[0] - center[0], P[1] - center[1]);
    };
    double span = 4 / fam.rate_min(), best = 0, bd = dist(0);
    for (int k = -400; k <= 400; ++k) {
      double s = span * k / 400, dd = dist(s);
      if (dd < bd) {
        bd = dd;
        best = s;
      }
    }
    double lo = best - span / 400, hi = best + span / 400;
    const double gr = (std::sqrt(5.0) - 1) / 2;
    for (int it = 0; it < 80; ++it) {
      double m1 = hi - gr * (hi - lo), m2 = lo + gr * (hi - lo);
      if (dist(m1) < dist(m2))
        hi = m2;
      else
        lo = m1;
    }
    c.point = at(0.5 * (lo + hi));
    c.distance = dist(0.5 * (lo + hi));
    if (c.distance <= radius * (1 + 1e-9)) out.points.push_back(c);
  }

  auto& r = out.report;
  r.title = "Melnikov critical points";
  std::ostringstream os;
  os << "critical orbits meeting the ball of radius " << radius << "; delta in [" << out.delta_lo << ", "
     << out.delta_hi << "]";
  r.flag("U7_unique_critical_point", out.points.size() == 1, double(out.points.size()), os.str());
  for (size_t k = 0; k < out.points.size(); ++k) {
    const auto& c = out.points[k];
    r.le("critical_" + std::to_string(k) + "_gradient", std::hypot(c.gradient[0], c.gradient[1]),
         1e-12 * std::max(1.0, out.scale));
    r.le("critical_" + std::to_string(k) + "_rank", c.rank, 1);
  }
  return out;
}

}  // namespace dlab
