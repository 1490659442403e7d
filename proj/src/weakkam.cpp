#include "dlab/weakkam.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace dlab {

namespace {

constexpr double kPi = std::numbers::pi;

double quad(const Mat2& M, Vec2 a, Vec2 b) {
  return a[0] * (M[0] * b[0] + M[1] * b[1]) + a[1] * (M[2] * b[0] + M[3] * b[1]);
}

Mat2 inverse(const Mat2& M) {
  double det = M[0] * M[3] - M[1] * M[2];
  return {M[3] / det, -M[1] / det, -M[2] / det, M[0] / det};
}

int wrap(int i, int n) {
  i %= n;
  return i < 0 ? i + n : i;
}

}  // namespace

double TonelliLagrangian::operator()(Vec2 x, Vec2 v) const {
  return 0.5 * quad(K, v, v) + b[0] * v[0] + b[1] * v[1] + U(x[0], x[1]);
}

Mat2 TonelliLagrangian::Kinv() const {
  if (dim == 1) return {1 / K[0], 0, 0, 0};
  return inverse(K);
}

double TonelliLagrangian::hamiltonian(Vec2 x, Vec2 p) const {
  Vec2 q{p[0] - b[0], dim == 1 ? 0.0 : p[1] - b[1]};
  return 0.5 * quad(Kinv(), q, q) - U(x[0], x[1]);
}

void TonelliLagrangian::validate() const {
  if (dim != 1 && dim != 2) throw Error(Module::weakkam, "Lagrangian dimension must be 1 or 2");
  if (!U) throw Error(Module::weakkam, "Lagrangian has no potential");
  bool pd = dim == 1 ? K[0] > 0
                     : K[0] > 0 && K[0] * K[3] - K[1] * K[2] > 0 && std::abs(K[1] - K[2]) <= 1e-14 * std::abs(K[0]);
  if (!pd) throw Error(Module::weakkam, "Lagrangian is not positive definite in the velocity");
  // the velocity Hessian is K everywhere; sample the potential for finiteness
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < (dim == 1 ? 1 : 16); ++j)
      if (!std::isfinite(U(2 * kPi * i / 16, 2 * kPi * j / 16)))
        throw Error(Module::weakkam, "Lagrangian potential is not finite");
}

TonelliLagrangian TonelliLagrangian::from_mechanical(const MechanicalSystem& sys) {
  sys.validate();
  if (sys.cubic_scale != 0) throw Error(Module::weakkam, "the grid solver needs a quadratic kinetic energy");
  if (!sys.autonomous()) throw Error(Module::weakkam, "time-periodic Lagrangians are not supported by the grid solver");
  TonelliLagrangian L;
  L.dim = 2;
  L.K = inverse(sys.A);
  // 1/2 <v - d, A^-1 (v - d)> - V = 1/2 <v, K v> - <K d, v> + 1/2 <d, K d> - V
  Vec2 Kd{L.K[0] * sys.drift[0] + L.K[1] * sys.drift[1], L.K[2] * sys.drift[0] + L.K[3] * sys.drift[1]};
  L.b = {-Kd[0], -Kd[1]};
  double shift = 0.5 * quad(L.K, sys.drift, sys.drift);
  L.U = [sys, shift](double x1, double x2) { return shift - sys.V(x1, x2); };
  return L;
}

TonelliLagrangian TonelliLagrangian::pendulum(double lambda) {
  TonelliLagrangian L;
  L.dim = 1;
  L.K = {1, 0, 0, 0};
  L.U = [lambda](double x, double) { return lambda * (1 - std::cos(x)); };
  return L;
}

TonelliLagrangian TonelliLagrangian::free(int dim) {
  TonelliLagrangian L;
  L.dim = dim;
  L.K = dim == 1 ? Mat2{1, 0, 0, 0} : Mat2{1, 0, 0, 1};
  L.U = [](double, double) { return 0.0; };
  return L;
}

LaxOleinik::LaxOleinik(const TonelliLagrangian& L, Vec2 c, const LaxOleinikParams& p, bool reversed) : L_(L) {
  L_.validate();
  if (p.n < 4) throw Error(Module::weakkam, "grid too small");
  if (p.window < 1) throw Error(Module::weakkam, "stencil radius must be positive");
  if (!(p.margin >= 1)) throw Error(Module::weakkam, "stencil margin must be at least 1");
  int dim = L_.dim;
  n_ = {p.n, dim == 1 ? 1 : p.n};
  h_ = {2 * kPi / n_[0], dim == 1 ? 1.0 : 2 * kPi / n_[1]};
  beta_ = {L_.b[0] - c[0], dim == 1 ? 0.0 : L_.b[1] - c[1]};
  if (reversed) beta_ = {-beta_[0], -beta_[1]};
  Mat2 Ki = L_.Kinv();
  v0_ = {-(Ki[0] * beta_[0] + Ki[1] * beta_[1]), -(Ki[2] * beta_[0] + Ki[3] * beta_[1])};

  // speed bound about v0 from the oscillation of the potential: |K^-1 du|_i <= sqrt(2 osc U K^-1_ii)
  double umin = 1e300, umax = -1e300;
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < (dim == 1 ? 1 : 64); ++j) {
      double u = L_.U(2 * kPi * i / 64, 2 * kPi * j / 64);
      umin = std::min(umin, u);
      umax = std::max(umax, u);
    }
  double osc = umax - umin;
  std::array<double, 2> S{std::sqrt(2 * osc * Ki[0]), dim == 1 ? 0.0 : std::sqrt(2 * osc * Ki[3])};
  int fast = (dim == 2 && S[1] / h_[1] > S[0] / h_[0]) ? 1 : 0;
  if (S[fast] <= 1e-12) {
    // no potential: a long step makes the velocity lattice fine, h / t = 1e-3
    t_ = h_[0] / 1e-3;
    W_ = {2, dim == 1 ? 0 : 2};
  } else {
    // speed bound x t = stencil radius / margin; the velocity lattice spacing is
    // h / t = margin S / window
    t_ = p.window * h_[fast] / (p.margin * S[fast]);
    for (int a = 0; a < dim; ++a) W_[a] = std::max(2, int(std::ceil(p.margin * S[a] * t_ / h_[a])));
  }
  for (int a = 0; a < dim; ++a) m_[a] = int(std::lround(v0_[a] * t_ / h_[a]));
  build_stencil();
}

void LaxOleinik::enlarge(double factor) {
  for (int a = 0; a < L_.dim; ++a) W_[a] = int(std::ceil(W_[a] * factor));
  build_stencil();
}

void LaxOleinik::build_stencil() {
  int dim = L_.dim;
  rows_.clear();
  kin_.clear();
  ring_.clear();
  auto inside = [&](int d1, int d2) {
    double r = double(d1) * d1 / (double(W_[0]) * W_[0]);
    if (dim == 2) r += double(d2) * d2 / (double(W_[1]) * W_[1]);
    else if (d2 != 0) return false;
    return r <= 1 + 1e-12;
  };
  if (dim == 1) {
    // a single row along d1, from +W down to -W (unit stride in the padded arrays)
    rows_.push_back({0, W_[0], 0});
    for (int d1 = W_[0]; d1 >= -W_[0]; --d1) {
      double v = (m_[0] + d1) * h_[0] / t_;
      kin_.push_back(t_ * (0.5 * L_.K[0] * v * v + beta_[0] * v));
      ring_.push_back(std::abs(d1) == W_[0]);
    }
  }
  // dim 2: rows of constant d1, d2 running from +w down to -w
  for (int d1 = -W_[0]; d1 <= W_[0] && dim == 2; ++d1) {
    int w = 0;
    while (inside(d1, w + 1)) ++w;
    rows_.push_back({d1, w, kin_.size()});
    for (int d2 = w; d2 >= -w; --d2) {
      Vec2 v{(m_[0] + d1) * h_[0] / t_, dim == 1 ? 0.0 : (m_[1] + d2) * h_[1] / t_};
      kin_.push_back(t_ * (0.5 * quad(L_.K, v, v) + beta_[0] * v[0] + beta_[1] * v[1]));
      ring_.push_back(!inside(std::abs(d1) + 1, d2) || (dim == 2 && !inside(d1, std::abs(d2) + 1)));
    }
  }
  // t U at the half-grid points k h / 2, k = 2 i - m - d
  Uhalf_.clear();
  int r1 = 2 * n_[0] + 2 * W_[0] + 2, r2 = dim == 1 ? 1 : 2 * n_[1] + 2 * W_[1] + 2;
  Uhalf_.resize(size_t(r1) * r2);
  for (int a = 0; a < r1; ++a)
    for (int b = 0; b < r2; ++b) {
      double k1 = a - m_[0] - W_[0], k2 = dim == 1 ? 0 : b - m_[1] - W_[1];
      double x1 = k1 * h_[0] / 2, x2 = k2 * h_[1] / 2;
      Uhalf_[size_t(a) * r2 + b] = t_ * L_.U(x1, x2);
    }
}

GridFunction LaxOleinik::zero() const {
  if (L_.dim == 1) return GridFunction({n_[0]}, {h_[0]});
  return GridFunction({n_[0], n_[1]}, {h_[0], h_[1]});
}

GridFunction LaxOleinik::step(const GridFunction& u, bool parallel) const {
  int n1 = n_[0], n2 = n_[1];
  if (u.size() != size_t(n1) * n2) throw Error(Module::weakkam, "grid function does not match the operator grid");
  const auto& uv = u.values;
  // pad by the lattice centre and the stencil radius
  int p1 = n1 + 2 * W_[0], p2 = n2 + 2 * W_[1];
  std::vector<double> Q(size_t(p1) * p2);
  for (int a = 0; a < p1; ++a) {
    int i = wrap(a - W_[0] - m_[0], n1);
    for (int b = 0; b < p2; ++b) Q[size_t(a) * p2 + b] = uv[size_t(i) * n2 + wrap(b - W_[1] - m_[1], n2)];
  }
  int r2 = L_.dim == 1 ? 1 : 2 * n_[1] + 2 * W_[1] + 2;

  GridFunction out = u;
  double* o = out.values.data();
  const double* q = Q.data();
  const double* uh = Uhalf_.data();
  const double* kin = kin_.data();
  const bool track = track_boundary_;
  long hits = 0;
#pragma omp parallel for if (parallel) schedule(static) reduction(+ : hits)
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      long bq = long(i + W_[0]) * p2 + (j + W_[1]);
      long bh = long(2 * i + W_[0]) * r2 + (L_.dim == 1 ? 0 : 2 * j + W_[1]);
      double best = 1e300;
      for (const auto& r : rows_) {
        // candidate d2 = w - k sits at offset k - w
        const double* qr = q + bq - long(r.d1) * p2 - r.w;
        const double* hr = uh + bh - long(r.d1) * r2 - r.w;
        const double* kr = kin + r.off;
        const int len = 2 * r.w + 1;
#pragma omp simd reduction(min : best)
        for (int k = 0; k < len; ++k) best = std::min(best, qr[k] + kr[k] + hr[k]);
      }
      o[size_t(i) * n2 + j] = best;
      if (!track) continue;
      // first minimizer in stencil order, on the outer ring?
      bool found = false;
      for (const auto& r : rows_) {
        const double* qr = q + bq - long(r.d1) * p2 - r.w;
        const double* hr = uh + bh - long(r.d1) * r2 - r.w;
        for (int k = 0; k < 2 * r.w + 1 && !found; ++k)
          if (qr[k] + kin[r.off + k] + hr[k] == best) {
            found = true;
            if (ring_[r.off + k]) ++hits;
          }
        if (found) break;
      }
    }
  }
  if (track) boundary_hits_ = double(hits) / double(size_t(n1) * n2);
  return out;
}

GridFunction lax_oleinik_step(const GridFunction& u, const TonelliLagrangian& L, Vec2 c, const LaxOleinikParams& p) {
  LaxOleinik T(L, c, p);
  return T.step(u, p.parallel);
}

namespace {

struct Fixed {
  GridFunction u;
  double alpha = 0;
  int iterations = 0;
  double change = 0;
  LaxOleinik op;
};

Fixed iterate(const TonelliLagrangian& L, Vec2 c, const LaxOleinikParams& p, const GridFunction* warm, bool reversed) {
  LaxOleinik T(L, c, p, reversed);
  GridFunction u = warm && warm->size() == T.zero().size() ? *warm : T.zero();
  if (warm && warm->size() == u.size()) {
    u.dims = T.zero().dims;
    u.spacing = T.zero().spacing;
  }
  int retries = 0;
  double change = 1e300, alpha = 0;
  int steps = 0;
  // drift of one application of T^m: mean and oscillation about the mean
  auto drift = [&](const GridFunction& v, double& mean) {
    mean = 0;
    for (size_t k = 0; k < u.size(); ++k) mean += v.values[k] - u.values[k];
    mean /= double(u.size());
    double ch = 0;
    for (size_t k = 0; k < u.size(); ++k) ch = std::max(ch, std::abs(v.values[k] - u.values[k] - mean));
    return ch;
  };
  // Averaged rounds u <- (u + T^m u) / 2 have the same fixed points. Plain iteration
  // only transports the error around invariant circles; cycling m breaks the resonance
  // of the averaging with that rotation.
  const int cycle[4] = {1, 3, 8, 21};
  bool done = false;
  for (int round = 0; steps < p.max_iter && !done; ++round) {
    int m = cycle[round % 4];
    GridFunction v = u;
    for (int k = 0; k < m; ++k) v = T.step(v, p.parallel);
    steps += m;
    double mean;
    double ch = drift(v, mean);
    for (size_t k = 0; k < u.size(); ++k) u.values[k] = 0.5 * (u.values[k] + v.values[k] - mean);
    double lo = u.min();
    for (auto& x : u.values) x -= lo;
    if (ch > p.tol) continue;
    // confirm on a single plain step, watching the stencil boundary
    T.track_boundary(true);
    GridFunction Tu = T.step(u, p.parallel);
    T.track_boundary(false);
    ++steps;
    change = drift(Tu, mean);
    alpha = -mean / T.t_step();
    if (change > p.tol) continue;
    if (T.boundary_hits() == 0) {
      done = true;
    } else {
      if (retries++ >= p.retries)
        throw Error(Module::weakkam, "Lax-Oleinik minimizer stays on the stencil boundary after enlarging");
      T.enlarge(1.5);
    }
  }
  if (!done) {
    std::ostringstream os;
    os << "Lax-Oleinik iteration did not converge in " << p.max_iter << " steps (change " << change << ")";
    throw Error(Module::weakkam, os.str());
  }
  return {std::move(u), alpha, steps, change, T};
}

}  // namespace

WeakKamResult weak_kam_solve(const TonelliLagrangian& L, Vec2 c, const LaxOleinikParams& p, const GridFunction* warm,
                             bool with_plus) {
  auto fm = iterate(L, c, p, warm, false);
  WeakKamResult r;
  r.c = c;
  r.u_minus = std::move(fm.u);
  r.alpha = fm.alpha;
  r.iterations = fm.iterations;
  r.residual = fm.change;
  r.t_step = fm.op.t_step();
  r.window = fm.op.window();
  if (with_plus) {
    auto fp = iterate(L, c, p, nullptr, true);
    r.u_plus = std::move(fp.u);
    for (auto& v : r.u_plus.values) v = -v;
    r.alpha_plus = fp.alpha;
    r.iterations += fp.iterations;
    r.residual = std::max(r.residual, fp.change);
  }

  // discrete derivatives of u_minus
  const auto& u = r.u_minus;
  int n1 = u.dims[0], n2 = u.rank() == 1 ? 1 : u.dims[1];
  int dim = u.rank();
  auto at = [&](int i, int j) { return u.values[size_t(wrap(i, n1)) * n2 + wrap(j, n2)]; };
  std::vector<double> jump(u.size());
  std::vector<Vec2> grad(u.size());
  double sc = -1e300;
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      size_t k = size_t(i) * n2 + j;
      double jm = 0;
      Vec2 g{0, 0};
      for (int a = 0; a < dim; ++a) {
        double h = u.spacing[a];
        double up = a == 0 ? at(i + 1, j) : at(i, j + 1), dn = a == 0 ? at(i - 1, j) : at(i, j - 1);
        double c0 = at(i, j);
        double dp = (up - c0) / h, dm = (c0 - dn) / h;
        jm = std::max(jm, std::abs(dp - dm));
        g[a] = (dp + dm) / 2;
        sc = std::max(sc, (up + dn - 2 * c0) / (h * h));
      }
      jump[k] = jm;
      grad[k] = g;
    }
  r.semiconcavity = sc;
  std::vector<double> sorted = jump;
  std::nth_element(sorted.begin(), sorted.begin() + long(sorted.size() / 2), sorted.end());
  double cut = 3 * sorted[sorted.size() / 2] + 1e-14;
  double sum = 0;
  size_t cnt = 0;
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      size_t k = size_t(i) * n2 + j;
      if (jump[k] > cut) continue;
      Vec2 x{i * u.spacing[0], dim == 1 ? 0.0 : j * u.spacing[1]};
      Vec2 pc{c[0] + grad[k][0], dim == 1 ? 0.0 : c[1] + grad[k][1]};
      double e = std::abs(L.hamiltonian(x, pc) - r.alpha);
      sum += e;
      r.hj_max = std::max(r.hj_max, e);
      ++cnt;
    }
  r.hj_residual = cnt ? sum / double(cnt) : 0;
  r.differentiable = double(cnt) / double(u.size());

  r.report.title = "weak KAM solve";
  r.report.le("converged", r.residual, p.tol);
  r.report.flag("semiconcave", std::isfinite(r.semiconcavity), r.semiconcavity, "max second difference / h^2");
  if (with_plus) {
    double scale = std::max(1.0, std::abs(r.alpha));
    r.report.le("alpha_forward_backward", std::abs(r.alpha - r.alpha_plus), 1e-6 * scale);
  }
  return r;
}

GridFunction barrier(const GridFunction& u_minus, const GridFunction& u_plus) {
  if (!u_minus.same_shape(u_plus)) throw Error(Module::weakkam, "barrier needs u_minus and u_plus on the same grid");
  GridFunction B = u_minus;
  for (size_t k = 0; k < B.size(); ++k) B.values[k] = u_minus.values[k] - u_plus.values[k];
  double lo = B.min();
  for (auto& v : B.values) v -= lo;
  return B;
}

GridFunction barrier(const WeakKamResult& r) { return barrier(r.u_minus, r.u_plus); }

ManeEstimate mane_set_estimate(const GridFunction& B, double threshold, int axis, int index) {
  ManeEstimate m;
  m.threshold = threshold;
  m.mask = B;
  size_t on = 0;
  for (auto& v : m.mask.values) {
    v = v <= threshold ? 1.0 : 0.0;
    if (v > 0) ++on;
  }
  m.coverage = double(on) / double(B.size());

  // the loop: along the other axis (dim 1: the circle itself)
  int n1 = B.dims[0], n2 = B.rank() == 1 ? 1 : B.dims[1];
  std::vector<double> line;
  double h;
  if (B.rank() == 1) {
    line = m.mask.values;
    h = B.spacing[0];
  } else if (axis == 0) {
    int i = wrap(index, n1);
    for (int j = 0; j < n2; ++j) line.push_back(m.mask.values[size_t(i) * n2 + j]);
    h = B.spacing[1];
  } else {
    int j = wrap(index, n2);
    for (int i = 0; i < n1; ++i) line.push_back(m.mask.values[size_t(i) * n2 + j]);
    h = B.spacing[0];
  }
  int n = int(line.size());
  if (std::all_of(line.begin(), line.end(), [](double v) { return v > 0; })) {
    m.intervals.push_back({0, 2 * kPi});
    return m;
  }
  // start right after an unmasked node so runs do not straddle the start
  int s = 0;
  while (line[s] > 0) ++s;
  for (int k = 1; k <= n; ++k) {
    int i = s + k;
    if (line[i % n] > 0 && line[(i - 1) % n] == 0) {
      int e = i;
      while (line[(e + 1) % n] > 0) ++e;
      double lo = (i - 0.5) * h, hi = (e + 0.5) * h;
      double shift = 2 * kPi * std::floor(lo / (2 * kPi));
      m.intervals.push_back({lo - shift, hi - shift});
      k += e - i;
    }
  }
  std::sort(m.intervals.begin(), m.intervals.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  return m;
}

ManeEstimate mane_set_estimate(const WeakKamResult& r) {
  return mane_set_estimate(barrier(r), 3 * r.hj_residual);
}

}  // namespace dlab
