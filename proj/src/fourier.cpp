#include "dlab/fourier.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace dlab {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

K3 neg(const K3& k) { return {-k[0], -k[1], -k[2]}; }

}  // namespace

long max_norm(const K3& k) { return std::max({std::labs(k[0]), std::labs(k[1]), std::labs(k[2])}); }

IVec3 to_ivec(const K3& k) { return {Int(k[0]), Int(k[1]), Int(k[2])}; }

bool canonical_half(const K3& k) {
  for (long x : k) {
    if (x > 0) return true;
    if (x < 0) return false;
  }
  return true;  // origin
}

void FourierSeq::add(const K3& k, double a, double b) {
  if (canonical_half(k)) {
    auto& c = coeffs[k];
    c.a += a;
    c.b += b;
  } else {
    auto& c = coeffs[neg(k)];
    c.a += a;
    c.b -= b;
  }
}

Coef FourierSeq::get(const K3& k) const {
  bool canon = canonical_half(k);
  auto it = coeffs.find(canon ? k : neg(k));
  if (it == coeffs.end()) return {};
  return canon ? it->second : Coef{it->second.a, -it->second.b};
}

double FourierSeq::magnitude(const K3& k, const Coef& c) {
  if (k == K3{0, 0, 0}) return std::abs(c.a);
  return std::hypot(c.a, c.b) / 2;
}

double FourierSeq::decay_bound(const K3& k) const {
  long n = max_norm(k);
  if (n == 0) return INFINITY;
  return std::pow(kTwoPi * double(n), -double(r)) * norm_cr;
}

bool FourierSeq::decay_ok(K3* bad) const {
  for (const auto& [k, c] : coeffs) {
    // a few ulps of slack for coefficients generated right at the bound
    if (magnitude(k, c) > decay_bound(k) * (1 + 1e-12)) {
      if (bad) *bad = k;
      return false;
    }
  }
  return true;
}

void FourierSeq::validate() const {
  K3 bad{};
  if (!decay_ok(&bad)) {
    std::ostringstream os;
    os << "coefficient at k=(" << bad[0] << "," << bad[1] << "," << bad[2] << ") breaks the C^" << r
       << " decay certificate";
    throw Error(Module::fourier, os.str());
  }
}

double FourierSeq::c2_mass(double K) const {
  double s = 0;
  for (const auto& [k, c] : coeffs) {
    long n = max_norm(k);
    if (n == 0 || double(n) < K) continue;
    s += double(n) * double(n) * 2 * magnitude(k, c);
  }
  return s;
}

long FourierSeq::max_k(int axis) const {
  long m = 0;
  for (const auto& [k, c] : coeffs) m = std::max(m, std::labs(k[axis]));
  return m;
}

void FourierSeq::prune(double tol) {
  for (auto it = coeffs.begin(); it != coeffs.end();) {
    if (std::abs(it->second.a) <= tol && std::abs(it->second.b) <= tol)
      it = coeffs.erase(it);
    else
      ++it;
  }
}

TrigSeries FourierSeq::to_trig() const {
  TrigSeries t;
  for (const auto& [k, c] : coeffs) t.modes.push_back({int(k[0]), int(k[1]), int(k[2]), c.a, c.b});
  return t;
}

FourierSeq combine(double alpha, const FourierSeq& f, double beta, const FourierSeq& g) {
  FourierSeq out;
  out.r = std::min(f.r, g.r);
  out.norm_cr = std::abs(alpha) * f.norm_cr + std::abs(beta) * g.norm_cr;
  for (const auto& [k, c] : f.coeffs) out.add(k, alpha * c.a, alpha * c.b);
  for (const auto& [k, c] : g.coeffs) out.add(k, beta * c.a, beta * c.b);
  out.prune();
  return out;
}

FourierSeq pickup(const FourierSeq& f, const Lattice& L) { return shear(f, L, 0.0); }

FourierSeq shear(const FourierSeq& f, const Lattice& L, double K) {
  if (K < 0) throw Error(Module::fourier, "shear threshold must be >= 0");
  FourierSeq out;
  out.r = f.r;
  out.norm_cr = f.norm_cr;
  for (const auto& [k, c] : f.coeffs)
    if (double(max_norm(k)) >= K && in_lattice(L, to_ivec(k))) out.coeffs[k] = c;
  out.validate();
  return out;
}

Truncation truncate(const FourierSeq& f, double K) {
  if (K < 1) throw Error(Module::fourier, "truncation order must be >= 1");
  if (f.r <= 6) throw Error(Module::fourier, "C^2 tail bound needs r >= 7");
  Truncation t;
  t.low.r = f.r;
  t.low.norm_cr = f.norm_cr;
  for (const auto& [k, c] : f.coeffs)
    if (double(max_norm(k)) < K) t.low.coeffs[k] = c;
  t.discarded_c2 = f.c2_mass(K);
  t.tail_bound = kappa3() * std::pow(K, double(6 - f.r)) * f.norm_cr;
  t.low.validate();
  return t;
}

long shell_count(long n) {
  if (n == 0) return 1;
  long a = 2 * n + 1, b = 2 * n - 1;
  return a * a * a - b * b * b;
}

double kappa3() {
  static const double value = [] {
    const long N = 10000;
    // shell n contributes (24 n^2 + 2) / n^4; the terms are summed smallest first
    long double s = 0;
    for (long n = N; n >= 1; --n) s += (long double)shell_count(n) / ((long double)n * n * n * n);
    // tail: sum_{n>N} 24/n^2 + 2/n^4 <= 24/N + 2/(3 N^3)
    s += 24.0L / N + 2.0L / (3.0L * N * N * N);
    return double(s);
  }();
  return value;
}

GridFunction synthesize(const FourierSeq& f, std::array<int, 3> N) {
  for (int ax = 0; ax < 3; ++ax)
    if (N[ax] <= 2 * f.max_k(ax))
      throw Error(Module::fourier, "grid too coarse for stored modes (aliasing) on axis " + std::to_string(ax));
  GridFunction g({N[0], N[1], N[2]}, {kTwoPi / N[0], kTwoPi / N[1], 1.0 / N[2]});
  std::vector<std::pair<K3, Coef>> modes(f.coeffs.begin(), f.coeffs.end());
  const size_t plane = size_t(N[1]) * N[2];
#pragma omp parallel for schedule(static)
  for (int i = 0; i < N[0]; ++i) {
    double* row = g.values.data() + size_t(i) * plane;
    for (const auto& [k, c] : modes) {
      double p1 = kTwoPi * double(k[0] * i % N[0]) / N[0];
      std::complex<double> base = std::complex<double>(c.a, -c.b) * std::polar(1.0, p1);
      if (k == K3{0, 0, 0}) base = {c.a, 0};
      for (int j = 0; j < N[1]; ++j) {
        std::complex<double> bj = base * std::polar(1.0, kTwoPi * double(k[1] * j % N[1]) / N[1]);
        for (int s = 0; s < N[2]; ++s) {
          std::complex<double> e = std::polar(1.0, kTwoPi * double(k[2] * s % N[2]) / N[2]);
          row[size_t(j) * N[2] + s] += (bj * e).real();
        }
      }
    }
  }
  return g;
}

FourierSeq analyze(const GridFunction& g, std::array<long, 3> kmax, double drop_below) {
  if (g.rank() != 3) throw Error(Module::fourier, "analyze expects a 3-d grid");
  const int N0 = g.dims[0], N1 = g.dims[1], N2 = g.dims[2];
  for (int ax = 0; ax < 3; ++ax)
    if (g.dims[ax] <= 2 * kmax[ax]) throw Error(Module::fourier, "requested modes alias on this grid");
  using C = std::complex<double>;
  const long K0 = kmax[0], K1 = kmax[1], K2 = kmax[2];
  const long W0 = 2 * K0 + 1, W1 = 2 * K1 + 1, W2 = 2 * K2 + 1;
  auto tw = [](long k, int j, int N) { return std::polar(1.0, -kTwoPi * double((k * j) % N) / N); };
  // separable direct transform, one axis at a time
  std::vector<C> A(size_t(N0) * N1 * W2);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < N0; ++i)
    for (int j = 0; j < N1; ++j)
      for (long k2 = -K2; k2 <= K2; ++k2) {
        C s = 0;
        const double* v = g.values.data() + (size_t(i) * N1 + j) * N2;
        for (int t = 0; t < N2; ++t) s += v[t] * tw(k2, t, N2);
        A[(size_t(i) * N1 + j) * W2 + (k2 + K2)] = s;
      }
  std::vector<C> B(size_t(N0) * W1 * W2);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < N0; ++i)
    for (long k1 = -K1; k1 <= K1; ++k1)
      for (long k2 = 0; k2 < W2; ++k2) {
        C s = 0;
        for (int j = 0; j < N1; ++j) s += A[(size_t(i) * N1 + j) * W2 + k2] * tw(k1, j, N1);
        B[(size_t(i) * W1 + (k1 + K1)) * W2 + k2] = s;
      }
  FourierSeq out;
  const double inv = 1.0 / (double(N0) * N1 * N2);
  for (long k0 = -K0; k0 <= K0; ++k0)
    for (long k1 = -K1; k1 <= K1; ++k1)
      for (long k2 = -K2; k2 <= K2; ++k2) {
        K3 k{k0, k1, k2};
        if (!canonical_half(k)) continue;
        C s = 0;
        for (int i = 0; i < N0; ++i) s += B[(size_t(i) * W1 + (k1 + K1)) * W2 + (k2 + K2)] * tw(k0, i, N0);
        s *= inv;
        Coef c = (k == K3{0, 0, 0}) ? Coef{s.real(), 0} : Coef{2 * s.real(), -2 * s.imag()};
        if (std::abs(c.a) > drop_below || std::abs(c.b) > drop_below) out.coeffs[k] = c;
      }
  (void)W0;
  return out;
}

double eval(const FourierSeq& f, double q1, double q2, double t) {
  double v = 0;
  for (const auto& [k, c] : f.coeffs) {
    double p = k[0] * q1 + k[1] * q2 + kTwoPi * k[2] * t;
    v += c.a * std::cos(p) + c.b * std::sin(p);
  }
  return v;
}

Int c2prime_mu(const IVec3& e2, const Int& lm) {
  Int n = 0;
  for (const auto& x : e2) n = std::max(n, x < 0 ? Int(-x) : x);
  if (n == 0) throw Error(Module::fourier, "e2 is the zero vector");
  return lm / n + 1;
}

namespace {

std::string kstr(const K3& k) {
  std::ostringstream os;
  os << "(" << k[0] << "," << k[1] << "," << k[2] << ")";
  return os.str();
}

// first key where the supports differ
bool same_support(const FourierSeq& a, const FourierSeq& b, K3& where) {
  for (const auto& [k, c] : a.coeffs)
    if ((c.a != 0 || c.b != 0) && !b.coeffs.count(k)) {
      where = k;
      return false;
    }
  for (const auto& [k, c] : b.coeffs)
    if ((c.a != 0 || c.b != 0) && !a.coeffs.count(k)) {
      where = k;
      return false;
    }
  return true;
}

}  // namespace

ConditionReport check_conditions(const FourierSeq& f, const Lattice& L, const Lattice& Lmax, int m, long l,
                                 long mu) {
  if (Lmax.basis.size() != 2) throw Error(Module::fourier, "C2' needs a rank-2 maximal lattice");
  ConditionReport cr;
  Int lm = ipow(Int(l), unsigned(m));
  cr.lambda = Lmax.multipliers.empty() ? Int(1) : Lmax.multipliers[0];
  cr.mu = mu > 0 ? Int(mu) : c2prime_mu(Lmax.basis[1], lm);

  FourierSeq onL = pickup(f, L), onMax = pickup(f, Lmax);
  cr.c1 = same_support(onL, onMax, cr.c1_violator);

  cr.c2 = true;
  for (const auto& [k, c] : onMax.coeffs) {
    long n = max_norm(k);
    if (n > 0 && Int(n) <= lm && (c.a != 0 || c.b != 0)) {
      cr.c2 = false;
      cr.c2_violator = k;
      break;
    }
  }

  Lattice lm_lat;
  const auto& e1 = Lmax.basis[0];
  const auto& e2 = Lmax.basis[1];
  lm_lat.basis.push_back({cr.lambda * e1[0], cr.lambda * e1[1], cr.lambda * e1[2]});
  lm_lat.basis.push_back({cr.mu * e2[0], cr.mu * e2[1], cr.mu * e2[2]});
  FourierSeq onLM = pickup(f, lm_lat);
  cr.c2p = same_support(onL, onLM, cr.c2p_violator);

  cr.report.title = "Fourier support conditions";
  cr.report.flag("C1", cr.c1, 0, cr.c1 ? "" : "violator " + kstr(cr.c1_violator));
  cr.report.flag("C2", cr.c2, 0, cr.c2 ? "" : "violator " + kstr(cr.c2_violator));
  cr.report.flag("C2prime", cr.c2p, cr.mu.convert_to<double>(),
                 cr.c2p ? "mu in value column" : "violator " + kstr(cr.c2p_violator));
  return cr;
}

FourierSeq random_admissible(std::mt19937_64& rng, int count, long kmax, int r, double norm_cr) {
  FourierSeq f;
  f.r = r;
  f.norm_cr = norm_cr;
  std::uniform_int_distribution<long> kd(-kmax, kmax);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int placed = 0, guard = 0;
  while (placed < count && guard++ < 100 * count) {
    K3 k{kd(rng), kd(rng), kd(rng)};
    if (max_norm(k) == 0) continue;
    if (!canonical_half(k)) k = {-k[0], -k[1], -k[2]};
    if (f.coeffs.count(k)) continue;
    double mag = u(rng) * f.decay_bound(k);
    double th = kTwoPi * u(rng);
    f.coeffs[k] = {2 * mag * std::cos(th), 2 * mag * std::sin(th)};
    ++placed;
  }
  return f;
}

std::string to_text(const FourierSeq& f) {
  std::ostringstream os;
  os << "# r " << f.r << " norm_cr ";
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.17g", f.norm_cr);
  os << buf << "\n# k1 k2 k3 a b\n";
  for (const auto& [k, c] : f.coeffs) {
    std::snprintf(buf, sizeof buf, "%ld %ld %ld %.17g %.17g\n", k[0], k[1], k[2], c.a, c.b);
    os << buf;
  }
  return os.str();
}

FourierSeq from_text(const std::string& text) {
  FourierSeq f;
  std::istringstream is(text);
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string key;
      while (hs >> key) {
        if (key == "r") {
          hs >> f.r;
          header = true;
        } else if (key == "norm_cr") {
          hs >> f.norm_cr;
        }
      }
      continue;
    }
    std::istringstream ls(line);
    K3 k;
    double a, b;
    if (!(ls >> k[0] >> k[1] >> k[2] >> a >> b)) throw Error(Module::fourier, "bad coefficient record: " + line);
    f.add(k, a, b);
  }
  if (!header) throw Error(Module::fourier, "coefficient file lacks the '# r ... norm_cr ...' header");
  return f;
}

}  // namespace dlab
