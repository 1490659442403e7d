#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dlab/common.hpp"
#include "dlab/symplectic.hpp"

namespace dlab {

namespace {
constexpr double kPi = std::numbers::pi;
}

Rat det3(const RatMat3& M) {
  return M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
         M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
}

RatMat3 transpose3(const RatMat3& M) {
  RatMat3 T;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) T[i][j] = M[j][i];
  return T;
}

RatMat3 inverse3(const RatMat3& M) {
  Rat d = det3(M);
  if (d == 0) throw Error(Module::symplectic, "singular matrix");
  RatMat3 C;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      // cyclic cofactor already carries the sign
      C[i][j] = (M[r0][c0] * M[r1][c1] - M[r0][c1] * M[r1][c0]) / d;
    }
  return C;
}

RatMat3 mul3(const RatMat3& A, const RatMat3& B) {
  RatMat3 C;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Rat s = 0;
      for (int k = 0; k < 3; ++k) s += A[i][k] * B[k][j];
      C[i][j] = s;
    }
  return C;
}

bool is_identity(const RatMat3& M) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (M[i][j] != (i == j ? 1 : 0)) return false;
  return true;
}

std::string mat_str(const RatMat3& M) {
  std::ostringstream os;
  for (int i = 0; i < 3; ++i) {
    os << "(";
    for (int j = 0; j < 3; ++j) os << rat_str(M[i][j]) << (j < 2 ? "," : "");
    os << ")";
  }
  return os.str();
}

namespace {

CanonicalChange finish(RatMat3 Xi, const std::array<Rat, 2>& theta, bool two) {
  if (det3(Xi) != 1) throw Error(Module::symplectic, "constructed matrix is not unimodular: " + mat_str(Xi));
  CanonicalChange C;
  C.Xi = Xi;
  C.Xi_t = transpose3(Xi);
  C.Xi_inv = inverse3(Xi);
  C.theta = theta;
  C.two_resonant = two;
  return C;
}

void require_positive(const Int& v, const char* what) {
  if (v <= 0) throw Error(Module::symplectic, std::string(what) + " must be positive");
}

}  // namespace

CanonicalChange build_xi_2res(const Int& lm, const Int& a, const Int& mu_iota, const Int& mu_c) {
  require_positive(lm, "l^m");
  require_positive(mu_iota, "mu iota");
  RatMat3 X{{{Rat(lm), 0, Rat(-a)}, {0, Rat(mu_iota), Rat(-mu_c)}, {0, 0, Rat(1) / Rat(mu_iota * lm)}}};
  auto C = finish(X, {Rat(lm), Rat(mu_iota)}, true);
  // h'(y) is centred where the linear terms cancel: p* = (a / l^m, mu c / mu iota)
  C.p_star = {Rat(a) / Rat(lm), Rat(mu_c) / Rat(mu_iota)};
  return C;
}

CanonicalChange build_xi_1res(const Int& lm, const Int& a) {
  require_positive(lm, "l^m");
  RatMat3 X{{{Rat(lm), 0, Rat(-a)}, {0, Rat(lm), 0}, {0, 0, Rat(1) / Rat(lm * lm)}}};
  auto C = finish(X, {Rat(lm), Rat(lm)}, false);
  C.p_star = {Rat(a) / Rat(lm), 0};
  return C;
}

namespace {

using DMat3 = std::array<std::array<double, 3>, 3>;

DMat3 to_d(const RatMat3& M) {
  DMat3 D;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) D[i][j] = to_double(M[i][j]);
  return D;
}

std::array<double, 3> apply(const DMat3& M, double a, double b, double c) {
  return {M[0][0] * a + M[0][1] * b + M[0][2] * c, M[1][0] * a + M[1][1] * b + M[1][2] * c,
          M[2][0] * a + M[2][1] * b + M[2][2] * c};
}

}  // namespace

Point6 transform_coords(const CanonicalChange& C, const Point6& z) {
  auto X = to_d(C.Xi);
  auto XinvT = to_d(transpose3(C.Xi_inv));
  auto xs = apply(X, z[0], z[1], z[2]);
  auto yJ = apply(XinvT, z[3] - to_double(C.p_star[0]), z[4] - to_double(C.p_star[1]), z[5]);
  return {xs[0], xs[1], xs[2], yJ[0], yJ[1], yJ[2]};
}

Point6 inverse_coords(const CanonicalChange& C, const Point6& w) {
  auto Xinv = to_d(C.Xi_inv);
  auto XT = to_d(C.Xi_t);
  auto q = apply(Xinv, w[0], w[1], w[2]);
  auto p = apply(XT, w[3], w[4], w[5]);
  return {q[0], q[1], q[2], p[0] + to_double(C.p_star[0]), p[1] + to_double(C.p_star[1]), p[2]};
}

Point6 reduce_angles(const Point6& z) {
  Point6 out = z;
  for (int i = 0; i < 2; ++i) {
    out[i] = std::fmod(out[i], 2 * kPi);
    if (out[i] < 0) out[i] += 2 * kPi;
  }
  return out;
}

std::array<double, 36> jacobian(const CanonicalChange& C) {
  std::array<double, 36> D{};
  auto X = to_d(C.Xi);
  auto XinvT = to_d(transpose3(C.Xi_inv));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      D[i * 6 + j] = X[i][j];
      D[(i + 3) * 6 + j + 3] = XinvT[i][j];
    }
  return D;
}

double two_form6(const Point6& u, const Point6& v) {
  double s = 0;
  for (int i = 0; i < 3; ++i) s += u[3 + i] * v[i] - u[i] * v[3 + i];
  return s;
}

double two_form_defect(const std::array<double, 36>& D, double factor, int samples, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1, 1);
  auto mv = [&](const Point6& u) {
    Point6 r{};
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) r[i] += D[i * 6 + j] * u[j];
    return r;
  };
  auto norm = [](const Point6& u) {
    double s = 0;
    for (double x : u) s += x * x;
    return std::sqrt(s);
  };
  double worst = 0;
  for (int n = 0; n < samples; ++n) {
    Point6 u, v;
    for (auto& x : u) x = U(rng);
    for (auto& x : v) x = U(rng);
    double lhs = two_form6(mv(u), mv(v)), rhs = factor * two_form6(u, v);
    worst = std::max(worst, std::abs(lhs - rhs) / (std::abs(factor) * norm(u) * norm(v)));
  }
  return worst;
}

PulledBackQuadratic pull_back_quadratic(const CanonicalChange& C, const std::array<Rat, 4>& A,
                                        const std::array<Rat, 2>& b) {
  // (p, I) = Xi^t (y, J) + (p*, 0); p depends on y only because Xi's last column is (.., .., 1/..) and
  // its first two columns have a zero third entry.
  const auto& T = C.Xi_t;
  if (T[0][2] != 0 || T[1][2] != 0) throw Error(Module::symplectic, "momenta must not depend on J");
  PulledBackQuadratic out;
  out.J_coefficient = T[2][2];
  // dp/dy = T[0..1][0..1]; dI/dy = T[2][0..1]
  std::array<Rat, 2> grad_h{A[0] * C.p_star[0] + A[1] * C.p_star[1] + b[0],
                            A[2] * C.p_star[0] + A[3] * C.p_star[1] + b[1]};
  for (int j = 0; j < 2; ++j) out.linear_y[j] = T[0][j] * grad_h[0] + T[1][j] * grad_h[1] + T[2][j];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Rat s = 0;
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) s += T[k][i] * A[2 * k + l] * T[l][j];
      out.hessian_y[2 * i + j] = s;
    }
  return out;
}

double Tensor2::at(const std::vector<int>& idx) const {
  if (int(idx.size()) != order) throw Error(Module::symplectic, "tensor index of wrong order");
  size_t k = 0;
  for (int i : idx) k = 2 * k + size_t(i);
  return v.at(k);
}

Tensor2 rescale_tensor(const std::array<double, 2>& theta, const Tensor2& T) {
  if (!(theta[0] > 0 && theta[1] > 0)) throw Error(Module::symplectic, "Theta must be positive");
  if (T.v.size() != (size_t(1) << T.order)) throw Error(Module::symplectic, "tensor size mismatch");
  Tensor2 out = T;
  for (size_t k = 0; k < T.v.size(); ++k) {
    double f = 1;
    for (int b = 0; b < T.order; ++b) f *= theta[(k >> b) & 1];
    out.v[k] *= f;
  }
  return out;
}

std::array<double, 6> HomogenizationScales::diag() const {
  return {lm, mu_iota, 1 / (delta * lm * mu_iota), delta / lm, delta / mu_iota, delta * delta * lm * mu_iota};
}

namespace {

Trig1 stretch(const Trig1& f, double k, double s) {
  Trig1 g;
  for (const auto& h : f.terms) g.terms.push_back({int(std::lround(h.n * k)), h.a * s, h.b * s});
  return g;
}

TrigSeries stretch(const TrigSeries& f, double k1, double k2, double s) {
  TrigSeries g;
  for (const auto& m : f.modes) {
    if (m.k3 != 0) throw Error(Module::symplectic, "Z22 must be autonomous in the resonant coordinates");
    g.modes.push_back({int(std::lround(m.k1 * k1)), int(std::lround(m.k2 * k2)), 0, m.a * s, m.b * s});
  }
  return g;
}

void check_integer_scale(double v) {
  if (std::abs(v - std::round(v)) > 0 || v < 1 || v > 1e6)
    throw Error(Module::symplectic, "stretch factors must be positive integers below 1e6");
}

}  // namespace

HomogenizedSystem homogenize(const HomogenizeInput& in, const HomogenizationScales& sc) {
  if (!(sc.delta > 0)) throw Error(Module::symplectic, "delta must be positive");
  check_integer_scale(sc.lm);
  check_integer_scale(sc.mu_iota);
  HomogenizedSystem H;
  H.scales = sc;
  H.sys.A = in.A;
  H.sys.validate();
  if (in.A[1] != 0) H.warning = "D2h(p*) is not diagonal";
  double d2 = sc.delta * sc.delta;
  // Z~(X) = Z'(Theta X) / delta^2. Harmonic n of x1 becomes harmonic n l^m of X1.
  H.sys.Z1 = stretch(in.Z1, sc.lm, 1 / d2);
  H.sys.Z2 = stretch(in.Z21, sc.mu_iota, 1 / d2);
  H.sys.Z3 = stretch(in.Z22, sc.lm, sc.mu_iota, 1 / d2);
  H.sys.eps = in.Z22.modes.empty() ? 0 : 1;
  H.block_factor = std::pow(sc.lm / sc.mu_iota, in.r + 2);
  H.hardest = sc.lm == sc.mu_iota;
  H.n1 = in.Z1.c2_proxy() / d2;
  H.n2 = in.Z21.c2_proxy() / d2 / H.block_factor;
  H.n3 = in.Z22.c2_proxy() / d2 * in.big_L / H.block_factor;
  for (const auto& h : in.Z1.terms)
    if (h.n != 0) H.z1_amplitude = std::max(H.z1_amplitude, std::hypot(h.a, h.b) / d2);
  if (in.keep_cubic) {
    // y = delta Theta^-1 Y: the cubic of h' becomes delta^3 D3h(Y,Y,Y), divided by delta^2
    H.sys.cubic = in.D3h;
    H.sys.cubic_scale = sc.delta;
  }
  double worst = 0;
  for (int i = 0; i < 720; ++i) {
    double a = 2 * kPi * i / 720, y0 = std::cos(a), y1 = std::sin(a), c = 0;
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q)
        for (int r = 0; r < 2; ++r) c += in.D3h[4 * p + 2 * q + r] * (p ? y1 : y0) * (q ? y1 : y0) * (r ? y1 : y0);
    worst = std::max(worst, std::abs(c));
  }
  H.cubic_term = sc.delta / 6 * worst;
  return H;
}

MechanicalSystem resonant_system(const HomogenizeInput& in, const HomogenizationScales& sc) {
  double g = sc.mu_iota * sc.lm;
  std::array<double, 2> th{sc.lm, sc.mu_iota};
  MechanicalSystem s;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) s.A[2 * i + j] = g * th[i] * in.A[2 * i + j] * th[j];
  s.Z1 = in.Z1.scaled(g);
  s.Z2 = in.Z21.scaled(g);
  s.Z3 = in.Z22.scaled(g);
  s.eps = in.Z22.modes.empty() ? 0 : 1;
  if (in.keep_cubic) {
    for (int k = 0; k < 8; ++k) s.cubic[k] = in.D3h[k] * th[(k >> 2) & 1] * th[(k >> 1) & 1] * th[k & 1];
    s.cubic_scale = g;
  }
  return s;
}

State to_homogenized(const State& xy, const HomogenizationScales& sc) {
  return {xy[0] / sc.lm, xy[1] / sc.mu_iota, xy[2] * sc.lm / sc.delta, xy[3] * sc.mu_iota / sc.delta};
}

State from_homogenized(const State& XY, const HomogenizationScales& sc) {
  return {XY[0] * sc.lm, XY[1] * sc.mu_iota, XY[2] * sc.delta / sc.lm, XY[3] * sc.delta / sc.mu_iota};
}

}  // namespace dlab
