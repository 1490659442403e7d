#include "doctest.h"

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "dlab/weakkam.hpp"
#include "oracles.hpp"

using namespace dlab;

namespace {

constexpr double kPi = std::numbers::pi;

using oracle::pendulum_alpha;
using oracle::pendulum_c_of_E;

LaxOleinikParams fine1d() {
  LaxOleinikParams p;
  p.n = 512;
  p.window = 128;
  return p;
}

LaxOleinikParams coarse2d(int n, int window) {
  LaxOleinikParams p;
  p.n = n;
  p.window = window;
  p.margin = 2;
  p.tol = 1e-7;
  return p;
}

GridFunction random_grid(const GridFunction& like, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> U(-scale, scale);
  GridFunction g = like;
  for (auto& v : g.values) v = U(rng);
  return g;
}

}  // namespace

TEST_CASE("oracle self check") {
  // at the separatrix energy the rotation integral is 4 sqrt(lambda) / pi
  CHECK(pendulum_c_of_E(0, 1) == doctest::Approx(4 / kPi).epsilon(1e-12));
  CHECK(pendulum_c_of_E(0, 3) == doctest::Approx(4 * std::sqrt(3.0) / kPi).epsilon(1e-12));
  // high energy: c ~ sqrt(2E)
  CHECK(pendulum_c_of_E(1e6, 1) == doctest::Approx(std::sqrt(2e6)).epsilon(1e-6));
  CHECK(pendulum_alpha(0.5, 1) == 0);
}

TEST_CASE("pendulum at c = 0") {
  auto L = TonelliLagrangian::pendulum(1);
  auto r = weak_kam_solve(L, {0, 0}, fine1d());
  CHECK(r.report.pass());
  CHECK(std::abs(r.alpha) <= 1e-3);
  CHECK(std::abs(r.alpha_plus) <= 1e-3);
  int n = r.u_minus.dims[0];
  // u_minus(pi) = int_0^pi sqrt(2 (1 - cos x)) dx = 4
  CHECK(r.u_minus.at(n / 2) == doctest::Approx(4).epsilon(0.02));
  auto B = barrier(r);
  CHECK(B.min() >= 0);
  CHECK(B.at(0) == doctest::Approx(0).epsilon(1e-12));
  CHECK(B.at(n / 2) == doctest::Approx(8).epsilon(0.02));
  // even Lagrangian: the reversed operator is the forward one, so u_plus = -u_minus
  double sym = 0;
  for (size_t k = 0; k < r.u_minus.size(); ++k)
    sym = std::max(sym, std::abs(r.u_plus.values[k] + r.u_minus.values[k]));
  CHECK(sym <= 1e-9);

  // Mane set is the hyperbolic fixed point: a short interval around x = 0
  auto m = mane_set_estimate(r);
  CHECK(m.threshold == doctest::Approx(3 * r.hj_residual));
  CHECK(m.coverage < 0.1);
  REQUIRE(m.intervals.size() == 1);
  double lo = m.intervals[0].lo, hi = m.intervals[0].hi;
  bool has_zero = (lo <= 0 && hi >= 0) || (lo <= 2 * kPi && hi >= 2 * kPi);
  CHECK(has_zero);
}

TEST_CASE("pendulum rotating class") {
  auto L = TonelliLagrangian::pendulum(1);
  auto p = fine1d();
  for (double c : {2.0, -2.0, 3.0}) {
    auto r = weak_kam_solve(L, {c, 0}, p);
    CHECK(r.report.pass());
    double ref = pendulum_alpha(c, 1);
    CHECK(r.alpha == doctest::Approx(ref).epsilon(0.01));
    CHECK(std::abs(r.alpha - r.alpha_plus) <= 1e-6 * std::max(1.0, std::abs(r.alpha)));
    // a whole invariant circle: the Mane set covers the loop
    auto m = mane_set_estimate(r);
    CHECK(m.coverage == doctest::Approx(1));
    REQUIRE(m.intervals.size() == 1);
    CHECK(m.intervals[0].hi - m.intervals[0].lo == doctest::Approx(2 * kPi));
  }
  // alpha is even in c for a mechanical Lagrangian
  CHECK(alpha_at(L, {1.7, 0}, p) == doctest::Approx(alpha_at(L, {-1.7, 0}, p)).epsilon(1e-9));
}

TEST_CASE("pendulum flat edge") {
  auto L = TonelliLagrangian::pendulum(1);
  auto p = fine1d();
  p.n = 256;
  p.window = 64;
  double c0 = 4 / kPi;
  for (Vec2 dir : {Vec2{1, 0}, Vec2{-1, 0}}) {
    auto root = ray_level(L, {0, 0}, dir, 0, 1e-3, 3, p, 0.2);
    REQUIRE(root.ok);
    CHECK(root.s == doctest::Approx(c0).epsilon(0.03));
    CHECK(root.value == doctest::Approx(1e-3).epsilon(0.2));
  }
  // inside the flat alpha vanishes at any resolution, up to the convergence tolerance / t
  for (int n : {32, 64, 128}) {
    LaxOleinikParams q;
    q.n = n;
    q.window = n / 4;
    CHECK(std::abs(alpha_at(L, {0.9, 0}, q)) <= 1e-7);
  }
  // level never reached inside [0, s_hi]
  CHECK_FALSE(ray_level(L, {0, 0}, {1, 0}, 0, 1e-3, 1.0, p).ok);

  auto scan = alpha_scan(L, {-2, -1.8, -1.6, -1.4, -1.3, -1.2, -1, -0.5, 0, 0.5, 1, 1.2, 1.3, 1.4, 1.6, 1.8, 2},
                         {}, 1e-3, p);
  CHECK(scan.report.pass());
  CHECK(std::abs(scan.alpha_min) <= 1e-7);
}

TEST_CASE("free particle") {
  // alpha(c) = 1/2 |c|^2 with u constant and B identically zero
  for (int dim : {1, 2}) {
    auto L = TonelliLagrangian::free(dim);
    LaxOleinikParams p;
    p.n = dim == 1 ? 64 : 24;
    p.window = 6;
    for (Vec2 c : {Vec2{std::sqrt(2.0), std::numbers::e / 2}, Vec2{-0.3 * kPi, 0.7}}) {
      if (dim == 1) c[1] = 0;
      auto r = weak_kam_solve(L, c, p);
      CHECK(r.report.pass());
      CHECK(std::abs(r.alpha - 0.5 * (c[0] * c[0] + c[1] * c[1])) <= 1e-6);
      auto B = barrier(r);
      CHECK(B.max() <= 1e-9);
      CHECK(mane_set_estimate(B, 1e-6).coverage == doctest::Approx(1));
    }
  }
}

TEST_CASE("operator is monotone and non-expansive") {
  auto L = TonelliLagrangian::pendulum(1);
  std::mt19937_64 rng(5);
  for (int dim : {1, 2}) {
    TonelliLagrangian Ld = L;
    if (dim == 2) {
      Ld.dim = 2;
      Ld.K = {1, 0.3, 0.3, 0.5};
      Ld.b = {0.2, -0.1};
      Ld.U = [](double x, double y) { return 2 - std::cos(x) - std::cos(y) + 0.3 * std::cos(x - y); };
    }
    LaxOleinikParams p;
    p.n = dim == 1 ? 64 : 16;
    p.window = 8;
    LaxOleinik T(Ld, {0.4, -0.2}, p);
    auto z = T.zero();
    int not_monotone = 0, serial_mismatch = 0;
    double excess = 0;
    for (int k = 0; k < 1000; ++k) {
      auto u = random_grid(z, rng, 3);
      auto v = random_grid(z, rng, 3);
      auto w = u;  // w >= u pointwise
      std::uniform_real_distribution<double> U(0, 1);
      for (auto& x : w.values) x += U(rng);
      auto Tu = T.step(u), Tv = T.step(v), Tw = T.step(w);
      double d = 0, dT = 0;
      for (size_t i = 0; i < u.size(); ++i) {
        d = std::max(d, std::abs(u.values[i] - v.values[i]));
        dT = std::max(dT, std::abs(Tu.values[i] - Tv.values[i]));
        if (Tw.values[i] < Tu.values[i]) ++not_monotone;
      }
      excess = std::max(excess, dT - d);
      if (k % 50 == 0 && T.step_serial(u).values != Tu.values) ++serial_mismatch;
    }
    CHECK(not_monotone == 0);
    CHECK(serial_mismatch == 0);
    // equality of the min-plus differences holds up to rounding of the added costs
    CHECK(excess <= 1e-13);
    // constants commute with the operator
    auto u = random_grid(z, rng, 1);
    auto u5 = u;
    for (auto& x : u5.values) x += 5;
    auto a = T.step(u), b = T.step(u5);
    double comm = 0;
    for (size_t i = 0; i < a.size(); ++i) comm = std::max(comm, std::abs(b.values[i] - a.values[i] - 5));
    CHECK(comm <= 1e-13);
  }
}

TEST_CASE("semiconcavity is stable under refinement") {
  auto L = TonelliLagrangian::pendulum(1);
  LaxOleinikParams a;
  a.n = 256;
  a.window = 64;
  auto b = a;
  b.n = 512;
  b.window = 128;
  for (double c : {0.0, 2.0}) {
    double ca = weak_kam_solve(L, {c, 0}, a, nullptr, false).semiconcavity;
    double cb = weak_kam_solve(L, {c, 0}, b, nullptr, false).semiconcavity;
    MESSAGE("c = " << c << " semiconcavity " << ca << " / " << cb);
    CHECK(std::isfinite(ca));
    CHECK(std::abs(cb - ca) <= 0.25 * std::max(std::abs(ca), std::abs(cb)));
  }
}

TEST_CASE("uncoupled pendulums: rectangular flat") {
  auto sys = uncoupled_pendulums(4, 1);
  auto L = TonelliLagrangian::from_mechanical(sys);
  std::vector<double> c1, c2;
  for (int k = -10; k <= 10; ++k) c1.push_back(0.3 * k);
  for (int k = -6; k <= 6; ++k) c2.push_back(0.3 * k);
  auto t0 = std::chrono::steady_clock::now();
  auto s = alpha_scan(L, c1, c2, 1e-3, coarse2d(24, 6));
  MESSAGE("scan " << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s, "
                  << s.polygon.kind);
  CHECK(s.report.pass());
  CHECK(s.convexity_violations == 0);
  CHECK(s.polygon.kind == "rectangle");
  CHECK(s.symmetry_defect <= 1e-12);
  double cell = 0.3;
  for (const auto& e : s.edges) {
    if (e.g == HClass{1, 0}) CHECK(std::abs(e.c_g - 8 / kPi) <= cell);
    if (e.g == HClass{0, 1}) CHECK(std::abs(e.c_g - 4 / kPi) <= cell);
  }
}

TEST_CASE("weak KAM error handling") {
  auto L = TonelliLagrangian::pendulum(1);
  LaxOleinikParams p;
  p.n = 32;
  p.window = 8;
  auto r = weak_kam_solve(L, {0, 0}, p);
  p.n = 64;
  auto r2 = weak_kam_solve(L, {0, 0}, p);
  CHECK_THROWS_AS(barrier(r.u_minus, r2.u_plus), Error);
  try {
    barrier(r.u_minus, r2.u_plus);
  } catch (const Error& e) {
    CHECK(e.exit_code() == 18);
  }
  LaxOleinik T(L, {0, 0}, p);
  CHECK_THROWS_AS(T.step(r.u_minus), Error);

  auto bad = TonelliLagrangian::free(2);
  bad.K = {1, 2, 2, 1};
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK_THROWS_AS(weak_kam_solve(bad, {0, 0}, p), Error);
  bad.K = {1, 0, 0, 1};
  bad.U = nullptr;
  CHECK_THROWS_AS(bad.validate(), Error);
  LaxOleinikParams tiny;
  tiny.n = 2;
  CHECK_THROWS_AS(weak_kam_solve(L, {0, 0}, tiny), Error);

  auto sys = uncoupled_pendulums(1, 1);
  sys.cubic_scale = 1;
  CHECK_THROWS_AS(TonelliLagrangian::from_mechanical(sys), Error);
  CHECK_THROWS_AS(annulus_diagnostic(L, {0, 0}, 0, {0.1}, {0.0}, 1e-6, 0.3, 2, p), Error);
}
