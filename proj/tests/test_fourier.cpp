#include "doctest.h"

#include <cmath>
#include <numbers>

#include "dlab/fourier.hpp"

using namespace dlab;

namespace {

Lattice span(std::initializer_list<IVec3> v) {
  Lattice L;
  L.basis.assign(v.begin(), v.end());
  return L;
}

FourierSeq loose(double norm = 1e30) {
  FourierSeq f;
  f.r = 8;
  f.norm_cr = norm;
  return f;
}

}  // namespace

TEST_CASE("real form folds conjugate keys") {
  auto f = loose();
  f.add({0, -1, 2}, 1.0, 0.5);  // stored at (0,1,-2) with the sine flipped
  REQUIRE(f.coeffs.size() == 1);
  CHECK(f.coeffs.begin()->first == K3{0, 1, -2});
  CHECK(f.get({0, -1, 2}).b == 0.5);
  CHECK(f.get({0, 1, -2}).b == -0.5);
  // same function either way
  CHECK(eval(f, 0.3, 0.7, 0.1) == doctest::Approx(std::cos(-0.7 + 0.4 * std::numbers::pi) +
                                                  0.5 * std::sin(-0.7 + 0.4 * std::numbers::pi)));
}

TEST_CASE("pickup") {
  auto f = loose();
  f.add({1, 0, -1}, 0.5, 0);
  f.add({0, 1, 0}, 0.3, 0);
  f.add({2, 0, -2}, 0.1, 0.2);
  auto L = span({{1, 0, -1}});
  auto p = pickup(f, L);
  CHECK(p.coeffs.size() == 2);
  CHECK(p.get({1, 0, -1}).a == 0.5);
  CHECK(p.get({2, 0, -2}).b == 0.2);
  CHECK(p.get({0, 1, 0}).a == 0.0);
  auto Z3 = span({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  CHECK(pickup(f, Z3).coeffs.size() == f.coeffs.size());
  auto pp = pickup(p, L);
  CHECK(pp.coeffs.size() == p.coeffs.size());
  for (const auto& [k, c] : p.coeffs) CHECK(pp.get(k).a == c.a);
}

TEST_CASE("shear") {
  auto f = loose();
  for (long j = 1; j <= 4; ++j) f.add({5 * j, 0, -2 * j}, 1.0 / j, 0);
  auto L = span({{5, 0, -2}});
  CHECK(shear(f, L, 0).coeffs.size() == pickup(f, L).coeffs.size());
  auto s = shear(f, L, 11);
  CHECK(s.coeffs.size() == 2);
  CHECK(s.coeffs.count({15, 0, -6}) == 1);
  CHECK(s.coeffs.count({20, 0, -8}) == 1);
  CHECK_THROWS_AS(shear(f, L, -1), Error);

  // C2 through shear: cutoff l^m = 10 removes the j = 1 coefficient (|k| = 5)
  auto g = loose();
  g.add({15, 0, -6}, 1, 0);
  g.add({20, 0, -8}, 1, 0);
  CHECK(shear(g, L, 10).coeffs.size() == pickup(g, L).coeffs.size());
  CHECK(shear(f, L, 10).coeffs.size() < pickup(f, L).coeffs.size());
}

TEST_CASE("operators are linear and re-validate decay") {
  std::mt19937_64 rng(7);
  auto f = random_admissible(rng, 40, 6, 8, 1.0);
  auto g = random_admissible(rng, 40, 6, 8, 1.0);
  auto L = span({{1, 0, -1}, {0, 2, 1}});
  auto lhs = pickup(combine(0.3, f, -1.7, g), L);
  auto rhs = combine(0.3, pickup(f, L), -1.7, pickup(g, L));
  for (const auto& [k, c] : lhs.coeffs) {
    CHECK(rhs.get(k).a == doctest::Approx(c.a).epsilon(1e-15));
    CHECK(rhs.get(k).b == doctest::Approx(c.b).epsilon(1e-15));
  }
  CHECK(lhs.coeffs.size() == rhs.coeffs.size());
  auto s1 = shear(combine(2, f, 3, g), L, 3), s2 = combine(2, shear(f, L, 3), 3, shear(g, L, 3));
  CHECK(s1.coeffs.size() == s2.coeffs.size());
  CHECK(f.decay_ok());
  auto bad = f;
  bad.norm_cr = 1e-30;
  CHECK_THROWS_AS(pickup(bad, L), Error);
}

TEST_CASE("pickup on a rank-1 intersection composes") {
  // lattices of two frequencies on one vertical segment x = 0.4
  auto L1 = resonance_lattice(Rat(4, 10), Rat(7, 10));
  auto L2 = resonance_lattice(Rat(4, 10), Rat(73, 100));
  auto X = intersect(L1, L2);
  REQUIRE(X.basis.size() == 1);
  auto f = loose();
  f.add({5, 0, -2}, 1, 0);    // on the line lattice
  f.add({10, 0, -4}, 0.5, 0); // multiple of it
  f.add({1, 8, -6}, 0.2, 0);  // only in L1
  f.add({0, 100, -73}, 0.1, 0);  // only in L2
  auto a = pickup(f, X), b = pickup(pickup(f, L1), L2);
  CHECK(a.coeffs.size() == 2);
  CHECK(b.coeffs.size() == 2);
  for (const auto& [k, c] : a.coeffs) CHECK(b.get(k).a == c.a);
}

TEST_CASE("kappa3 and shell counts") {
  for (long n = 1; n < 50; ++n) {
    long brute = 0;
    for (long i = -n; i <= n; ++i)
      for (long j = -n; j <= n; ++j)
        for (long k = -n; k <= n; ++k)
          if (max_norm({i, j, k}) == n) ++brute;
    CHECK(shell_count(n) == brute);
    CHECK(shell_count(n) == 24 * n * n + 2);
  }
  // closed form 24 zeta(2) + 2 zeta(4)
  const double pi = std::numbers::pi;
  double exact = 24 * pi * pi / 6 + 2 * pi * pi * pi * pi / 90;
  CHECK(kappa3() >= exact);
  CHECK(kappa3() - exact < 3e-3);
  // the 8 l^2 shell estimate undercounts: its bound 8 pi^2/6 is below the true sum
  CHECK(8 * pi * pi / 6 < exact);
}

TEST_CASE("truncate") {
  auto f = loose(1.0);
  CHECK_THROWS_AS(truncate(f, 0.5), Error);
  f.r = 6;
  CHECK_THROWS_AS(truncate(f, 10), Error);
  f.r = 8;
  double amp = f.decay_bound({10, 0, 0});
  f.add({10, 0, 0}, 2 * amp, 0);
  auto t = truncate(f, 20);
  CHECK(t.low.coeffs.size() == 1);
  CHECK(t.discarded_c2 == 0);
  CHECK(t.tail_bound == doctest::Approx(kappa3() * std::pow(20.0, -2)));
  auto t5 = truncate(f, 5);
  CHECK(t5.low.coeffs.empty());
  CHECK(t5.discarded_c2 == doctest::Approx(100 * 2 * amp));
  CHECK(t5.discarded_c2 <= t5.tail_bound);

  std::mt19937_64 rng(2024);
  int violations = 0;
  for (int trial = 0; trial < 20; ++trial) {
    auto g = random_admissible(rng, 200, 60, 8, 1.0);
    for (double K : {10.0, 20.0, 40.0}) {
      auto tr = truncate(g, K);
      if (tr.discarded_c2 > tr.tail_bound) ++violations;
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("synthesize and analyze") {
  auto f = loose(1e12);
  f.add({1, 0, 0}, 1, 0);
  auto g = synthesize(f, {8, 4, 4});
  for (int i = 0; i < 8; ++i) CHECK(g.values[size_t(i) * 16 + 5] == doctest::Approx(std::cos(2 * std::numbers::pi * i / 8)));
  auto z = synthesize(loose(), {4, 4, 4});
  CHECK(z.max() == 0.0);
  CHECK(z.min() == 0.0);
  CHECK_THROWS_AS(synthesize(f, {2, 4, 4}), Error);

  std::mt19937_64 rng(11);
  auto r = random_admissible(rng, 30, 8, 8, 1e6);
  r.add({0, 0, 0}, 0.25, 0);
  auto grid = synthesize(r, {64, 64, 64});
  auto back = analyze(grid, {8, 8, 8}, 1e-13);
  double err = 0;
  for (const auto& [k, c] : r.coeffs) {
    auto b = back.get(k);
    err = std::max({err, std::abs(b.a - c.a), std::abs(b.b - c.b)});
  }
  for (const auto& [k, c] : back.coeffs) {
    auto o = r.get(k);
    err = std::max({err, std::abs(o.a - c.a), std::abs(o.b - c.b)});
  }
  CHECK(err <= 1e-12);
}

TEST_CASE("check_conditions") {
  CHECK(c2prime_mu({0, 7, -3}, 100) == 15);
  // w* = (4/10, 12/17): e1 = (5,0,-2) with lambda = 2, e2 = (0,17,-12)
  Lattice L;
  L.basis = {{10, 0, -4}, {0, 17, -12}};
  auto Lmax = maximal_reduce(L);
  CHECK(Lmax.multipliers[0] == 2);
  int m = 1;
  long l = 10;
  Int mu = c2prime_mu(Lmax.basis[1], 10);
  CHECK(mu == 1);

  SUBCASE("support on lambda e1 and mu e2 passes") {
    auto f = loose();
    f.add({20, 0, -8}, 1, 0);  // |k| = 20 > l^m
    f.add({0, 17, -12}, 0.5, 0);
    f.add({10, 17, -16}, 0.1, 0.1);
    f.add({1, 1, 0}, 0.3, 0);  // non-resonant, ignored
    auto cr = check_conditions(f, L, Lmax, m, l);
    CHECK(cr.c1);
    CHECK(cr.c2);
    CHECK(cr.c2p);
    CHECK(cr.report.pass());
  }
  SUBCASE("coefficient at e1 breaks C1 and C2") {
    auto f = loose();
    f.add({5, 0, -2}, 1, 0);
    auto cr = check_conditions(f, L, Lmax, m, l);
    CHECK_FALSE(cr.c1);
    CHECK(cr.c1_violator == K3{5, 0, -2});
    CHECK_FALSE(cr.c2);
  }
  SUBCASE("coefficient at e2 below the mu threshold breaks C2'") {
    Lattice L2;
    L2.basis = {{10, 0, -4}, {0, 7, -3}};
    auto M2 = maximal_reduce(L2);
    auto f = loose();
    f.add({0, 7, -3}, 1, 0);
    auto cr = check_conditions(f, L2, M2, 2, 10);
    CHECK(cr.mu == 15);
    CHECK_FALSE(cr.c2p);
    CHECK(cr.c2p_violator == K3{0, 7, -3});
    f.coeffs.clear();
    f.add({0, 105, -45}, 1, 0);
    CHECK(check_conditions(f, L2, M2, 2, 10).c2p);
  }
}

TEST_CASE("coefficient text round trip") {
  std::mt19937_64 rng(3);
  auto f = random_admissible(rng, 25, 5, 9, 2.5);
  auto g = from_text(to_text(f));
  CHECK(g.r == 9);
  CHECK(g.norm_cr == 2.5);
  REQUIRE(g.coeffs.size() == f.coeffs.size());
  for (const auto& [k, c] : f.coeffs) {
    CHECK(g.get(k).a == c.a);
    CHECK(g.get(k).b == c.b);
  }
  CHECK_THROWS_AS(from_text("1 0 0 1 0\n"), Error);
}
