#include "doctest.h"

#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>

#include "dlab/resonance.hpp"
#include "oracles.hpp"

using namespace dlab;

namespace {

std::vector<Rat> farey_bruteforce(const Rat& lo, const Rat& hi, long D) {
  std::vector<Rat> out;
  for (long q = 1; q <= D; ++q)
    for (long p = 0; p <= q; ++p) {
      if (std::gcd(p, q) != 1) continue;
      Rat x(p, q);
      if (x > lo && x < hi) out.push_back(x);
    }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("expression parser gives exact rationals to 45 digits") {
  Rat r = parse_real_expr("sqrt(2)-1");
  CHECK(std::abs(to_double(r) - (std::sqrt(2.0) - 1)) <= 2.3e-16);
  CHECK(parse_real_expr("0.25") == Rat(1, 4));
  CHECK(parse_real_expr("(1+2)*3/4") == Rat(9, 4));
  CHECK_THROWS_AS(parse_real_expr("sqrt(2"), Error);
}

TEST_CASE("diophantine_check") {
  SUBCASE("rational frequency fails at k=(1,1)") {
    DiophantineVector v{Rat(1, 2), Rat(1, 2), 1.0, 0.1};
    auto rep = diophantine_check(v, 50);
    CHECK_FALSE(rep.pass);
    CHECK(rep.worst_k[0] == 1);
    CHECK(rep.worst_k[1] == 1);
    CHECK(rep.min_margin == 0.0);
  }
  SUBCASE("golden/pi vector passes with measured infimum") {
    auto v = make_diophantine("(sqrt(5)-1)/2", "0", 1.0, 1.0);
    // second component: frac((sqrt5-1)/2 * pi)
    double g = (std::sqrt(5.0) - 1) / 2;
    double w2 = std::fmod(g * M_PI, 1.0);
    v.w2 = parse_real_expr("(sqrt(5)-1)/2*pi") - 1;
    CHECK(std::abs(to_double(v.w2) - w2) < 1e-15);
    const int K = 2000;  // the acceptance binary runs the full 10^4 scan
    auto probe = diophantine_check(v, K);
    CHECK(probe.min_margin > 0);
    v.c0 = probe.min_margin;
    auto rep = diophantine_check(v, K);
    CHECK(rep.pass);
    CHECK(rep.min_margin == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("tau = 0, C0 = 1 fails") {
    auto v = make_diophantine("(sqrt(5)-1)/2", "0.3", 0.0, 1.0);
    auto rep = diophantine_check(v, 100);
    CHECK_FALSE(rep.pass);
    // brute force oracle
    double best = 1e9;
    for (int k1 = -100; k1 <= 100; ++k1)
      for (int k2 = -100; k2 <= 100; ++k2) {
        if (!k1 && !k2) continue;
        double x = k1 * (std::sqrt(5.0) - 1) / 2 + k2 * 0.3;
        best = std::min(best, std::abs(x - std::round(x)) * std::max(std::abs(k1), std::abs(k2)));
      }
    CHECK(rep.min_margin == doctest::Approx(best).epsilon(1e-9));
  }
  SUBCASE("bad constants rejected") {
    DiophantineVector v{Rat(1, 3), Rat(1, 5), -1.0, 1.0};
    CHECK_THROWS_AS(diophantine_check(v, 3), Error);
    v.tau = 1;
    v.c0 = 0;
    CHECK_THROWS_AS(diophantine_check(v, 3), Error);
  }
}

TEST_CASE("build_plan on (sqrt2-1, sqrt3-1)") {
  auto v = make_diophantine("sqrt(2)-1", "sqrt(3)-1", 1.0, 0.01);
  auto t0 = std::chrono::steady_clock::now();
  auto plan = build_plan(v, 10, 6);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs < 1.0);
  REQUIRE(plan.levels() == 6);
  const long ea[] = {4, 41, 414, 4142, 41421, 414214};
  const long eb[] = {7, 73, 732, 7321, 73205, 732051};
  for (int m = 1; m <= 6; ++m) {
    CHECK(plan.a[m - 1] == ea[m - 1]);
    CHECK(plan.b[m - 1] == eb[m - 1]);
    double d = plan.dist(m);
    CHECK(d >= std::sqrt(2.0) / std::pow(10.0, m + 1));
    CHECK(d <= std::sqrt(2.0) / std::pow(10.0, m));
    if (m > 1) CHECK(plan.dist(m) < plan.dist(m - 1));
  }
  auto seq = oracle::plan(v, 10, 6);
  REQUIRE(seq.size() == 6);
  for (int m = 1; m <= 6; ++m) {
    CHECK(seq[m - 1].first == plan.a[m - 1]);
    CHECK(seq[m - 1].second == plan.b[m - 1]);
  }
  auto rep = verify_plan_properties(plan);
  INFO(rep.text());
  CHECK(rep.pass());
}

TEST_CASE("build_plan: single level near a grid point") {
  // 0.4 + 0.6/l^2 and 0.7 + 0.6/l^2
  DiophantineVector v{Rat(406, 1000), Rat(706, 1000), 1.0, 1.0};
  auto plan = build_plan(v, 10, 1);
  // (0.4, 0.7) is too close; (0.4, 0.8) and (0.5, 0.7) tie and the smaller a wins
  CHECK(plan.a[0] == 4);
  CHECK(plan.b[0] == 8);
  CHECK(plan.dist(1) >= std::sqrt(2.0) / 100);
  CHECK(plan.dist(1) <= std::sqrt(2.0) / 10);
}

TEST_CASE("build_plan: the first coordinate never stalls on trailing zeros") {
  // sqrt2 - 1 = 0.41421356..., the level-5 and level-6 digits are '1','3'
  auto v = make_diophantine("sqrt(2)-1", "sqrt(3)-1", 1.0, 1.0);
  auto plan = build_plan(v, 10, 8);
  for (int m = 2; m <= 8; ++m) CHECK(Rat(plan.a[m - 1], plan.scale(m)) != Rat(plan.a[m - 2], plan.scale(m - 1)));
  // 0.41 + a tail of 9s forces a carry into the next digit
  DiophantineVector w{parse_real_expr("0.4099999999137"), parse_real_expr("sqrt(3)-1"), 1.0, 1.0};
  auto p2 = build_plan(w, 10, 6);
  CHECK(verify_plan_properties(p2).pass());
}

TEST_CASE("lattice_for and maximal_reduce") {
  ResonantPlan plan;
  plan.l = 10;
  plan.w1 = Rat(41421, 100000);
  plan.w2 = Rat(71, 100);
  plan.a = {4, 41};
  plan.b = {7, 71};
  auto L1 = lattice_for(plan, {1, false});
  CHECK(L1.basis[0] == IVec3{10, 0, -4});
  CHECK(L1.basis[1] == IVec3{0, 10, -7});
  auto L2 = lattice_for(plan, {2, false});
  CHECK(L2.basis[0] == IVec3{100, 0, -41});
  CHECK(L2.basis[1] == IVec3{0, 100, -71});
  auto H = lattice_for(plan, {1, true});
  CHECK(H.basis[1] == IVec3{0, 100, -71});
  for (const auto& L : {L1, L2, H}) {
    (void)L;
  }
  for (int m = 1; m <= 2; ++m) {
    auto p = plan.point(m);
    for (const auto& k : lattice_for(plan, {m, false}).basis)
      CHECK(Rat(k[0]) * p[0] + Rat(k[1]) * p[1] + Rat(k[2]) == 0);
  }
  CHECK_THROWS_AS(lattice_for(plan, {2, true}), Error);

  auto R = maximal_reduce(L1);
  CHECK(R.is_maximal);
  CHECK(R.basis[0] == IVec3{5, 0, -2});
  CHECK(R.basis[1] == IVec3{0, 10, -7});
  CHECK(R.multipliers[0] == 2);
  CHECK(R.multipliers[1] == 1);
  auto RR = maximal_reduce(R);
  CHECK(RR.basis == R.basis);
  auto R2 = maximal_reduce(Lattice{{{100, 0, -41}}, false, {}});
  CHECK(R2.basis[0] == IVec3{100, 0, -41});
  CHECK(R2.multipliers[0] == 1);
  CHECK_THROWS_AS(maximal_reduce(Lattice{{{0, 0, 0}}, false, {}}), Error);

  // per-vector reduction is not saturation: (1,8,-6) is resonant with (0.4,0.7)
  CHECK_FALSE(in_lattice(R, IVec3{1, 8, -6}));
  CHECK(in_lattice(saturate(R), IVec3{1, 8, -6}));
}

TEST_CASE("integer kernel rank oracle") {
  // rank of the intersection = 3 - rank of the stacked normals (rational elimination)
  auto v = make_diophantine("sqrt(2)-1", "sqrt(3)-1", 1.0, 1.0);
  auto plan = build_plan(v, 10, 4);
  std::vector<std::array<Rat, 2>> pts;
  for (int m = 1; m <= 4; ++m) {
    pts.push_back(plan.point(m));
    if (m < 4) pts.push_back(plan.half_point(m));
  }
  auto normal = [](const std::array<Rat, 2>& w) {
    Int N = lcm(denominator(w[0]), denominator(w[1]));
    return IVec3{Int(w[0] * N), Int(w[1] * N), N};
  };
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j) {
      auto x = intersect(resonance_lattice(pts[i][0], pts[i][1]), resonance_lattice(pts[j][0], pts[j][1]));
      int oracle = 3 - rational_rank({normal(pts[i]), normal(pts[j])});
      CHECK(rational_rank(x.basis) == oracle);
      CHECK(int(x.basis.size()) == oracle);
      // generator is the primitive cross product of the normals
      IVec3 c = primitive(cross(normal(pts[i]), normal(pts[j])));
      CHECK(in_lattice(x, c));
    }
  // consecutive vertices lie on one segment: rank 1
  auto x = intersect(resonance_lattice(pts[0][0], pts[0][1]), resonance_lattice(pts[1][0], pts[1][1]));
  CHECK(rational_rank(x.basis) == 1);
}

TEST_CASE("verify_plan_properties detects collinear segments") {
  ResonantPlan plan;
  plan.l = 10;
  plan.w1 = Rat(41421356, 100000000);
  plan.w2 = Rat(73205081, 100000000);
  // levels 1 and 3 share the first coordinate 0.4
  plan.a = {4, 41, 400, 4142};
  plan.b = {7, 73, 732, 7321};
  auto rep = verify_plan_properties(plan);
  CHECK_FALSE(rep.pass());
  CHECK_FALSE(rep.find("L1_noncollinear_i1")->pass);
  CHECK_THROWS_AS(verify_plan_properties(ResonantPlan{10, 0, 0, {4, 41}, {7, 73}}), Error);
}

TEST_CASE("sub_resonances") {
  SUBCASE("(0.7, 0.71) with q <= 19") {
    Int D = subresonance_bound(10, 1, 0.3);
    CHECK(D == 19);
    auto f = farey_interior(Rat(7, 10), Rat(71, 100), D);
    REQUIRE(f.size() == 1);
    CHECK(f[0] == Rat(12, 17));
  }
  SUBCASE("adjacent Farey neighbours give nothing") {
    CHECK(farey_interior(Rat(2, 3), Rat(3, 4), 6).empty());
    CHECK(farey_interior(Rat(1, 2), Rat(1, 2), 100).empty());
  }
  SUBCASE("agrees with exhaustive scan") {
    const Rat los[] = {Rat(7, 10), Rat(41, 100), Rat(0), Rat(1, 3), Rat(73, 100)};
    const Rat his[] = {Rat(71, 100), Rat(414, 1000), Rat(1, 7), Rat(1, 2), Rat(732, 1000)};
    for (int i = 0; i < 5; ++i)
      for (long D : {1L, 7L, 19L, 50L, 199L}) CHECK(farey_interior(los[i], his[i], D) == farey_bruteforce(los[i], his[i], D));
  }
  SUBCASE("plan segment, sorted from w_m toward w_{m+1/2}") {
    auto v = make_diophantine("sqrt(2)-1", "sqrt(3)-1", 1.0, 1.0);
    auto plan = build_plan(v, 10, 3);
    auto s = sub_resonances(plan, 1, 0.3);  // y in (0.7, 0.73), q <= 19
    auto bf = farey_bruteforce(Rat(7, 10), Rat(73, 100), 19);
    REQUIRE(s.size() == bf.size());
    for (size_t i = 0; i < s.size(); ++i) {
      CHECK(s[i][0] == Rat(4, 10));
      CHECK(s[i][1] == bf[i]);
    }
    CHECK_THROWS_AS(sub_resonances(plan, 1, 0.0), Error);
    CHECK_THROWS_AS(farey_interior(Rat(0), Rat(1), 100000, 1000), Error);
  }
}
