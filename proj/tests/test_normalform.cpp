#include "doctest.h"

#include <cmath>
#include <numbers>

#include "dlab/normalform.hpp"

using namespace dlab;

namespace {

const double pi = std::numbers::pi;

FourierSeq loose(double norm = 1e30) {
  FourierSeq f;
  f.r = 8;
  f.norm_cr = norm;
  return f;
}

}  // namespace

TEST_CASE("period of a rational frequency") {
  CHECK(period_tstar(Int(10), Int(4)) == 20);
  CHECK(period_tstar(Rat(2, 5), Rat(1, 3)) == 15);
  CHECK(period_tstar(Rat(41, 100), Rat(12, 17)) == 1700);
  Rat irr(Int(1), Int("100000000000000000001"));
  CHECK_THROWS_AS(period_tstar(irr, Rat(1, 2)), Error);
  CHECK_THROWS_AS(resonant_average(loose(), irr, Rat(1, 2)), Error);
}

TEST_CASE("resonant average") {
  SUBCASE("single resonant mode is kept whole") {
    auto f = loose();
    f.add({5, 0, -2}, 1, 0);  // 5 * 2/5 - 2 = 0
    auto Z = resonant_average(f, Rat(2, 5), Rat(1, 3));
    REQUIRE(Z.coeffs.size() == 1);
    CHECK(Z.get({5, 0, -2}).a == 1.0);
  }
  SUBCASE("lattice filter equals the time average") {
    std::mt19937_64 rng(5);
    auto f = random_admissible(rng, 40, 6, 8, 1e12);
    f.add({5, 0, -2}, 0.3, -0.1);
    f.add({0, 3, -1}, 0.2, 0.4);
    f.add({5, 3, -3}, -0.1, 0.05);
    f.add({5, -3, -1}, 0.07, 0);
    f.add({0, 0, 0}, 0.5, 0);
    Rat w1(2, 5), w2(1, 3);
    auto Z = resonant_average(f, w1, w2);
    CHECK(Z.coeffs.size() >= 5);
    for (const auto& [k, c] : Z.coeffs) CHECK(is_resonant(k, w1, w2));
    std::uniform_real_distribution<double> U(0, 1);
    double err = 0;
    for (int s = 0; s < 50; ++s) {
      double q1 = 2 * pi * U(rng), q2 = 2 * pi * U(rng), t = U(rng);
      err = std::max(err, std::abs(eval(Z, q1, q2, t) - time_average(f, w1, w2, q1, q2, t)));
    }
    CHECK(err <= 1e-10);
  }
}

TEST_CASE("cohomological equation") {
  Rat w1(1234567, 10000000), w2(1, 3);
  SUBCASE("single mode") {
    auto f = loose();
    f.add({1, 0, 0}, 1, 0);
    auto W = solve_cohomological(f, w1, w2, 10);
    REQUIRE(W.coeffs.size() == 1);
    CHECK(W.get({1, 0, 0}).a == 0.0);
    CHECK(W.get({1, 0, 0}).b == doctest::Approx(1 / (2 * pi * 0.1234567)).epsilon(1e-14));
    CHECK(cohomological_residual(W, f, w1, w2, 10) <= 1e-9);
  }
  SUBCASE("pure average gives W = 0; reject mode refuses it") {
    auto f = loose();
    f.add({3, 0, -1}, 1, 0.5);
    Rat v1(1, 3);
    CHECK(solve_cohomological(f, v1, w2, 10).coeffs.empty());
    CHECK_THROWS_AS(solve_cohomological(f, v1, w2, 10, ResonantModes::reject), Error);
    // f - Z has nothing left to reject
    auto rest = combine(1, f, -1, resonant_average(f, v1, w2));
    rest.prune();
    CHECK_NOTHROW(solve_cohomological(rest, v1, w2, 10, ResonantModes::reject));
  }
  SUBCASE("superposition") {
    auto f = loose(), g = loose();
    f.add({1, 2, 0}, 0.7, -0.2);
    g.add({0, 1, -1}, 0.1, 0.3);
    auto Wf = solve_cohomological(f, w1, w2, 10), Wg = solve_cohomological(g, w1, w2, 10);
    auto Wfg = solve_cohomological(combine(1, f, 1, g), w1, w2, 10);
    auto sum = combine(1, Wf, 1, Wg);
    for (const auto& [k, c] : Wfg.coeffs) {
      CHECK(sum.get(k).a == doctest::Approx(c.a));
      CHECK(sum.get(k).b == doctest::Approx(c.b));
    }
  }
  SUBCASE("random input: residual and exact partition") {
    std::mt19937_64 rng(17);
    auto f = random_admissible(rng, 30, 8, 8, 1e12);
    Rat v1(2, 5), v2(1, 3);
    f.add({5, 0, -2}, 0.2, 0);
    f.add({0, 3, -1}, 0.1, 0.1);
    double K = 6;
    auto Z = resonant_average(f, v1, v2);
    auto W = solve_cohomological(f, v1, v2, K);
    CHECK(cohomological_residual(W, f, v1, v2, K, 64) <= 1e-9);
    for (const auto& [k, c] : f.coeffs) {
      bool low = max_norm(k) <= K;
      bool inZ = Z.coeffs.count(k) > 0, inW = W.coeffs.count(k) > 0;
      if (low) CHECK(inZ != inW);
      if (!low) CHECK_FALSE(inW);
    }
    for (const auto& [k, c] : W.coeffs) CHECK_FALSE(is_resonant(k, v1, v2));
  }
}

TEST_CASE("small denominators") {
  for (double a : {0.0, 41.0, 100.0}) {
    double dp = 2e-6;
    double alpha = small_denominator_alpha(10, 2, a, 0, dp, 0.3);
    CHECK(alpha == dp / std::sqrt(1e4 + a * a));
    double ratio = alpha / (dp / 100);
    CHECK(ratio >= 1 / std::sqrt(2.0) - 1e-15);
    CHECK(ratio <= 1.0);
  }
  CHECK(small_denominator_alpha(10, 2, 41, 1e-9, 2e-6, 0.3) < 0);
  CHECK_THROWS_AS(small_denominator_alpha(10, 2, 41, 1e-3, 1e-4, 0.3), Error);

  SegmentSpec seg;
  seg.a = 41;
  seg.y_lo = Rat(73, 100);
  seg.y_hi = Rat(732, 1000);
  auto res = small_denominator_margin(seg, 1e-12, 2e-6, 0.3, 200);
  CHECK(res.cutoff == 398);
  CHECK(res.samples == 200);
  CHECK(res.excluded_points > 0);
  CHECK(res.admissible);
  CHECK(res.measured_min >= res.alpha);
  CHECK(res.pass);
}

TEST_CASE("admissibility report") {
  AdmissibilityParams p;
  p.sigma = 58;
  p.r = 8;
  p.xi = 4.5;
  auto rep = admissibility_report(p);
  CHECK(rep.find("index1")->pass);
  CHECK(rep.find("xi_lower")->pass);
  CHECK(rep.find("index_chain")->pass);
  CHECK(inf_delta_plus_exponent(58, 8, 4.5) == 0.25);
  CHECK(rep.find("inf_delta_plus_exponent")->pass);

  p.sigma = p.r + 1;
  CHECK_FALSE(admissibility_report(p).find("index1")->pass);

  // exponent climbs toward 1/2
  double prev = 0;
  for (double s = 58; s <= 5000; s += 1) {
    double e = inf_delta_plus_exponent(s, 8, 4.5);
    CHECK(e > prev);
    CHECK(e < 0.5);
    prev = e;
  }
  CHECK(prev > 0.49);

  // the shipped parameters pass every line, and raising sigma keeps them passing
  AdmissibilityParams q;
  auto base = admissibility_report(q);
  CHECK(base.pass());
  for (double s = q.sigma; s <= 200; s += 5) {
    q.sigma = s;
    auto r2 = admissibility_report(q);
    for (const auto& c : base.checks)
      if (c.pass) CHECK_MESSAGE(r2.find(c.name)->pass, c.name << " at sigma " << s);
  }
}

TEST_CASE("split_Z") {
  IVec3 g1{10, 0, -4}, g2{0, 17, -12};
  auto Z = loose();
  Z.add({0, 0, 0}, 0.5, 0);
  Z.add({10, 0, -4}, 1, 0);
  Z.add({0, 17, -12}, 0.3, 0.1);
  Z.add({10, 17, -16}, 0.05, -0.02);
  Z.add({10, -17, 8}, 0.01, 0);
  auto s = split_Z(Z, g1, g2);
  CHECK(s.Z1.modes.size() == 2);
  CHECK(s.Z21.modes.size() == 1);
  CHECK(s.Z22.modes.size() == 2);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(0, 1);
  for (int n = 0; n < 20; ++n) {
    double q1 = 2 * pi * U(rng), q2 = 2 * pi * U(rng), t = U(rng);
    double x1 = 10 * q1 - 4 * 2 * pi * t, x2 = 17 * q2 - 12 * 2 * pi * t;
    double parts = s.Z1.value(x1, x2) + s.Z21.value(x1, x2) + s.Z22.value(x1, x2);
    CHECK(parts == doctest::Approx(eval(Z, q1, q2, t)).epsilon(1e-12));
  }

  auto unc = loose();
  unc.add({10, 0, -4}, 1, 0);
  unc.add({0, 34, -24}, 0.2, 0);
  CHECK(split_Z(unc, g1, g2).Z22.modes.empty());

  auto bad = loose();
  bad.add({5, 0, -2}, 1, 0);  // on the line but not an integer multiple of g1
  CHECK_THROWS_AS(split_Z(bad, g1, g2), Error);
  bad.coeffs.clear();
  bad.add({1, 1, 1}, 1, 0);
  CHECK_THROWS_AS(split_Z(bad, g1, g2), Error);

  CHECK(as_trig1_x1(s.Z1).terms.size() == 2);
  CHECK_THROWS_AS(as_trig1_x1(s.Z22), Error);
}

TEST_CASE("U1 and U2") {
  UConstants c;
  double d = 0.1, sigma = 4, l = 10, r = 8;
  int m = 1;
  double cap = c.c5 * std::pow(d, sigma) / std::pow(l, m * (r + 2));
  Trig1 A{{{1, cap, 0}}};
  CHECK(check_U1_U2(A, d, sigma, m, l, r, c).pass());
  Trig1 weak{{{1, cap * 0.9, 0}}};
  auto rw = check_U1_U2(weak, d, sigma, m, l, r, c);
  CHECK_FALSE(rw.pass());
  CHECK(rw.find("U1_eigenvalue")->pass);
  CHECK_FALSE(rw.find("U2_eigenvalue")->pass);

  Trig1 two{{{1, 1, 0}, {2, 1, 0}}};
  auto ex = find_extrema(two);
  REQUIRE(ex.maximizers.size() == 1);
  CHECK(std::abs(ex.maximizers[0].x) < 1e-9);
  CHECK(ex.maximizers[0].curvature == doctest::Approx(-5).epsilon(1e-9));
  // brute-force scan agrees on the location
  double bx = 0, bv = -INFINITY;
  for (int i = 0; i < 100000; ++i) {
    double x = 2 * pi * i / 100000;
    if (two.value(x) > bv) bv = two.value(x), bx = x;
  }
  CHECK(std::min(bx, 2 * pi - bx) < 1e-4);
  CHECK(check_U1_U2(two, d, sigma, m, l, r, c).pass());

  Trig1 cos2{{{2, 1, 0}}};
  auto rc = check_U1_U2(cos2, d, sigma, m, l, r, c);
  CHECK_FALSE(rc.find("U2_unique_min")->pass);
  CHECK(rc.find("U2_unique_min")->lhs == 2);

  Trig1 flat{{{3, 0, 0}}};
  CHECK_FALSE(check_U1_U2(flat, d, sigma, m, l, r, c).pass());
}

TEST_CASE("U3 and U4") {
  UConstants c;
  double ds = 0.1, sigma = 4, mi = 15, r = 8;
  double cap = c.c6 * std::pow(ds, sigma) / std::pow(mi, r + 2);
  Trig1 Z1{{{1, 100 * cap, 0}}};
  Trig1 at{{{1, cap, 0}}};
  auto ok = check_U3(at, Z1, ds, sigma, mi, r, c);
  CHECK(ok.pass());
  CHECK(ok.find("U3_c2_cap")->lhs == ok.find("U3_c2_cap")->rhs);
  Trig1 over{{{1, 2 * cap, 0}}};
  auto bad = check_U3(over, Z1, ds, sigma, mi, r, c);
  CHECK_FALSE(bad.find("U3_c2_cap")->pass);
  CHECK(bad.find("U3_c2_cap")->note.find("ratio 2") != std::string::npos);
  UConstants c2 = c;
  c2.c6 = 1.0;  // not below c5/2
  CHECK_FALSE(check_U3(at, Z1, ds, sigma, mi, r, c2).find("U3_c6_upper")->pass);

  double l = 10;
  int m = 2;
  double cap4 = 1 / (c.big_L * std::pow(std::pow(l, m), r + 2 + c.eta));
  TrigSeries Z22{{{1, 1, 0, cap4, 0}}};  // max-norm |k| = 1
  CHECK(check_U4(Z22, l, m, r, c).pass());
  CHECK_FALSE(check_U4(Z22.scaled(2), l, m, r, c).pass());
}

TEST_CASE("second average") {
  Rat w(12, 17);
  TrigSeries mixed{{{1, 2, 0, 1, 0}}};
  CHECK(second_average(mixed, w).modes.empty());
  TrigSeries pure{{{3, 0, 0, 0.5, 0.2}}};
  CHECK(second_average(pure, w).modes.size() == 1);
  CHECK_THROWS_AS(second_average(pure, Rat(0)), Error);

  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> U(-1, 1);
  TrigSeries Z2;
  for (int i = 0; i < 25; ++i)
    Z2.modes.push_back({int(std::lround(4 * U(rng))), int(std::lround(4 * U(rng))), 0, U(rng), U(rng)});
  auto avg = second_average(Z2, w);
  double err = 0;
  for (int s = 0; s < 40; ++s) {
    double x1 = pi * U(rng), x2 = pi * U(rng);
    err = std::max(err, std::abs(avg.value(x1, x2) - second_average_quadrature(Z2, w, x1, x2)));
  }
  CHECK(err <= 1e-10);
}

TEST_CASE("bifurcation scan") {
  auto fam = [](double lam) {
    return Trig1{{{1, 1, 0}, {2, lam * std::cos(1.0), lam * std::sin(1.0)}}};
  };
  auto br = check_bifurcation(fam, 0, 2, 1000);
  CHECK(br.samples == 1001);
  CHECK(br.max_count <= 2);
  CHECK(br.report.pass());
  MESSAGE("branch switches for cos x + lam cos(2x-1): " << br.branch_switches);

  // cos 2x + lam cos x: the max jumps from pi to 0 through a double maximum at lam = 0
  auto jump = check_bifurcation([](double lam) { return Trig1{{{1, lam, 0}, {2, 1, 0}}}; }, -1, 1, 1000);
  CHECK(jump.branch_switches == 1);
  CHECK(jump.two_max_samples == 1);
  CHECK(jump.report.pass());

  auto still = check_bifurcation([](double) { return Trig1{{{1, 1, 0}}}; }, 0, 1, 100);
  CHECK(still.branch_switches == 0);
  CHECK(still.report.pass());

  auto stuck = check_bifurcation([](double) { return Trig1{{{2, 1, 0}}}; }, 0, 1, 100);
  CHECK(stuck.two_max_samples == 101);
  CHECK_FALSE(stuck.report.find("isolated_two_max_samples")->pass);

  auto three = check_bifurcation([](double) { return Trig1{{{3, 1, 0}}}; }, 0, 1, 10);
  CHECK(three.max_count == 3);
  CHECK_FALSE(three.report.find("at_most_two_maximizers")->pass);
}

TEST_CASE("one step normal form") {
  // shipped-style instance: w* = (41/100, 73/100), m = 2, sigma = 70, xi = 4.5
  std::mt19937_64 rng(4);
  auto f = random_admissible(rng, 30, 8, 8, 1.0);
  f.add({100, 0, -41}, f.decay_bound({100, 0, -41}), 0);
  NormalFormParams p;
  p.K = 1e11;
  p.sigma = 70;
  p.d_m = 5e-3;
  p.alpha = small_denominator_alpha(10, 2, 41, 1e-70, 1e-40, 4.5);
  auto nf = one_step_normal_form(f, Rat(41, 100), Rat(73, 100), p);
  CHECK(nf.t_star == 100);
  CHECK(nf.Z.coeffs.count({100, 0, -41}) == 1);
  for (const auto& [k, c] : nf.Z.coeffs) CHECK(is_resonant(k, nf.w1, nf.w2));
  for (const auto& [k, c] : nf.W.coeffs) CHECK_FALSE(is_resonant(k, nf.w1, nf.w2));
  CHECK(nf.log10_R1 < nf.log10_Z);
  CHECK(nf.log10_R2 < nf.log10_Z);
}
