#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include "dlab/action.hpp"

using namespace dlab;

namespace {

using Big = boost::multiprecision::cpp_dec_float_50;

Big big_coth(Big x) { return cosh(x) / sinh(x); }

// random corner passage: in along the X1 axis, out along the X2 axis
CornerActionInput corner_sample(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> L(0.1, 5), T(0.01, 20), R(1e-3, 1), S(0, 1);
  CornerActionInput in;
  in.lambda1 = L(rng);
  in.lambda2 = L(rng);
  in.T = T(rng);
  in.X1pt = {(S(rng) < 0.5 ? -1 : 1) * R(rng), 0};
  in.X2pt = {0, (S(rng) < 0.5 ? -1 : 1) * R(rng)};
  return in;
}

}  // namespace

TEST_CASE("worked corner example") {
  CornerActionInput in{2, 1, {0.1, 0}, {0, 0.1}, 1};
  Big ref = Big("0.005") * big_coth(Big(2)) + Big("0.005") * big_coth(Big(1));
  CHECK(std::abs(through_action(in) - ref.convert_to<double>()) <= 1e-16);
  CHECK(std::abs(through_action(in) - 0.01175175) <= 5e-9);
  CHECK(through_action_displayed(in) == doctest::Approx(through_action(in)).epsilon(1e-14));
  CHECK(broken_action(in) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(std::abs(through_action_quadrature(in) - through_action(in)) <= 1e-12);
  CHECK(std::abs(broken_action_quadrature(in) - 0.01) <= 1e-12);
  CHECK(through_boundary_error(in) <= 1e-15);

  // long transit: coth -> 1 from above
  in.T = 30;
  CHECK(through_minus_broken(in) > 0);
  CHECK(through_minus_broken(in) < 1e-20);
  CHECK(through_action(in) >= broken_action(in));
  // quadratic homogeneity
  CornerActionInput d{2, 1, {0.2, 0}, {0, 0.2}, 1};
  in.T = 1;
  CHECK(through_action(d) == doctest::Approx(4 * through_action(in)).epsilon(1e-14));
  in.T = 0;
  CHECK_THROWS_AS(through_action(in), Error);
  CHECK_THROWS_AS(broken_action(CornerActionInput{1, 1, {0, 0}, {0, 1}, 1}), Error);
}

TEST_CASE("action sweep") {
  std::mt19937_64 rng(7);
  int violations = 0;
  double worst_t = 0, worst_b = 0, worst_disp = 0;
  for (int k = 0; k < 1000; ++k) {
    auto in = corner_sample(rng);
    double t = through_action(in), b = broken_action(in);
    if (!(through_minus_broken(in) > 0) || t < b) ++violations;
    worst_disp = std::max(worst_disp, std::abs(through_minus_broken(in) - (t - b)));
    worst_t = std::max(worst_t, std::abs(t - through_action_quadrature(in)));
    worst_b = std::max(worst_b, std::abs(b - broken_action_quadrature(in)));
    worst_disp = std::max(worst_disp, std::abs(t - through_action_displayed(in)));
  }
  CHECK(violations == 0);
  CHECK(worst_t <= 1e-9);
  CHECK(worst_b <= 1e-9);
  CHECK(worst_disp <= 1e-14);

  // general boundary points: the exact formula still matches quadrature, but the displayed
  // one does not, and the through passage can be cheaper than the broken one
  std::uniform_real_distribution<double> U(-1, 1);
  double worst_g = 0;
  int cheaper = 0;
  for (int k = 0; k < 1000; ++k) {
    auto in = corner_sample(rng);
    in.X1pt = {U(rng), U(rng)};
    in.X2pt = {U(rng), U(rng)};
    worst_g = std::max(worst_g, std::abs(through_action(in) - through_action_quadrature(in)));
    if (through_minus_broken(in) < 0) ++cheaper;
  }
  CHECK(worst_g <= 1e-9);
  CHECK(cheaper > 0);
}

TEST_CASE("homology decomposition") {
  auto d = decompose_homology({3, 2});
  REQUIRE(d.size() == 3);
  CHECK(d[0] == HClass{1, 1});
  CHECK(d[1] == HClass{1, 1});
  CHECK(d[2] == HClass{1, 0});
  CHECK(decompose_homology({1, 0}) == std::vector<HClass>{{1, 0}});
  CHECK(decompose_homology({-2, -2}) == std::vector<HClass>{{-1, -1}, {-1, -1}});
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> U(-20, 20);
  for (int k = 0; k < 500; ++k) {
    HClass n{U(rng), U(rng)};
    if (n[0] == 0 && n[1] == 0) continue;
    auto parts = decompose_homology(n);
    HClass s{0, 0};
    for (const auto& p : parts) {
      CHECK(admissible_class(p));
      s[0] += p[0];
      s[1] += p[1];
    }
    CHECK(s == n);
    CHECK(int(parts.size()) == std::max(std::abs(n[0]), std::abs(n[1])));
  }
  CHECK_THROWS_AS(decompose_homology({0, 0}), Error);
}

TEST_CASE("flat polygons") {
  double c1 = 8 / std::numbers::pi, c2 = 4 / std::numbers::pi;
  std::vector<FlatEdge> axis{{{1, 0}, c1}, {{-1, 0}, c1}, {{0, 1}, c2}, {{0, -1}, c2}};
  auto rect = flat_polygon(axis);
  CHECK(rect.kind == "rectangle");
  CHECK(rect.report.pass());
  for (const auto& v : rect.vertices) {
    CHECK(std::abs(std::abs(v[0]) - c1) < 1e-12);
    CHECK(std::abs(std::abs(v[1]) - c2) < 1e-12);
  }
  // diagonal classes through the corners are inactive: degenerate octagon
  auto dom = axis;
  double corner = (c1 + c2) / std::sqrt(2.0);
  for (HClass g : {HClass{1, 1}, HClass{-1, -1}, HClass{1, -1}, HClass{-1, 1}}) dom.push_back({g, corner});
  CHECK(flat_polygon(dom).kind == "rectangle");
  // shorter diagonal edges cut the corners
  auto oct = axis;
  for (HClass g : {HClass{1, 1}, HClass{-1, -1}, HClass{1, -1}, HClass{-1, 1}}) oct.push_back({g, 0.9 * corner});
  auto o = flat_polygon(oct);
  CHECK(o.kind == "octagon");
  CHECK(o.report.pass());
  auto hex = axis;
  hex.push_back({{1, 1}, 0.9 * corner});
  hex.push_back({{-1, -1}, 0.9 * corner});
  CHECK(flat_polygon(hex).kind == "hexagon");
  CHECK(o.csv().rfind("x,y\n", 0) == 0);

  // random symmetric inputs: always 4, 6 or 8 vertices
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.2, 2);
  const HClass dirs[4] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
  for (int k = 0; k < 1000; ++k) {
    std::vector<FlatEdge> e;
    int used = 0;
    for (const auto& g : dirs)
      if (std::uniform_int_distribution<int>(0, 3)(rng) > 0) {
        double c = U(rng);
        e.push_back({g, c});
        e.push_back({{-g[0], -g[1]}, c});
        ++used;
      }
    if (used < 2) continue;
    auto p = flat_polygon(e);
    int m = int(p.vertices.size());
    CHECK((m == 4 || m == 6 || m == 8));
    CHECK(p.report.pass());
  }

  CHECK_THROWS_AS(flat_polygon({{{1, 0}, 1}, {{-1, 0}, 2}, {{0, 1}, 1}, {{0, -1}, 1}}), Error);
  CHECK_THROWS_AS(flat_polygon({{{2, 1}, 1}, {{-2, -1}, 1}}), Error);
  CHECK_THROWS_AS(flat_polygon({{{1, 0}, 1}, {{-1, 0}, 1}}), Error);
}

TEST_CASE("separatrix c-value") {
  CHECK(separatrix_c_value(Trig1{{{0, -1, 0}, {1, 1, 0}}}) == doctest::Approx(4 / std::numbers::pi).epsilon(1e-13));
  for (double l : {0.5, 4.0})
    CHECK(separatrix_c_value(Trig1{{{0, -l, 0}, {1, l, 0}}}) ==
          doctest::Approx(std::sqrt(l) * 4 / std::numbers::pi).epsilon(1e-13));
  CHECK(separatrix_c_value(Trig1{}) == 0);
  CHECK_THROWS_AS(separatrix_c_value(Trig1{{{1, 1, 0}}}), Error);
}
