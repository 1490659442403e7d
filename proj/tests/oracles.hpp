#pragma once

// Independent reference computations shared by the unit tests and the acceptance run.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <tuple>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "dlab/resonance.hpp"
#include "dlab/trig.hpp"

namespace dlab::oracle {

// plan search by brute force: box scan at each level, exact window test, backtracking
inline bool plan_level(const DiophantineVector& v, long l, int m, const Rat& prev1, const Rat& prev2, int m_max,
                       std::vector<std::pair<Int, Int>>& seq) {
  if (m > m_max) return true;
  Int L = ipow(Int(l), m);
  double w1 = to_double(v.w1), w2 = to_double(v.w2);
  long span = 6;
  long ca = long(std::llround(w1 * double(L))), cb = long(std::llround(w2 * double(L)));
  struct C {
    Rat d2;
    Int a, b;
    Rat o1, o2;
  };
  std::vector<C> all;
  for (long i = ca - span; i <= ca + span; ++i)
    for (long j = cb - span; j <= cb + span; ++j) {
      Rat x(Int(i), L), y(Int(j), L);
      Rat o1 = x > v.w1 ? Rat(x - v.w1) : Rat(v.w1 - x);
      Rat o2 = y > v.w2 ? Rat(y - v.w2) : Rat(v.w2 - y);
      Rat d2 = o1 * o1 + o2 * o2;
      Rat lo = Rat(2) / Rat(ipow(Int(l), 2 * m + 2)), hi = Rat(2) / Rat(ipow(Int(l), 2 * m));
      if (d2 < lo || d2 > hi) continue;
      if (m > 1 && (o1 >= prev1 || o2 >= prev2)) continue;
      all.push_back({d2, Int(i), Int(j), o1, o2});
    }
  std::sort(all.begin(), all.end(),
            [](const C& p, const C& q) { return std::tie(p.d2, p.a, p.b) < std::tie(q.d2, q.a, q.b); });
  for (const auto& c : all) {
    seq.emplace_back(c.a, c.b);
    if (plan_level(v, l, m + 1, c.o1, c.o2, m_max, seq)) return true;
    seq.pop_back();
  }
  return false;
}

inline std::vector<std::pair<Int, Int>> plan(const DiophantineVector& v, long l, int m_max) {
  std::vector<std::pair<Int, Int>> seq;
  if (!plan_level(v, l, 1, 0, 0, m_max, seq)) seq.clear();
  return seq;
}

// rotational branch of the pendulum: c = (1/2pi) int sqrt(2 (E + lambda (1 - cos x))) dx
inline double pendulum_c_of_E(double E, double lambda) {
  constexpr double pi = std::numbers::pi;
  auto f = [&](double x) { return std::sqrt(2 * (E + lambda * (1 - std::cos(x)))); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0, 2 * pi, 15, 1e-14) / (2 * pi);
}

inline double pendulum_alpha(double c, double lambda) {
  double c0 = 4 * std::sqrt(lambda) / std::numbers::pi;
  if (std::abs(c) <= c0) return 0;
  auto g = [&](double E) { return pendulum_c_of_E(E, lambda) - std::abs(c); };
  std::uintmax_t it = 200;
  auto r = boost::math::tools::toms748_solve(g, 0.0, c * c, boost::math::tools::eps_tolerance<double>(50), it);
  return 0.5 * (r.first + r.second);
}

// exact rotation period of Y^2/2 + c (cos X - 1) = E
inline double pendulum_period(double c, double E) {
  double k = std::sqrt(4 * c / (2 * E + 4 * c));
  return 4 / std::sqrt(2 * E + 4 * c) * std::comp_ellint_1(k);
}

// sin X1 sin X2 (1 - cos X2): even, quartic at the origin, not invariant on {X1 = 0}
inline TrigSeries shaped_z3() {
  TrigSeries z;
  z.modes = {{1, -1, 0, 0.5, 0}, {1, 1, 0, -0.5, 0}, {1, -2, 0, -0.25, 0}, {1, 2, 0, 0.25, 0}};
  return z;
}

}  // namespace dlab::oracle
