#include "dlab/trig.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dlab {

double Trig1::value(double x) const {
  double s = 0;
  for (const auto& h : terms) s += h.a * std::cos(h.n * x) + h.b * std::sin(h.n * x);
  return s;
}

double Trig1::d1(double x) const {
  double s = 0;
  for (const auto& h : terms) s += h.n * (-h.a * std::sin(h.n * x) + h.b * std::cos(h.n * x));
  return s;
}

double Trig1::d2(double x) const {
  double s = 0;
  for (const auto& h : terms) s -= double(h.n) * h.n * (h.a * std::cos(h.n * x) + h.b * std::sin(h.n * x));
  return s;
}

double Trig1::d3(double x) const {
  double s = 0;
  for (const auto& h : terms) {
    double n3 = double(h.n) * h.n * h.n;
    s += n3 * (h.a * std::sin(h.n * x) - h.b * std::cos(h.n * x));
  }
  return s;
}

int Trig1::max_n() const {
  int m = 0;
  for (const auto& h : terms) m = std::max(m, std::abs(h.n));
  return m;
}

double Trig1::c2_proxy() const {
  double s = 0;
  for (const auto& h : terms)
    if (h.n != 0) s += double(h.n) * h.n * std::hypot(h.a, h.b);
  return s;
}

Trig1 Trig1::scaled(double s) const {
  Trig1 out = *this;
  for (auto& h : out.terms) {
    h.a *= s;
    h.b *= s;
  }
  return out;
}

ExtremaInfo find_extrema(const Trig1& f, int samples, double xtol, double value_tol) {
  ExtremaInfo info;
  const double two_pi = 2 * std::numbers::pi;
  const double h = two_pi / samples;
  double x0 = 0, g0 = f.d1(0);
  for (int i = 1; i <= samples; ++i) {
    double x1 = i * h, g1 = f.d1(x1);
    double root = -1;
    if (g0 == 0) {
      root = x0;
    } else if (g0 * g1 < 0) {
      double lo = x0, hi = x1, glo = g0;
      while (hi - lo > xtol) {
        double mid = 0.5 * (lo + hi), gm = f.d1(mid);
        if ((gm < 0) == (glo < 0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      root = 0.5 * (lo + hi);
    }
    if (root >= 0) {
      double x = std::fmod(root, two_pi);
      info.critical.push_back({x, f.value(x), f.d2(x)});
    }
    x0 = x1;
    g0 = g1;
  }
  // A flat polynomial has no isolated critical points; treat every sample as one.
  if (info.critical.empty()) {
    info.critical.push_back({0.0, f.value(0), f.d2(0)});
  }
  info.max_value = info.min_value = info.critical.front().value;
  for (const auto& c : info.critical) {
    info.max_value = std::max(info.max_value, c.value);
    info.min_value = std::min(info.min_value, c.value);
  }
  double scale = std::max(1.0, std::abs(info.max_value) + std::abs(info.min_value));
  for (const auto& c : info.critical) {
    if (c.value >= info.max_value - value_tol * scale) info.maximizers.push_back(c);
    if (c.value <= info.min_value + value_tol * scale) info.minimizers.push_back(c);
  }
  return info;
}

namespace {

inline double phase(const Mode& m, double x1, double x2, double s) {
  return m.k1 * x1 + m.k2 * x2 + 2 * std::numbers::pi * m.k3 * s;
}

}  // namespace

double TrigSeries::value(double x1, double x2, double s) const {
  double v = 0;
  for (const auto& m : modes) {
    double p = phase(m, x1, x2, s);
    v += m.a * std::cos(p) + m.b * std::sin(p);
  }
  return v;
}

std::array<double, 2> TrigSeries::grad(double x1, double x2, double s) const {
  std::array<double, 2> g{0, 0};
  for (const auto& m : modes) {
    double p = phase(m, x1, x2, s);
    double d = -m.a * std::sin(p) + m.b * std::cos(p);
    g[0] += m.k1 * d;
    g[1] += m.k2 * d;
  }
  return g;
}

std::array<double, 3> TrigSeries::hess(double x1, double x2, double s) const {
  std::array<double, 3> h{0, 0, 0};
  for (const auto& m : modes) {
    double p = phase(m, x1, x2, s);
    double d = -(m.a * std::cos(p) + m.b * std::sin(p));
    h[0] += double(m.k1) * m.k1 * d;
    h[1] += double(m.k1) * m.k2 * d;
    h[2] += double(m.k2) * m.k2 * d;
  }
  return h;
}

bool TrigSeries::autonomous() const {
  return std::all_of(modes.begin(), modes.end(), [](const Mode& m) { return m.k3 == 0; });
}

double TrigSeries::c2_proxy() const {
  double s = 0;
  for (const auto& m : modes) {
    int k = std::max({std::abs(m.k1), std::abs(m.k2), std::abs(m.k3)});
    s += double(k) * k * std::hypot(m.a, m.b);
  }
  return s;
}

TrigSeries TrigSeries::scaled(double s) const {
  TrigSeries out = *this;
  for (auto& m : out.modes) {
    m.a *= s;
    m.b *= s;
  }
  return out;
}

void TrigSeries::add(const TrigSeries& other, double s) {
  for (auto m : other.modes) {
    m.a *= s;
    m.b *= s;
    modes.push_back(m);
  }
}

TrigSeries lift_x1(const Trig1& f) {
  TrigSeries t;
  for (const auto& h : f.terms) t.modes.push_back({h.n, 0, 0, h.a, h.b});
  return t;
}

TrigSeries lift_x2(const Trig1& f) {
  TrigSeries t;
  for (const auto& h : f.terms) t.modes.push_back({0, h.n, 0, h.a, h.b});
  return t;
}

}  // namespace dlab
