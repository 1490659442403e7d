#pragma once

#include <array>
#include <vector>

namespace dlab {

// a*cos(n x) + b*sin(n x)
struct Harmonic {
  int n = 0;
  double a = 0;
  double b = 0;
};

// Trigonometric polynomial in one angle.
struct Trig1 {
  std::vector<Harmonic> terms;

  double value(double x) const;
  double d1(double x) const;
  double d2(double x) const;
  double d3(double x) const;
  int max_n() const;
  double c2_proxy() const;  // sum n^2 * hypot(a, b), constant term excluded
  Trig1 scaled(double s) const;
};

struct CriticalPoint {
  double x = 0;
  double value = 0;
  double curvature = 0;  // second derivative
};

struct ExtremaInfo {
  std::vector<CriticalPoint> critical;
  std::vector<CriticalPoint> maximizers;  // global ones, within value_tol
  std::vector<CriticalPoint> minimizers;
  double max_value = 0;
  double min_value = 0;
};

// Dense scan of f' on [0, 2pi) with `samples` points, bisection polish to
// `xtol`. Global extrema are collected within value_tol of the best value.
ExtremaInfo find_extrema(const Trig1& f, int samples = 10000, double xtol = 1e-12,
                         double value_tol = 1e-9);

// a*cos(k1 x1 + k2 x2 + 2 pi k3 s) + b*sin(...)
struct Mode {
  int k1 = 0, k2 = 0, k3 = 0;
  double a = 0, b = 0;
};

struct TrigSeries {
  std::vector<Mode> modes;

  double value(double x1, double x2, double s = 0) const;
  std::array<double, 2> grad(double x1, double x2, double s = 0) const;
  std::array<double, 3> hess(double x1, double x2, double s = 0) const;  // xx, xy, yy
  bool autonomous() const;
  double c2_proxy() const;
  TrigSeries scaled(double s) const;
  void add(const TrigSeries& other, double s = 1.0);
};

TrigSeries lift_x1(const Trig1& f);
TrigSeries lift_x2(const Trig1& f);

}  // namespace dlab
