#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <sstream>

#include "dlab/weakkam.hpp"

namespace dlab {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

double alpha_at(const TonelliLagrangian& L, Vec2 c, const LaxOleinikParams& p, GridFunction* warm) {
  auto r = weak_kam_solve(L, c, p, warm, false);
  if (warm) *warm = r.u_minus;
  return r.alpha;
}

AlphaScan alpha_scan(const TonelliLagrangian& L, const std::vector<double>& c1, const std::vector<double>& c2,
                     double tol_flat, const LaxOleinikParams& p) {
  if (c1.size() < 3) throw Error(Module::weakkam, "alpha scan needs at least three classes per axis");
  AlphaScan s;
  s.c1 = c1;
  s.c2 = L.dim == 1 ? std::vector<double>{0.0} : c2;
  if (L.dim == 2 && s.c2.size() < 3) throw Error(Module::weakkam, "alpha scan needs at least three classes per axis");
  s.tol_flat = tol_flat;
  int n1 = int(s.c1.size()), n2 = int(s.c2.size());
  double d1 = (s.c1.back() - s.c1.front()) / (n1 - 1), d2 = n2 > 1 ? (s.c2.back() - s.c2.front()) / (n2 - 1) : 0;
  s.alpha = GridFunction(L.dim == 1 ? std::vector<int>{n1} : std::vector<int>{n1, n2},
                         L.dim == 1 ? std::vector<double>{d1} : std::vector<double>{d1, d2});
  s.alpha.origin = L.dim == 1 ? std::vector<double>{s.c1[0]} : std::vector<double>{s.c1[0], s.c2[0]};

  // boustrophedon order so each solve starts from its neighbour's solution
  GridFunction warm;
  for (int i = 0; i < n1; ++i)
    for (int jj = 0; jj < n2; ++jj) {
      int j = i % 2 ? n2 - 1 - jj : jj;
      s.alpha.values[size_t(i) * n2 + j] = alpha_at(L, {s.c1[i], s.c2[j]}, p, &warm);
    }
  auto A = [&](int i, int j) { return s.alpha.values[size_t(i) * n2 + j]; };

  // midpoint inequality on every equally spaced triple along rows, columns and diagonals
  double range = s.alpha.max() - s.alpha.min();
  double tol_conv = 1e-9 + 1e-4 * range;
  const int dirs[4][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
  for (const auto& d : dirs) {
    if (n2 == 1 && d[1] != 0) continue;
    for (int i = 0; i < n1; ++i)
      for (int j = 0; j < n2; ++j) {
        int ia = i - d[0], ja = j - d[1], ib = i + d[0], jb = j + d[1];
        if (ia < 0 || ib < 0 || ia >= n1 || ib >= n1 || ja < 0 || jb < 0 || ja >= n2 || jb >= n2) continue;
        double defect = A(i, j) - 0.5 * (A(ia, ja) + A(ib, jb));
        s.worst_convexity = std::max(s.worst_convexity, defect);
        if (defect > tol_conv) ++s.convexity_violations;
      }
  }

  // connected flat around the minimum
  size_t kmin = size_t(std::min_element(s.alpha.values.begin(), s.alpha.values.end()) - s.alpha.values.begin());
  s.alpha_min = s.alpha.values[kmin];
  s.argmin = {s.c1[kmin / n2], s.c2[kmin % n2]};
  s.flat = s.alpha;
  for (auto& v : s.flat.values) v = 0;
  std::queue<size_t> todo;
  todo.push(kmin);
  s.flat.values[kmin] = 1;
  while (!todo.empty()) {
    size_t k = todo.front();
    todo.pop();
    int i = int(k / n2), j = int(k % n2);
    const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (const auto& d : nb) {
      int a = i + d[0], b = j + d[1];
      if (a < 0 || b < 0 || a >= n1 || b >= n2) continue;
      size_t q = size_t(a) * n2 + b;
      if (s.flat.values[q] == 0 && A(a, b) <= s.alpha_min + tol_flat) {
        s.flat.values[q] = 1;
        todo.push(q);
      }
    }
  }
  bool touches = false;
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j)
      if (s.flat.values[size_t(i) * n2 + j] > 0 && (i == 0 || i == n1 - 1 || (n2 > 1 && (j == 0 || j == n2 - 1))))
        touches = true;

  s.report.title = "alpha scan";
  s.report.le("convexity", double(s.convexity_violations), 0,
              "midpoint violations beyond tolerance; nonzero means the grid is too coarse");
  s.report.flag("flat_inside_scan", !touches, 0, "the flat must not reach the scan boundary");

  if (L.dim == 1) {
    double lo = 1e300, hi = -1e300;
    for (int i = 0; i < n1; ++i)
      if (s.flat.values[size_t(i)] > 0) {
        lo = std::min(lo, s.c1[i]);
        hi = std::max(hi, s.c1[i]);
      }
    s.flat_lo = lo - d1 / 2;
    s.flat_hi = hi + d1 / 2;
    s.symmetry_defect = std::abs(s.flat_lo + s.flat_hi);
    return s;
  }

  // support values of the flat in the eight admissible directions; the boundary lies half
  // a cell beyond the outermost flat classes
  const HClass gs[8] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
  double sup[8];
  for (int e = 0; e < 8; ++e) {
    double gn = std::hypot(double(gs[e][0]), double(gs[e][1]));
    Vec2 gh{gs[e][0] / gn, gs[e][1] / gn};
    double best = -1e300;
    for (int i = 0; i < n1; ++i)
      for (int j = 0; j < n2; ++j)
        if (s.flat.values[size_t(i) * n2 + j] > 0) best = std::max(best, gh[0] * s.c1[i] + gh[1] * s.c2[j]);
    sup[e] = best + 0.5 * (std::abs(gh[0]) * d1 + std::abs(gh[1]) * d2);
  }
  double cell = std::hypot(d1, d2);
  for (int e = 0; e < 8; e += 2) {
    s.symmetry_defect = std::max(s.symmetry_defect, std::abs(sup[e] - sup[e + 1]));
    double c = 0.5 * (sup[e] + sup[e + 1]);
    s.edges.push_back({gs[e], c});
    s.edges.push_back({gs[e + 1], c});
  }
  double scale = 0;
  for (const auto& e : s.edges) scale = std::max(scale, e.c_g);
  if (!(scale > 0)) throw Error(Module::weakkam, "flat has no interior on the scan grid");
  // corners cut by less than a cell are grid artefacts
  try {
    s.polygon = flat_polygon(s.edges, cell / scale);
    s.report.flag("flat_polygon", true, double(s.polygon.vertices.size()), s.polygon.kind);
  } catch (const Error& e) {
    s.polygon = {};
    s.polygon.kind = "invalid";
    s.report.flag("flat_polygon", false, 0, e.what());
  }
  s.report.le("flat_symmetry", s.symmetry_defect, cell, "central symmetry up to one cell");
  return s;
}

RayRoot ray_level(const TonelliLagrangian& L, Vec2 center, Vec2 dir, double base, double level, double s_hi,
                  const LaxOleinikParams& p, double rel_tol, double s_tol, double s_lo) {
  RayRoot r;
  GridFunction warm;
  auto f = [&](double s) {
    ++r.solves;
    return alpha_at(L, {center[0] + s * dir[0], center[1] + s * dir[1]}, p, &warm) - base - level;
  };
  double lo = 0, hi = s_hi;
  double flo = -level;  // alpha(center) = base
  double fhi = f(hi);
  if (!(fhi > 0)) return r;
  if (s_lo > 0 && s_lo < s_hi) {
    double fs = f(s_lo);
    if (fs <= 0) {
      lo = s_lo;
      flo = fs;
    }
  }
  int side = 0;
  bool on_flat = flo <= -level * (1 - 1e-6);  // alpha is constant on the flat: bisect until lo leaves it
  for (int it = 0; it < 60; ++it) {
    double s = on_flat ? 0.5 * (lo + hi) : (lo * fhi - hi * flo) / (fhi - flo);
    double fs = f(s);
    if (std::abs(fs) <= rel_tol * level || hi - lo <= s_tol) {
      r.ok = true;
      r.s = s;
      r.value = fs + level;
      return r;
    }
    if (fs > 0) {
      hi = s;
      fhi = fs;
      if (side == 1) flo /= 2;
      side = 1;
    } else {
      if (fs > -level * (1 - 1e-6)) on_flat = false;
      lo = s;
      flo = fs;
      if (side == -1 && !on_flat) fhi /= 2;
      side = -1;
    }
  }
  return r;
}

std::vector<double> annulus_rays(int uniform, const FlatPolygon& flat) {
  std::vector<double> th;
  for (int k = 0; k < uniform; ++k) th.push_back(2 * kPi * k / uniform);
  Vec2 g = flat.centroid();
  for (const auto& v : flat.vertices) {
    double a = std::atan2(v[1] - g[1], v[0] - g[0]);
    th.push_back(a < 0 ? a + 2 * kPi : a);
  }
  return th;
}

std::string AnnulusReport::csv() const {
  std::ostringstream os;
  os.precision(10);
  os << "Delta,theta,c1,c2,coverage,threshold,ok\n";
  for (const auto& s : samples)
    os << s.Delta << ',' << s.theta << ',' << s.c[0] << ',' << s.c[1] << ',' << s.coverage << ',' << s.threshold << ','
       << (s.ok ? 1 : 0) << '\n';
  return os.str();
}

AnnulusReport annulus_diagnostic(const TonelliLagrangian& L, Vec2 center, double alpha_min,
                                 const std::vector<double>& Delta_list, const std::vector<double>& thetas, double eps,
                                 double d, double s_hi, const LaxOleinikParams& p) {
  if (L.dim != 2) throw Error(Module::weakkam, "annulus diagnostic needs a two-dimensional Lagrangian");
  if (thetas.empty()) throw Error(Module::weakkam, "annulus diagnostic needs at least one ray");
  AnnulusReport out;
  out.wedge_reach = 3 * std::pow(eps, d);
  std::vector<double> levels = Delta_list;
  std::sort(levels.begin(), levels.end());
  bool all_below = true;
  std::vector<double> prev(thetas.size(), 0.0);  // alpha grows along each ray, so the last root bounds the next
  for (double D : levels) {
    bool level_ok = true;
    int found = 0;
    for (std::size_t i = 0; i < thetas.size(); ++i) {
      double theta = thetas[i];
      AnnulusSample a;
      a.Delta = D;
      a.theta = theta;
      Vec2 dir{std::cos(a.theta), std::sin(a.theta)};
      auto root = ray_level(L, center, dir, alpha_min, D, s_hi, p, 0.05, 1e-4, prev[i]);
      if (!root.ok) {
        ++out.excluded;
        out.samples.push_back(a);
        continue;
      }
      a.ok = true;
      prev[i] = root.s;
      ++found;
      a.c = {center[0] + root.s * dir[0], center[1] + root.s * dir[1]};
      auto r = weak_kam_solve(L, a.c, p);
      auto m = mane_set_estimate(r);
      a.coverage = m.coverage;
      a.threshold = m.threshold;
      if (!(a.coverage < 1)) level_ok = false;
      out.samples.push_back(a);
    }
    if (found == 0) level_ok = false;
    if (level_ok && all_below) out.verified_Delta0 = D;
    else all_below = false;
  }
  out.report.title = "annulus diagnostic";
  out.report.le("excluded_rays", double(out.excluded), 0, "rays where the level was not bracketed");
  out.report.le("wedge_reach", out.wedge_reach, out.verified_Delta0, "3 eps^d <= verified Delta0");
  return out;
}

}  // namespace dlab
