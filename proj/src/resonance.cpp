#include "dlab/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <sstream>

#include <boost/multiprecision/cpp_dec_float.hpp>

namespace dlab {

namespace {

Int iabs(const Int& x) { return x < 0 ? Int(-x) : x; }

Int floor_rat(const Rat& r) {
  Int q = numerator(r) / denominator(r);  // truncates toward zero
  if (r < 0 && Rat(q) != r) q -= 1;
  return q;
}

Rat rabs(const Rat& r) { return r < 0 ? Rat(-r) : r; }

// returns g and fills s,t with s*x + t*y = g >= 0
Int ext_gcd(const Int& x, const Int& y, Int& s, Int& t) {
  Int r0 = x, r1 = y, s0 = 1, s1 = 0, t0 = 0, t1 = 1;
  while (r1 != 0) {
    Int q = r0 / r1;
    Int tmp = r0 - q * r1;
    r0 = r1;
    r1 = tmp;
    tmp = s0 - q * s1;
    s0 = s1;
    s1 = tmp;
    tmp = t0 - q * t1;
    t0 = t1;
    t1 = tmp;
  }
  if (r0 < 0) {
    r0 = -r0;
    s0 = -s0;
    t0 = -t0;
  }
  s = s0;
  t = t0;
  return r0;
}

std::string vec_str(const IVec3& v) {
  std::ostringstream os;
  os << '(' << v[0] << ' ' << v[1] << ' ' << v[2] << ')';
  return os.str();
}

}  // namespace

DiophantineVector make_diophantine(const std::string& w1, const std::string& w2, double tau, double c0) {
  if (tau < 0) throw Error(Module::resonance, "Diophantine exponent tau must be >= 0");
  if (!(c0 > 0)) throw Error(Module::resonance, "Diophantine constant C0 must be > 0");
  DiophantineVector v{parse_real_expr(w1), parse_real_expr(w2), tau, c0};
  for (const Rat* w : {&v.w1, &v.w2})
    if (*w < 0 || *w > 1) throw Error(Module::resonance, "frequency components must lie in [0,1]");
  return v;
}

DiophantineReport diophantine_check(const DiophantineVector& v, int k_max) {
  if (v.tau < 0) throw Error(Module::resonance, "Diophantine exponent tau must be >= 0");
  if (!(v.c0 > 0)) throw Error(Module::resonance, "Diophantine constant C0 must be > 0");
  if (k_max < 1) throw Error(Module::resonance, "k_max must be >= 1");
  const long double w1 = v.w1.convert_to<long double>();
  const long double w2 = v.w2.convert_to<long double>();
  DiophantineReport rep;
  rep.min_margin = INFINITY;
  for (long n = 1; n <= k_max; ++n) {
    const long double weight = std::pow((long double)n, (long double)(1.0 + v.tau)) / v.c0;
    auto visit = [&](long k1, long k2) {
      long double x = k1 * w1 + k2 * w2;
      long double d = std::fabs(x - std::nearbyint(x));
      double margin = double(d * weight);
      if (margin < rep.min_margin) {
        rep.min_margin = margin;
        rep.worst_k = {k1, k2};
      }
    };
    visit(0, n);
    for (long k1 = 1; k1 < n; ++k1) {
      visit(k1, n);
      visit(k1, -n);
    }
    for (long k2 = n; k2 >= -n; --k2) visit(n, k2);
  }
  rep.pass = rep.min_margin >= 1.0;
  return rep;
}

Int ResonantPlan::scale(int m) const { return ipow(Int(l), unsigned(m)); }

std::array<Rat, 2> ResonantPlan::point(int m) const {
  Int s = scale(m);
  return {Rat(a[m - 1], s), Rat(b[m - 1], s)};
}

std::array<Rat, 2> ResonantPlan::half_point(int m) const {
  return {Rat(a[m - 1], scale(m)), Rat(b[m], scale(m + 1))};
}

Rat ResonantPlan::dist2(int m) const {
  auto p = point(m);
  return (p[0] - w1) * (p[0] - w1) + (p[1] - w2) * (p[1] - w2);
}

Rat ResonantPlan::half_dist2(int m) const {
  auto p = half_point(m);
  return (p[0] - w1) * (p[0] - w1) + (p[1] - w2) * (p[1] - w2);
}

double ResonantPlan::dist(int m) const { return std::sqrt(to_double(dist2(m))); }
double ResonantPlan::half_dist(int m) const { return std::sqrt(to_double(half_dist2(m))); }

ResonantPlan build_plan(const DiophantineVector& v, long l, int m_max) {
  if (l < 2) throw Error(Module::resonance, "subdivision base l must be >= 2");
  if (m_max < 1) throw Error(Module::resonance, "m_max must be >= 1");
  ResonantPlan plan;
  plan.l = l;
  plan.w1 = v.w1;
  plan.w2 = v.w2;

  struct Cand {
    Int a, b;
    Rat d2, off1, off2;
  };
  // Depth-first search: at every level the admissible grid points are tried in
  // order of (distance, a, b); we backtrack only if a later level has no point.
  std::function<bool(int, const Rat&, const Rat&)> dfs = [&](int m, const Rat& prev1, const Rat& prev2) {
    if (m > m_max) return true;
    Int L = ipow(Int(l), unsigned(m));
    Rat lo = Rat(2) / Rat(ipow(Int(l), unsigned(2 * m + 2)));
    Rat hi = Rat(2) / Rat(ipow(Int(l), unsigned(2 * m)));
    Int a0 = floor_rat(v.w1 * L), b0 = floor_rat(v.w2 * L);
    std::vector<Cand> cands;
    for (Int a = a0 - 2; a <= a0 + 3; ++a)
      for (Int b = b0 - 2; b <= b0 + 3; ++b) {
        Rat o1 = rabs(Rat(a, L) - v.w1), o2 = rabs(Rat(b, L) - v.w2);
        Rat d2 = o1 * o1 + o2 * o2;
        if (d2 < lo || d2 > hi) continue;
        if (m > 1 && !(o1 < prev1 && o2 < prev2)) continue;
        cands.push_back({a, b, d2, o1, o2});
      }
    std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
      if (x.d2 != y.d2) return x.d2 < y.d2;
      if (x.a != y.a) return x.a < y.a;
      return x.b < y.b;
    });
    for (const auto& c : cands) {
      plan.a.push_back(c.a);
      plan.b.push_back(c.b);
      if (dfs(m + 1, c.off1, c.off2)) return true;
      plan.a.pop_back();
      plan.b.pop_back();
    }
    return false;
  };
  if (!dfs(1, Rat(0), Rat(0)))
    throw Error(Module::resonance, "no admissible lattice point sequence up to level " + std::to_string(m_max));
  return plan;
}

Lattice lattice_for(const ResonantPlan& plan, PlanIndex which) {
  int m = which.m;
  if (m < 1 || m > plan.levels() || (which.half && m >= plan.levels()))
    throw Error(Module::resonance, "plan index out of range");
  Int L = plan.scale(m);
  Lattice out;
  out.basis.push_back({L, Int(0), Int(-plan.a[m - 1])});
  if (which.half)
    out.basis.push_back({Int(0), plan.scale(m + 1), Int(-plan.b[m])});
  else
    out.basis.push_back({Int(0), L, Int(-plan.b[m - 1])});
  return out;
}

Int gcd3(const IVec3& v) {
  Int g = 0;
  for (const auto& x : v) g = gcd(g, iabs(x));
  return g;
}

IVec3 primitive(const IVec3& v) {
  Int g = gcd3(v);
  if (g == 0) return v;
  return {v[0] / g, v[1] / g, v[2] / g};
}

Lattice maximal_reduce(const Lattice& L) {
  Lattice out;
  out.is_maximal = true;
  for (const auto& v : L.basis) {
    Int g = gcd3(v);
    if (g == 0) throw Error(Module::resonance, "zero vector in lattice basis");
    out.basis.push_back({v[0] / g, v[1] / g, v[2] / g});
    out.multipliers.push_back(g);
  }
  return out;
}

Int dot(const IVec3& u, const IVec3& v) { return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]; }

IVec3 cross(const IVec3& u, const IVec3& v) {
  return {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
}

int rational_rank(const std::vector<IVec3>& vs) {
  std::vector<std::array<Rat, 3>> m;
  for (const auto& v : vs) m.push_back({Rat(v[0]), Rat(v[1]), Rat(v[2])});
  int rank = 0;
  for (int col = 0; col < 3 && rank < int(m.size()); ++col) {
    int piv = -1;
    for (int r = rank; r < int(m.size()); ++r)
      if (m[r][col] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) continue;
    std::swap(m[piv], m[rank]);
    for (int r = 0; r < int(m.size()); ++r) {
      if (r == rank || m[r][col] == 0) continue;
      Rat f = m[r][col] / m[rank][col];
      for (int c = 0; c < 3; ++c) m[r][c] -= f * m[rank][c];
    }
    ++rank;
  }
  return rank;
}

std::vector<std::vector<Int>> integer_kernel(const std::vector<std::vector<Int>>& rows, size_t n) {
  std::vector<std::vector<Int>> M = rows;
  std::vector<std::vector<Int>> U(n, std::vector<Int>(n, 0));  // columns of U stored as U[row][col]
  for (size_t i = 0; i < n; ++i) U[i][i] = 1;
  auto col_op = [&](auto& mat, size_t p, size_t j, const Int& s, const Int& t, const Int& u, const Int& w) {
    // (col_p, col_j) <- (s col_p + t col_j, u col_p + w col_j)
    for (auto& row : mat) {
      Int cp = row[p], cj = row[j];
      row[p] = s * cp + t * cj;
      row[j] = u * cp + w * cj;
    }
  };
  size_t p = 0;
  for (size_t i = 0; i < M.size() && p < n; ++i) {
    for (size_t j = p + 1; j < n; ++j) {
      Int x = M[i][p], y = M[i][j];
      if (y == 0) continue;
      Int s, t;
      Int g = ext_gcd(x, y, s, t);
      Int u = -y / g, w = x / g;
      col_op(M, p, j, s, t, u, w);
      col_op(U, p, j, s, t, u, w);
    }
    if (M[i][p] != 0) ++p;
  }
  std::vector<std::vector<Int>> ker;
  for (size_t c = p; c < n; ++c) {
    std::vector<Int> v(n);
    for (size_t r = 0; r < n; ++r) v[r] = U[r][c];
    ker.push_back(v);
  }
  return ker;
}

Lattice intersect(const Lattice& A, const Lattice& B) {
  size_t na = A.basis.size(), nb = B.basis.size();
  std::vector<std::vector<Int>> rows(3, std::vector<Int>(na + nb));
  for (int c = 0; c < 3; ++c) {
    for (size_t i = 0; i < na; ++i) rows[c][i] = A.basis[i][c];
    for (size_t j = 0; j < nb; ++j) rows[c][na + j] = -B.basis[j][c];
  }
  Lattice out;
  for (const auto& k : integer_kernel(rows, na + nb)) {
    IVec3 v{0, 0, 0};
    for (size_t i = 0; i < na; ++i)
      for (int c = 0; c < 3; ++c) v[c] += k[i] * A.basis[i][c];
    out.basis.push_back(v);
  }
  return out;
}

Lattice resonance_lattice(const Rat& w1, const Rat& w2) {
  Int N = lcm(denominator(w1), denominator(w2));
  std::vector<std::vector<Int>> rows{{Int(w1 * N), Int(w2 * N), N}};
  Lattice out;
  out.is_maximal = true;
  for (const auto& k : integer_kernel(rows, 3)) out.basis.push_back({k[0], k[1], k[2]});
  return out;
}

bool in_lattice(const Lattice& L, const IVec3& k) {
  size_t nb = L.basis.size();
  // augmented system 3 x (nb + 1)
  std::vector<std::vector<Rat>> m(3, std::vector<Rat>(nb + 1));
  for (int r = 0; r < 3; ++r) {
    for (size_t c = 0; c < nb; ++c) m[r][c] = Rat(L.basis[c][r]);
    m[r][nb] = Rat(k[r]);
  }
  std::vector<int> pivcol;
  size_t row = 0;
  for (size_t c = 0; c < nb && row < 3; ++c) {
    size_t piv = row;
    while (piv < 3 && m[piv][c] == 0) ++piv;
    if (piv == 3) continue;
    std::swap(m[piv], m[row]);
    for (size_t r = 0; r < 3; ++r) {
      if (r == row || m[r][c] == 0) continue;
      Rat f = m[r][c] / m[row][c];
      for (size_t cc = 0; cc <= nb; ++cc) m[r][cc] -= f * m[row][cc];
    }
    pivcol.push_back(int(c));
    ++row;
  }
  for (size_t r = row; r < 3; ++r)
    if (m[r][nb] != 0) return false;
  // basis is independent, so the coefficients are unique
  for (size_t r = 0; r < row; ++r) {
    Rat coef = m[r][nb] / m[r][pivcol[r]];
    if (denominator(coef) != 1) return false;
  }
  return true;
}

Lattice saturate(const Lattice& L) {
  Lattice out;
  out.is_maximal = true;
  int rank = rational_rank(L.basis);
  if (rank == 0) return out;
  if (rank == 1) {
    for (const auto& v : L.basis)
      if (gcd3(v) != 0) {
        out.basis.push_back(primitive(v));
        break;
      }
    return out;
  }
  if (rank == 3) {
    out.basis = {{Int(1), Int(0), Int(0)}, {Int(0), Int(1), Int(0)}, {Int(0), Int(0), Int(1)}};
    return out;
  }
  IVec3 n{0, 0, 0};
  for (size_t i = 0; i < L.basis.size() && gcd3(n) == 0; ++i)
    for (size_t j = i + 1; j < L.basis.size() && gcd3(n) == 0; ++j) n = cross(L.basis[i], L.basis[j]);
  n = primitive(n);
  for (const auto& k : integer_kernel({{n[0], n[1], n[2]}}, 3)) out.basis.push_back({k[0], k[1], k[2]});
  return out;
}

namespace {

// Closed axis-parallel segment with exact endpoints.
struct Seg {
  std::array<Rat, 2> p, q;
  std::string name;
};

// Intersection of two axis-parallel segments: nullopt if empty, else the
// (possibly degenerate) overlap box [lo, hi].
std::optional<std::array<std::array<Rat, 2>, 2>> seg_intersection(const Seg& s, const Seg& t) {
  std::array<Rat, 2> lo, hi;
  for (int c = 0; c < 2; ++c) {
    Rat s0 = std::min(s.p[c], s.q[c]), s1 = std::max(s.p[c], s.q[c]);
    Rat t0 = std::min(t.p[c], t.q[c]), t1 = std::max(t.p[c], t.q[c]);
    lo[c] = std::max(s0, t0);
    hi[c] = std::min(s1, t1);
    if (lo[c] > hi[c]) return std::nullopt;
  }
  return std::array<std::array<Rat, 2>, 2>{lo, hi};
}

}  // namespace

Report verify_plan_properties(const ResonantPlan& plan) {
  const int M = plan.levels();
  if (M < 3) throw Error(Module::resonance, "plan needs at least 3 levels");
  Report rep;
  rep.title = "resonant plan properties";

  // distance windows and monotonicity
  for (int m = 1; m <= M; ++m) {
    Rat lo = Rat(2) / Rat(ipow(Int(plan.l), unsigned(2 * m + 2)));
    Rat hi = Rat(2) / Rat(ipow(Int(plan.l), unsigned(2 * m)));
    Rat d2 = plan.dist2(m);
    double d = plan.dist(m);
    rep.flag("window_lo_m" + std::to_string(m), d2 >= lo, d, "d_m >= sqrt2/l^(m+1)");
    rep.flag("window_hi_m" + std::to_string(m), d2 <= hi, d, "d_m <= sqrt2/l^m");
  }
  for (int m = 1; m < M; ++m) {
    Rat dh = plan.half_dist2(m);
    rep.flag("monotone_half_m" + std::to_string(m), plan.dist2(m + 1) < dh && dh < plan.dist2(m),
             plan.half_dist(m), "d_{m+1} < d_{m+1/2} < d_m");
  }

  // segments: G[m][0] vertical from w_m to w_{m+1/2}, G[m][1] horizontal to w_{m+1}
  std::vector<std::array<Seg, 2>> G;
  for (int m = 1; m < M; ++m) {
    auto p = plan.point(m), h = plan.half_point(m), q = plan.point(m + 1);
    G.push_back({Seg{p, h, "G" + std::to_string(m) + ",1"}, Seg{h, q, "G" + std::to_string(m) + ",2"}});
  }
  const int S = int(G.size());

  // (1) equal-index segments parallel and pairwise non-collinear
  bool axis_ok = true, noncollinear1 = true, noncollinear2 = true;
  for (int i = 0; i < S; ++i) {
    axis_ok = axis_ok && G[i][0].p[0] == G[i][0].q[0] && G[i][0].p[1] != G[i][0].q[1];
    axis_ok = axis_ok && G[i][1].p[1] == G[i][1].q[1] && G[i][1].p[0] != G[i][1].q[0];
    for (int j = i + 1; j < S; ++j) {
      if (G[i][0].p[0] == G[j][0].p[0]) noncollinear1 = false;
      if (G[i][1].p[1] == G[j][1].p[1]) noncollinear2 = false;
    }
  }
  rep.flag("L1_axis_parallel", axis_ok);
  rep.flag("L1_noncollinear_i1", noncollinear1);
  rep.flag("L1_noncollinear_i2", noncollinear2);

  // (2) consecutive segments meet exactly at w_{m+1}; others are disjoint
  bool adjacent_ok = true, disjoint_ok = true;
  for (int i = 0; i < S; ++i)
    for (int j = i + 1; j < S; ++j) {
      std::vector<std::array<std::array<Rat, 2>, 2>> hits;
      for (const auto& s : G[i])
        for (const auto& t : G[j])
          if (auto x = seg_intersection(s, t)) hits.push_back(*x);
      if (j == i + 1) {
        auto w = plan.point(i + 2);
        for (const auto& h : hits)
          if (h[0] != w || h[1] != w) adjacent_ok = false;
        if (hits.empty()) adjacent_ok = false;
      } else if (!hits.empty()) {
        disjoint_ok = false;
      }
    }
  rep.flag("L2_consecutive_meet_at_vertex", adjacent_ok);
  rep.flag("L2_nonconsecutive_disjoint", disjoint_ok);

  // (3) two frequencies on one segment share exactly a rank-1 lattice (the
  // segment's line lattice); line lattices of distinct segments meet in {0}.
  std::vector<Lattice> line;
  bool same_rank1 = true, interior_ok = true;
  for (int i = 0; i < S; ++i)
    for (const auto& s : G[i]) {
      Lattice lp = resonance_lattice(s.p[0], s.p[1]);
      Lattice lq = resonance_lattice(s.q[0], s.q[1]);
      Lattice x = intersect(lp, lq);
      if (rational_rank(x.basis) != 1) same_rank1 = false;
      // an interior rational point of the segment contains the same line lattice
      std::array<Rat, 2> mid{(s.p[0] + s.q[0]) / 2, (s.p[1] + s.q[1]) / 2};
      Lattice lm = resonance_lattice(mid[0], mid[1]);
      for (const auto& v : x.basis)
        if (!in_lattice(lm, v)) interior_ok = false;
      line.push_back(x);
    }
  bool distinct_trivial = true;
  for (size_t i = 0; i < line.size(); ++i)
    for (size_t j = i + 1; j < line.size(); ++j)
      if (!intersect(line[i], line[j]).basis.empty()) distinct_trivial = false;
  rep.flag("L3_same_segment_rank1", same_rank1);
  rep.flag("L3_segment_points_share_line_lattice", interior_ok);
  rep.flag("L3_distinct_segments_trivial", distinct_trivial);
  return rep;
}

Int subresonance_bound(long l, int m, double xi) {
  using Dec = boost::multiprecision::cpp_dec_float_50;
  if (!(xi > 0)) throw Error(Module::resonance, "xi must be > 0");
  Dec e = Dec(m) * (Dec(1) + Dec(xi));
  Dec p = boost::multiprecision::pow(Dec(l), e);
  Dec r = boost::multiprecision::round(p);
  Dec f = (boost::multiprecision::abs(p - r) <= p * Dec("1e-40")) ? r : boost::multiprecision::floor(p);
  return dec_to_int(f.str(0, std::ios_base::fixed));
}

std::vector<Rat> farey_interior(const Rat& lo_in, const Rat& hi_in, const Int& D, size_t max_count) {
  if (D < 1) return {};
  Rat lo = std::min(lo_in, hi_in), hi = std::max(lo_in, hi_in);
  // Stern-Brocot descent to the Farey neighbours p1/q1 <= lo < p2/q2 of order D.
  Int fl = floor_rat(lo);
  Int p1 = fl, q1 = 1, p2 = fl + 1, q2 = 1;
  for (;;) {
    if (q1 + q2 > D) break;
    Rat med(p1 + p2, q1 + q2);
    if (med <= lo) {
      // move left endpoint: k steps of p1 += p2
      Rat den = Rat(p2) - lo * q2;  // > 0
      Int k = floor_rat((lo * q1 - Rat(p1)) / den);
      Int kd = (D - q1) / q2;
      if (kd < k) k = kd;
      if (k < 1) k = 1;
      p1 += k * p2;
      q1 += k * q2;
    } else {
      Rat num = Rat(p2) - lo * q2;
      Rat den = lo * q1 - Rat(p1);  // >= 0
      Int j;
      Int jd = (D - q2) / q1;
      if (den == 0) {
        j = jd;
      } else {
        Rat ratio = num / den;
        j = floor_rat(ratio);
        if (Rat(j) == ratio) j -= 1;
        if (jd < j) j = jd;
      }
      if (j < 1) j = 1;
      p2 += j * p1;
      q2 += j * q1;
    }
  }
  std::vector<Rat> out;
  Int a = p1, b = q1, c = p2, d = q2;
  while (Rat(c, d) < hi) {
    if (Rat(c, d) > lo) out.emplace_back(c, d);
    if (out.size() > max_count) throw Error(Module::resonance, "too many sub-resonances (guard exceeded)");
    Int k = (D + b) / d;
    Int e = k * c - a, f = k * d - b;
    a = c;
    b = d;
    c = e;
    d = f;
  }
  return out;
}

std::vector<std::array<Rat, 2>> sub_resonances(const ResonantPlan& plan, int m, double xi) {
  if (m < 1 || m >= plan.levels()) throw Error(Module::resonance, "segment index out of range");
  Int D = subresonance_bound(plan.l, m, xi);
  auto p = plan.point(m), h = plan.half_point(m);
  auto ys = farey_interior(p[1], h[1], D);
  if (h[1] < p[1]) std::reverse(ys.begin(), ys.end());
  std::vector<std::array<Rat, 2>> out;
  for (const auto& y : ys) out.push_back({p[0], y});
  return out;
}

std::string plan_csv(const ResonantPlan& plan) {
  std::ostringstream os;
  os << "m,l,a_m,b_m,b_half,d_m,d_half,lattice_m,lattice_half\n";
  char buf[64];
  for (int m = 1; m <= plan.levels(); ++m) {
    bool has_half = m < plan.levels();
    os << m << ',' << plan.l << ',' << plan.a[m - 1] << ',' << plan.b[m - 1] << ',';
    if (has_half) os << plan.b_half(m);
    std::snprintf(buf, sizeof buf, ",%.12e,", plan.dist(m));
    os << buf;
    if (has_half) {
      std::snprintf(buf, sizeof buf, "%.12e", plan.half_dist(m));
      os << buf;
    }
    os << ',';
    auto L = lattice_for(plan, {m, false});
    os << vec_str(L.basis[0]) << ';' << vec_str(L.basis[1]) << ',';
    if (has_half) {
      auto H = lattice_for(plan, {m, true});
      os << vec_str(H.basis[0]) << ';' << vec_str(H.basis[1]);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace dlab
