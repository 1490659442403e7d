#include "dlab/normalform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <omp.h>

namespace dlab {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

// rationals with larger denominators are treated as irrational surrogates
const Int kMaxDenominator = Int(1000000000000000000LL);

void require_rational(const Rat& w, const char* what) {
  if (denominator(w) > kMaxDenominator)
    throw Error(Module::normalform, std::string(what) + " has a denominator above 1e18; treat it as irrational");
}

double log10_pos(double x) { return std::log10(x); }

// integer coordinates of k in the basis g1, g2, if any
bool solve_in_span(const IVec3& k, const IVec3& g1, const IVec3& g2, Int& i, Int& j) {
  IVec3 n = cross(g1, g2);
  if (dot(n, k) != 0) return false;
  // Cramer on the first nonzero 2x2 minor
  for (int p = 0; p < 3; ++p)
    for (int q = p + 1; q < 3; ++q) {
      Int det = g1[p] * g2[q] - g1[q] * g2[p];
      if (det == 0) continue;
      Int ni = k[p] * g2[q] - k[q] * g2[p];
      Int nj = g1[p] * k[q] - g1[q] * k[p];
      if (ni % det != 0 || nj % det != 0) return false;
      i = ni / det;
      j = nj / det;
      return true;
    }
  return false;
}

double extrema_scale(const Trig1& f) {
  double s = f.c2_proxy();
  return s > 0 ? s : 1.0;
}

// find_extrema's value tolerance is absolute; run it on f / C2(f) so tiny
// p^sigma-scaled inputs are not all "maximal", then scale back
ExtremaInfo scaled_extrema(const Trig1& f) {
  double s = extrema_scale(f);
  auto ex = find_extrema(f.scaled(1 / s));
  for (auto* v : {&ex.critical, &ex.maximizers, &ex.minimizers})
    for (auto& cp : *v) {
      cp.value *= s;
      cp.curvature *= s;
    }
  ex.max_value *= s;
  ex.min_value *= s;
  return ex;
}

}  // namespace

Rat pairing(const K3& k, const Rat& w1, const Rat& w2) { return Rat(k[0]) * w1 + Rat(k[1]) * w2 + Rat(k[2]); }

bool is_resonant(const K3& k, const Rat& w1, const Rat& w2) { return pairing(k, w1, w2) == 0; }

Int period_tstar(const Rat& w1, const Rat& w2) {
  require_rational(w1, "w1");
  require_rational(w2, "w2");
  return lcm(denominator(w1), denominator(w2));
}

FourierSeq resonant_average(const FourierSeq& f, const Rat& w1, const Rat& w2) {
  require_rational(w1, "w1");
  require_rational(w2, "w2");
  f.validate();
  FourierSeq z;
  z.r = f.r;
  z.norm_cr = f.norm_cr;
  for (const auto& [k, c] : f.coeffs)
    if (is_resonant(k, w1, w2)) z.coeffs[k] = c;
  return z;
}

double time_average(const FourierSeq& f, const Rat& w1, const Rat& w2, double q1, double q2, double t0, int n) {
  Int T = period_tstar(w1, w2);
  if (n <= 0) {
    // mode k oscillates T*<k,w~> times over one period
    Int top = 0;
    for (const auto& [k, c] : f.coeffs) {
      Rat cycles = pairing(k, w1, w2) * Rat(T);
      Int v = abs(numerator(cycles));  // integral since T* clears the denominators
      top = std::max(top, v);
    }
    n = int(2 * top + 3);
  }
  double Td = T.convert_to<double>();
  double a1 = to_double(w1), a2 = to_double(w2);
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    double t = Td * i / n;
    sum += eval(f, q1 + kTwoPi * a1 * t, q2 + kTwoPi * a2 * t, t0 + t);
  }
  return sum / n;
}

FourierSeq solve_cohomological(const FourierSeq& f, const Rat& w1, const Rat& w2, double K, ResonantModes mode) {
  require_rational(w1, "w1");
  require_rational(w2, "w2");
  FourierSeq W;
  W.r = f.r;
  double min_nu = INFINITY;
  for (const auto& [k, c] : f.coeffs) {
    if (double(max_norm(k)) > K) continue;
    Rat p = pairing(k, w1, w2);
    if (p == 0) {
      if (mode == ResonantModes::reject && k != K3{0, 0, 0} && (c.a != 0 || c.b != 0)) {
        std::ostringstream os;
        os << "resonant mode (" << k[0] << "," << k[1] << "," << k[2]
           << ") below the cutoff carries a coefficient; it belongs to the average";
        throw Error(Module::normalform, os.str());
      }
      continue;
    }
    double nu = kTwoPi * to_double(p);
    min_nu = std::min(min_nu, std::abs(nu));
    // d/dt (A cos + B sin)(phase + nu t) = nu (B cos - A sin)
    W.coeffs[k] = Coef{-c.b / nu, c.a / nu};
  }
  W.norm_cr = std::isfinite(min_nu) ? f.norm_cr / min_nu : f.norm_cr;
  return W;
}

double cohomological_residual(const FourierSeq& W, const FourierSeq& f, const Rat& w1, const Rat& w2, double K,
                              int n) {
  struct Term {
    double k1, k2, k3, a, b, nu;
  };
  std::vector<Term> wt, ft;
  for (const auto& [k, c] : W.coeffs)
    wt.push_back({double(k[0]), double(k[1]), double(k[2]), c.a, c.b, kTwoPi * to_double(pairing(k, w1, w2))});
  for (const auto& [k, c] : f.coeffs) {
    if (double(max_norm(k)) > K || is_resonant(k, w1, w2)) continue;
    ft.push_back({double(k[0]), double(k[1]), double(k[2]), c.a, c.b, 0});
  }
  double worst = 0;
#pragma omp parallel for reduction(max : worst) schedule(static)
  for (int i = 0; i < n; ++i) {
    double q1 = kTwoPi * i / n;
    for (int j = 0; j < n; ++j) {
      double q2 = kTwoPi * j / n;
      for (int s = 0; s < n; ++s) {
        double t = double(s) / n;
        double lhs = 0, rhs = 0;
        for (const auto& m : wt) {
          double ph = m.k1 * q1 + m.k2 * q2 + kTwoPi * m.k3 * t;
          lhs += m.nu * (m.b * std::cos(ph) - m.a * std::sin(ph));
        }
        for (const auto& m : ft) {
          double ph = m.k1 * q1 + m.k2 * q2 + kTwoPi * m.k3 * t;
          rhs += m.a * std::cos(ph) + m.b * std::sin(ph);
        }
        worst = std::max(worst, std::abs(lhs - rhs));
      }
    }
  }
  return worst;
}

double drift_proxy(const FourierSeq& W) {
  double s = 0;
  for (const auto& [k, c] : W.coeffs) s += double(max_norm(k)) * std::hypot(c.a, c.b);
  return s;
}

double small_denominator_alpha(long l, int m, double a, double delta, double delta_plus, double xi) {
  if (!(delta_plus > delta) || delta < 0) throw Error(Module::normalform, "need delta_plus > delta >= 0");
  double lm = std::pow(double(l), m);
  return std::sqrt(delta_plus * delta_plus - delta * delta) / std::sqrt(lm * lm + a * a) -
         std::pow(double(l), m * (1 + xi)) * delta;
}

SmallDenominatorResult small_denominator_margin(const SegmentSpec& seg, double delta, double delta_plus, double xi,
                                                int samples, std::uint64_t seed) {
  SmallDenominatorResult res;
  double a = seg.a.convert_to<double>();
  res.alpha = small_denominator_alpha(seg.l, seg.m, a, delta, delta_plus, xi);
  res.admissible = res.alpha > 0;
  Int lm = ipow(Int(seg.l), unsigned(seg.m));
  long D = subresonance_bound(seg.l, seg.m, xi).convert_to<long>();
  res.cutoff = D;
  const Rat x0r = Rat(seg.a, lm);
  const double x0 = to_double(x0r), ylo = to_double(seg.y_lo), yhi = to_double(seg.y_hi);

  // centres of the excluded balls: y where k1 x0 + k2 y + k3 = 0, k not parallel to e1
  std::vector<double> centres;
  for (long k2 = 1; k2 <= D; ++k2)
    for (long k1 = -D; k1 <= D; ++k1) {
      double base = double(k1) * x0;
      long k3lo = long(std::floor(-base - k2 * (yhi + delta_plus))) - 1;
      long k3hi = long(std::ceil(-base - k2 * (ylo - delta_plus))) + 1;
      for (long k3 = std::max(k3lo, -D); k3 <= std::min(k3hi, D); ++k3) {
        double yd = -(base + double(k3)) / double(k2);
        if (yd >= ylo - delta_plus && yd <= yhi + delta_plus) centres.push_back(yd);
      }
    }
  std::sort(centres.begin(), centres.end());
  centres.erase(std::unique(centres.begin(), centres.end()), centres.end());
  res.excluded_points = int(centres.size());

  // allowed y-intervals: the segment minus [c - delta_plus, c + delta_plus];
  // dropping dx from the ball test only removes more
  std::vector<std::array<double, 2>> gaps;
  double cur = ylo;
  for (double c : centres) {
    if (c - delta_plus > cur) gaps.push_back({cur, std::min(c - delta_plus, yhi)});
    cur = std::max(cur, c + delta_plus);
    if (cur >= yhi) break;
  }
  if (cur < yhi) gaps.push_back({cur, yhi});
  std::vector<double> cum;
  double total = 0;
  for (const auto& g : gaps) cum.push_back(total += g[1] - g[0]);

  // half uniform over the domain, half pressed against ball boundaries where the margin is thinnest
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<std::array<double, 2>> pts;
  if (total > 0)
    for (int s = 0; s < samples; ++s) {
      double dx = (2 * U(rng) - 1) * delta, y;
      if (s % 2 == 0) {
        double u = U(rng) * total;
        size_t g = std::min(size_t(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin()), gaps.size() - 1);
        y = gaps[g][1] - (cum[g] - u);
      } else {
        const auto& g = gaps[size_t(U(rng) * double(gaps.size())) % gaps.size()];
        double w = std::min(1e-3 * delta_plus, g[1] - g[0]);
        y = U(rng) < 0.5 ? g[0] + U(rng) * w : g[1] - U(rng) * w;
      }
      pts.push_back({dx, std::clamp(y, ylo, yhi)});
    }
  res.samples = int(pts.size());

  std::vector<double> best(pts.size(), INFINITY);
  std::vector<K3> arg(pts.size());
  const long e1x = lm.convert_to<long>(), e1z = -seg.a.convert_to<long>();
#pragma omp parallel for schedule(dynamic)
  for (size_t s = 0; s < pts.size(); ++s) {
    double x = x0 + pts[s][0], y = pts[s][1];
    for (long k2 = 0; k2 <= D; ++k2)
      for (long k1 = (k2 == 0 ? 0 : -D); k1 <= D; ++k1) {
        double v = double(k1) * x + double(k2) * y;
        long k3 = std::clamp(long(-std::nearbyint(v)), -D, D);
        if (k2 == 0 && k1 * e1z == k3 * e1x) continue;  // multiple of e1, including 0
        double g = std::abs(v + double(k3));
        if (g < best[s]) {
          best[s] = g;
          arg[s] = {k1, k2, k3};
        }
      }
  }
  res.measured_min = INFINITY;
  for (size_t s = 0; s < pts.size(); ++s)
    if (best[s] < res.measured_min) {
      res.measured_min = best[s];
      res.worst_k = arg[s];
      res.worst_x = x0 + pts[s][0];
      res.worst_y = pts[s][1];
    }
  res.pass = res.admissible && res.samples > 0 && res.measured_min >= res.alpha;
  return res;
}

double inf_delta_plus_exponent(double sigma, double r, double xi) {
  return (sigma - 7 - r - 2 * xi) / (2 * (sigma + r + 2));
}

Report admissibility_report(const AdmissibilityParams& p) {
  Report rep;
  rep.title = "admissibility";
  const double L = std::log10(p.l), F = std::log10(p.much_less), G = std::log10(p.less_dot);
  const double m = p.m, r = p.r, xi = p.xi, s = p.sigma;
  const double ld = log10_pos(p.delta), ldp = log10_pos(p.delta_plus), ldm = log10_pos(p.d_m);
  rep.lt("index1", r + 2, s, "sigma > r+2");
  if (r > 6)
    rep.lt("xi_lower", 8 / (r - 6), xi, "xi > 8/(r-6)");
  else
    rep.flag("xi_lower", false, r, "needs r > 6");
  rep.lt("index_chain", 3 * r + 4 * xi + 15, s, "sigma > 3r+4xi+15");
  // the remaining lines compare log10 values
  rep.le("radius", ld + F, -m * (r + 4 + xi) * L, "log10: delta << l^{-m(r+4+xi)}");
  rep.le("delta_plus_lower", -m * (s - 7 - r - 2 * xi) / 2 * L + F, ldp, "log10: l^{-m(s-7-r-2xi)/2} << delta_plus");
  rep.le("delta_plus_upper", ldp + F, -m * (r + 4 + xi) * L, "log10: delta_plus << l^{-m(r+4+xi)}");
  rep.le("delta_lower", -m * (s - 2 - xi) * L - ldp + G, ld, "log10: l^{-m(s-2-xi)}/delta_plus <. delta");
  rep.le("delta_upper", ld + G, -m * (2 + xi) * L + ldp, "log10: delta <. l^{-m(2+xi)} delta_plus");
  rep.le("delta_le_dm", p.delta, p.d_m, "delta <= d_m");
  // alpha from the margin formula, with a_m <= l^m the worst case a_m = l^m
  double lalpha = ldp - m * L - 0.5 * std::log10(2.0);
  rep.le("R2_control", (s - 1) * ldm - 2 * lalpha + F, -m * (r + 4 + 2 * xi) * L,
         "log10: d^{s-1}/alpha^2 << l^{-m(r+4+2xi)}");
  rep.le("drift_control", s * ldm - lalpha + m * (1 + xi) * L + G, ld, "log10: d^s l^{m(1+xi)}/alpha <. delta");
  double e = inf_delta_plus_exponent(s, r, xi);
  rep.lt("inf_delta_plus_exponent", 1.0 / 6, e, "(s-7-r-2xi)/(2(s+r+2)) > 1/6");
  return rep;
}

ZSplit split_Z(const FourierSeq& Z, const IVec3& g1, const IVec3& g2) {
  ZSplit out;
  for (auto* s : {&out.Z1k, &out.Z21k, &out.Z22k}) {
    s->r = Z.r;
    s->norm_cr = Z.norm_cr;
  }
  for (const auto& [k, c] : Z.coeffs) {
    if (c.a == 0 && c.b == 0) continue;
    Int i = 0, j = 0;
    if (k != K3{0, 0, 0} && !solve_in_span(to_ivec(k), g1, g2, i, j)) {
      std::ostringstream os;
      os << "coefficient at (" << k[0] << "," << k[1] << "," << k[2] << ") is off span{g1, g2}";
      throw Error(Module::normalform, os.str());
    }
    Mode md{i.convert_to<int>(), j.convert_to<int>(), 0, c.a, c.b};
    if (j == 0) {
      out.Z1k.coeffs[k] = c;
      out.Z1.modes.push_back(md);
    } else if (i == 0) {
      out.Z21k.coeffs[k] = c;
      out.Z21.modes.push_back(md);
    } else {
      out.Z22k.coeffs[k] = c;
      out.Z22.modes.push_back(md);
    }
  }
  return out;
}

namespace {

Trig1 as_trig1(const TrigSeries& s, int axis) {
  Trig1 f;
  for (const auto& m : s.modes) {
    int other = axis == 0 ? m.k2 : m.k1;
    if (other != 0 || m.k3 != 0) throw Error(Module::normalform, "series depends on more than one angle");
    int n = axis == 0 ? m.k1 : m.k2;
    if (n < 0)
      f.terms.push_back({-n, m.a, -m.b});
    else
      f.terms.push_back({n, m.a, m.b});
  }
  return f;
}

}  // namespace

Trig1 as_trig1_x1(const TrigSeries& s) { return as_trig1(s, 0); }
Trig1 as_trig1_x2(const TrigSeries& s) { return as_trig1(s, 1); }

Report check_U1_U2(const Trig1& Z1, double d_m, double sigma, int m, double l, double r, const UConstants& c) {
  Report rep;
  rep.title = "U1/U2";
  auto ex = scaled_extrema(Z1);
  double scale = extrema_scale(Z1);
  double curv = INFINITY;
  for (const auto& cp : ex.maximizers) curv = std::min(curv, std::abs(cp.curvature));
  if (ex.maximizers.empty()) curv = 0;
  double base = std::pow(d_m, sigma) / std::pow(l, m * (r + 2));
  int count = int(ex.maximizers.size());
  rep.flag("U1_unique_max", count == 1, count, "global maximizers of Z1");
  rep.le("U1_nondegenerate", 1e-10, curv / scale, "|Z1''| at the max, relative to the C2 proxy");
  rep.le("U1_eigenvalue", c.c4 * base, curv, "c4 d^s/l^{m(r+2)} <= |Z1''|");
  // U2 restates U1 for -Z1 as a unique minimum with constant c5
  rep.flag("U2_unique_min", count == 1, count, "global minimizers of -Z1");
  rep.le("U2_eigenvalue", c.c5 * base, curv, "c5 d^s/l^{m(r+2)} <= |Z1''|");
  return rep;
}

Report check_U3(const Trig1& Z21, const Trig1& Z1, double d_star, double sigma, double mu_iota, double r,
                const UConstants& c) {
  Report rep;
  rep.title = "U3";
  auto ex = scaled_extrema(Z21);
  int count = int(ex.maximizers.size());
  double curv = count ? std::abs(ex.maximizers.front().curvature) : 0;
  rep.flag("U3_unique_max", count == 1, count, "global maximizers of Z21");
  rep.le("U3_nondegenerate", 1e-10, curv / extrema_scale(Z21), "|Z21''| at the max, relative");
  double cap = c.c6 * std::pow(d_star, sigma) / std::pow(mu_iota, r + 2);
  auto& cc = rep.le("U3_c2_cap", Z21.c2_proxy(), cap, "C2(Z21) <= c6 d*^s/(mu iota)^{r+2}");
  if (cap > 0) {
    std::ostringstream os;
    os << cc.note << "; ratio " << Z21.c2_proxy() / cap;
    cc.note = os.str();
  }
  rep.le("U3_c6_lower", 0.5, c.c6, "1/2 <= c6");
  rep.lt("U3_c6_upper", c.c6, c.c5 / 2, "c6 < c5/2");
  auto e1 = scaled_extrema(Z1);
  double z1c = e1.maximizers.empty() ? 0 : std::abs(e1.maximizers.front().curvature);
  rep.le("U3_weaker_than_Z1", curv, z1c / 2, "|Z21''| <= |Z1''|/2 at the maxima");
  return rep;
}

Report check_U4(const TrigSeries& Z22, double l, int m, double r, const UConstants& c) {
  Report rep;
  rep.title = "U4";
  double cap = 1.0 / (c.big_L * std::pow(std::pow(l, m), r + 2 + c.eta));
  auto& cc = rep.le("U4_c2_cap", Z22.c2_proxy(), cap, "C2(Z22) <. 1/(L (l^m)^{r+2+eta})");
  std::ostringstream os;
  os << cc.note << "; ratio " << Z22.c2_proxy() / cap;
  cc.note = os.str();
  return rep;
}

TrigSeries second_average(const TrigSeries& Z2, const Rat& omega2) {
  if (omega2 == 0) throw Error(Module::normalform, "second average needs omega2 != 0");
  TrigSeries out;
  for (const auto& m : Z2.modes)
    if (m.k2 == 0) out.modes.push_back(m);
  return out;
}

double second_average_quadrature(const TrigSeries& Z2, const Rat& omega2, double x1, double x2, int n) {
  if (omega2 == 0) throw Error(Module::normalform, "second average needs omega2 != 0");
  if (n <= 0) {
    int top = 0;
    for (const auto& m : Z2.modes) top = std::max(top, std::abs(m.k2));
    n = 2 * top + 3;
  }
  double w = to_double(omega2), T = 1 / std::abs(w);
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    double s = T * i / n;
    sum += Z2.value(x1, x2 + kTwoPi * w * s);
  }
  return sum / n;
}

BifurcationReport check_bifurcation(const std::function<Trig1(double)>& family, double lam0, double lam1,
                                    int steps) {
  BifurcationReport br;
  br.samples = steps + 1;
  std::vector<int> count(br.samples);
  std::vector<double> argmax(br.samples), curv(br.samples);
  std::vector<Trig1> fam(br.samples);
  for (int i = 0; i < br.samples; ++i) fam[i] = family(lam0 + (lam1 - lam0) * i / std::max(steps, 1));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < br.samples; ++i) {
    auto ex = scaled_extrema(fam[i]);
    count[i] = int(ex.maximizers.size());
    double c = INFINITY;
    for (const auto& cp : ex.maximizers) c = std::min(c, std::abs(cp.curvature) / extrema_scale(fam[i]));
    curv[i] = ex.maximizers.empty() ? 0 : c;
    argmax[i] = ex.maximizers.empty() ? 0 : ex.maximizers.front().x;
  }
  br.min_curvature = INFINITY;
  int run = 0;
  for (int i = 0; i < br.samples; ++i) {
    br.max_count = std::max(br.max_count, count[i]);
    br.min_curvature = std::min(br.min_curvature, curv[i]);
    if (count[i] == 2) {
      ++br.two_max_samples;
      br.longest_two_max_run = std::max(br.longest_two_max_run, ++run);
    } else {
      run = 0;
    }
    if (i > 0) {
      double d = std::fmod(std::abs(argmax[i] - argmax[i - 1]), kTwoPi);
      d = std::min(d, kTwoPi - d);
      // a continuing branch moves by O(step); a switch jumps across the circle
      if (d > 0.5) ++br.branch_switches;
    }
  }
  auto& rep = br.report;
  rep.title = "bifurcation";
  rep.le("at_most_two_maximizers", br.max_count, 2);
  rep.le("nondegenerate_maximizers", 1e-10, br.min_curvature, "min |F''| at maximizers, relative");
  rep.le("isolated_two_max_samples", br.longest_two_max_run, 2, "longest run of samples with two maximizers");
  rep.flag("branch_switches", true, br.branch_switches, "finite count of global-max branch jumps");
  return br;
}

ResonantNormalForm one_step_normal_form(const FourierSeq& f, const Rat& w1, const Rat& w2,
                                        const NormalFormParams& p) {
  ResonantNormalForm nf;
  nf.w1 = w1;
  nf.w2 = w2;
  nf.t_star = period_tstar(w1, w2);
  nf.Z = resonant_average(f, w1, w2);
  nf.W = solve_cohomological(f, w1, w2, p.K, ResonantModes::absorb);
  double ds = std::pow(p.d_m, p.sigma);
  // logs: d^sigma underflows doubles for the shipped sigma
  double ld = std::log10(p.d_m);
  nf.log10_Z = p.sigma * ld + std::log10(nf.Z.c2_mass(0));
  nf.log10_R1 = std::log10(kappa3()) + p.sigma * ld + std::log10(f.norm_cr) - (f.r - 6) * std::log10(p.K);
  nf.log10_R2 = (2 * p.sigma - 1) * ld + std::log10(f.c2_mass(0)) - 2 * std::log10(p.alpha) + 2 * std::log10(p.K);
  nf.log10_drift = p.sigma * ld + std::log10(drift_proxy(nf.W));
  return nf;
}

}  // namespace dlab
