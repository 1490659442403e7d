#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "dlab/action.hpp"
#include "dlab/dynamics.hpp"
#include "dlab/fourier.hpp"
#include "dlab/melnikov.hpp"
#include "dlab/normalform.hpp"
#include "dlab/resonance.hpp"
#include "dlab/symplectic.hpp"
#include "dlab/weakkam.hpp"

namespace dlab::cli {

namespace {

constexpr double kPi = std::numbers::pi;

std::string path_in(const RunOptions& o, const std::string& file) {
  std::filesystem::create_directories(o.out);
  return (std::filesystem::path(o.out) / file).string();
}

void write_text(const RunOptions& o, const std::string& file, const std::string& text) {
  std::ofstream os(path_in(o, file));
  if (!os) throw Error(Module::config, "cannot write " + file + " in " + o.out);
  os << text;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// report file plus a one-line summary on stdout
Report finish(const RunOptions& o, const std::string& cmd, Report rep, double seconds) {
  rep.title = cmd;
  write_text(o, cmd + "_report.txt", rep.text());
  int failed = 0;
  for (const auto& c : rep.checks) failed += !c.pass;
  std::printf("%-11s %3zu checks, %d failed, %.1f s\n", cmd.c_str(), rep.checks.size(), failed, seconds);
  return rep;
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  return v;
}

// symmetric grid k * step, |k * step| <= half
std::vector<double> centred(double step, double half) {
  int k = int(std::floor(half / step + 1e-9));
  std::vector<double> v;
  for (int i = -k; i <= k; ++i) v.push_back(i * step);
  return v;
}

double eigen_base(const Scenario& s) {
  return std::pow(s.d_m, s.sigma) / std::pow(double(s.l), s.sd_m * (s.r + 2));
}

Trig1 pendulum_block(double lambda, double scale) { return Trig1{{{0, -lambda * scale, 0}, {1, lambda * scale, 0}}}; }

struct ScanCache {
  bool ready = false;
  AlphaScan scan;
};

AlphaScan scenario_scan(const Scenario& s, ScanCache* cache) {
  if (cache && cache->ready) return cache->scan;
  auto L = s.lagrangian();
  auto scan = alpha_scan(L, centred(s.scan_step, s.scan_half1), centred(s.scan_step, s.scan_half2), s.tol_flat,
                         s.wk_params());
  if (cache) {
    cache->scan = scan;
    cache->ready = true;
  }
  return scan;
}

Report weakkam_impl(const Scenario& s, const RunOptions& o, ScanCache* cache) {
  auto t0 = std::chrono::steady_clock::now();
  Report rep;
  auto L = s.lagrangian();
  auto r = weak_kam_solve(L, {0, 0}, s.wk_params());
  rep.merge(r.report, "c0.");
  r.u_minus.write_csv(path_in(o, "u_minus.csv"), "u_minus");
  r.u_plus.write_csv(path_in(o, "u_plus.csv"), "u_plus");
  auto B = barrier(r);
  B.write_csv(path_in(o, "barrier.csv"), "B");
  auto m = mane_set_estimate(r);
  m.mask.write_csv(path_in(o, "mane_mask.csv"), "mask");
  rep.flag("c0.alpha", std::abs(r.alpha) <= 1e-3, r.alpha, "alpha(0) = 0 for a mechanical system");
  rep.flag("c0.mane_coverage", m.coverage < 1, m.coverage, "threshold " + fmt(m.threshold));

  auto scan = scenario_scan(s, cache);
  rep.merge(scan.report, "scan.");
  {
    std::ostringstream os;
    os << "c1,c2,alpha,flat\n";
    size_t n2 = scan.c2.size();
    for (size_t i = 0; i < scan.c1.size(); ++i)
      for (size_t j = 0; j < n2; ++j)
        os << fmt(scan.c1[i]) << ',' << fmt(scan.c2[j]) << ',' << fmt(scan.alpha.values[i * n2 + j]) << ','
           << int(scan.flat.values[i * n2 + j]) << '\n';
    write_text(o, "alpha.csv", os.str());
  }
  write_text(o, "flat_polygon.csv", scan.polygon.csv());
  {
    std::ostringstream os;
    os << "g1,g2,c_g\n";
    for (const auto& e : scan.edges) os << e.g[0] << ',' << e.g[1] << ',' << fmt(e.c_g) << '\n';
    write_text(o, "flat_edges.csv", os.str());
  }
  rep.flag("scan.kind", scan.polygon.kind != "invalid", double(scan.polygon.vertices.size()), scan.polygon.kind);
  return finish(o, "weakkam", rep, since(t0));
}

Report annulus_impl(const Scenario& s, const RunOptions& o, ScanCache* cache) {
  auto t0 = std::chrono::steady_clock::now();
  auto scan = scenario_scan(s, cache);
  Report rep;
  rep.flag("flat_polygon", scan.polygon.kind != "invalid", double(scan.polygon.vertices.size()), scan.polygon.kind);
  auto rays = annulus_rays(s.an_rays, scan.polygon);
  // rays start at the vertex centroid; the argmin is any point of the flat
  Vec2 center = scan.polygon.vertices.empty() ? scan.argmin : scan.polygon.centroid();
  auto a = annulus_diagnostic(s.lagrangian(), center, scan.alpha_min, s.an_deltas, rays, s.tail_eps, s.d,
                              s.an_s_hi, s.annulus_params());
  write_text(o, "annulus.csv", a.csv());
  rep.merge(a.report);
  int full = 0;
  for (const auto& x : a.samples)
    if (x.ok && !(x.coverage < 1)) ++full;
  rep.le("full_coverage_samples", full, 0, "samples whose Mane estimate covers the torus");
  rep.flag("verified_Delta0", a.verified_Delta0 > 0, a.verified_Delta0);
  return finish(o, "annulus", rep, since(t0));
}

}  // namespace

Scenario with_overrides(Scenario s, const RunOptions& o) {
  if (o.seed) s.seed = *o.seed;
  if (o.grid) s.wk_grid = *o.grid;
  if (o.dt) s.dt = *o.dt;
  s.validate();
  return s;
}

Report run_plan(const Scenario& s, const RunOptions& o) {
  auto t0 = std::chrono::steady_clock::now();
  auto v = make_diophantine(s.w1, s.w2, s.tau, s.c0);
  Report rep;
  auto dio = diophantine_check(v, s.diophantine_kmax);
  rep.flag("diophantine", dio.pass, dio.min_margin,
           "worst k (" + std::to_string(dio.worst_k[0]) + "," + std::to_string(dio.worst_k[1]) + ")");
  auto plan = build_plan(v, s.l, s.m_max);
  auto props = verify_plan_properties(plan);
  rep.merge(props);
  write_text(o, "plan.csv", plan_csv(plan));
  auto out = finish(o, "plan", rep, since(t0));
  if (auto* f = props.first_failure()) throw Error(Module::resonance, "plan property fails: " + f->name);
  return out;
}

Report run_normalform(const Scenario& s, const RunOptions& o) {
  auto t0 = std::chrono::steady_clock::now();
  Report rep;
  auto adm = admissibility_report(s.admissibility());
  rep.merge(adm, "admissibility.");
  if (auto* f = adm.first_failure())
    throw Error(Module::admissibility, "inadmissible: " + f->name + " violated (" + f->note + ")");

  auto v = make_diophantine(s.w1, s.w2, s.tau, s.c0);
  auto plan = build_plan(v, s.l, std::max(s.m_max, s.sd_m));
  SegmentSpec seg{s.l, s.sd_m, Int(s.sd_a), parse_real_expr(s.sd_y_lo), parse_real_expr(s.sd_y_hi)};
  auto sd = small_denominator_margin(seg, s.sd_delta, s.sd_delta_plus, s.sd_xi, s.sd_samples, s.seed);
  rep.le("small_denominator", sd.alpha, sd.measured_min, "formula alpha <= measured min |<k, w>|");

  // one averaging step around the plan point of level m on random admissible data
  std::mt19937_64 rng(s.seed);
  auto f = random_admissible(rng, 30, 8, int(s.r), s.fourier_norm);
  auto L = lattice_for(plan, {s.sd_m, false});
  for (const auto& b : L.basis) {
    K3 k{long(b[0]), long(b[1]), long(b[2])};
    f.add(k, f.decay_bound(k), 0);
  }
  auto w = plan.point(s.sd_m);
  NormalFormParams p;
  p.K = std::pow(double(s.l), s.sd_m * (1 + s.xi));
  p.sigma = s.sigma;
  p.d_m = s.d_m;
  p.alpha = small_denominator_alpha(s.l, s.sd_m, double(s.sd_a), s.delta, s.delta_plus, s.xi);
  auto nf = one_step_normal_form(f, w[0], w[1], p);
  std::ostringstream os;
  os << "part,k1,k2,k3,a,b\n";
  for (const auto* part : {&nf.Z, &nf.W})
    for (const auto& [k, c] : part->coeffs)
      os << (part == &nf.Z ? 'Z' : 'W') << ',' << k[0] << ',' << k[1] << ',' << k[2] << ',' << fmt(c.a) << ','
         << fmt(c.b) << '\n';
  write_text(o, "normalform.csv", os.str());
  int stray = 0;
  for (const auto& [k, c] : nf.Z.coeffs) stray += !is_resonant(k, nf.w1, nf.w2);
  rep.le("Z_resonant", stray, 0, "Z carries resonant modes only");
  rep.lt("R1_below_Z", nf.log10_R1, nf.log10_Z, "log10");
  rep.lt("R2_below_Z", nf.log10_R2, nf.log10_Z, "log10");
  rep.flag("t_star", true, to_double(Rat(nf.t_star)), "period of the resonant frequency");

  // Fourier tail bound on the configured random sample
  int violations = 0;
  for (int t = 0; t < s.fourier_sequences; ++t) {
    auto g = random_admissible(rng, s.fourier_count, s.fourier_kmax, int(s.r), s.fourier_norm);
    for (double K : {10.0, 20.0, 40.0}) {
      auto tr = truncate(g, K);
      if (tr.discarded_c2 > tr.tail_bound) ++violations;
    }
  }
  rep.le("fourier_tail_violations", violations, 0, "discarded C2 mass <= kappa3 K^(6-r) |f|");
  return finish(o, "normalform", rep, since(t0));
}

Report run_conditions(const Scenario& s, const RunOptions& o) {
  auto t0 = std::chrono::steady_clock::now();
  Report rep;
  auto adm = admissibility_report(s.admissibility());
  rep.merge(adm, "admissibility.");
  if (auto* f = adm.first_failure())
    throw Error(Module::admissibility, "inadmissible: " + f->name + " violated (" + f->note + ")");

  // support conditions on the random data with resonant harmonics beyond l^m switched on
  auto v = make_diophantine(s.w1, s.w2, s.tau, s.c0);
  auto plan = build_plan(v, s.l, std::max(s.m_max, s.sd_m));
  auto L = lattice_for(plan, {s.sd_m, false});
  auto Lmax = maximal_reduce(L);
  std::mt19937_64 rng(s.seed);
  auto f = random_admissible(rng, 30, 8, int(s.r), s.fourier_norm);
  for (const auto& b : Lmax.basis) {
    K3 k{2 * long(b[0]), 2 * long(b[1]), 2 * long(b[2])};
    f.add(k, f.decay_bound(k), 0);
  }
  rep.merge(check_conditions(f, L, Lmax, s.sd_m, s.l).report, "support.");

  // constructed physical blocks: the unit-scale potential times the eigenvalue scale
  double base = eigen_base(s);
  Trig1 Z1 = pendulum_block(s.lambda1, base), Z21 = pendulum_block(s.lambda2, base);
  TrigSeries Z22 = s.z3.scaled(s.eps * base);
  rep.merge(check_U1_U2(Z1, s.d_m, s.sigma, s.sd_m, double(s.l), s.r, s.uc));
  rep.merge(check_U3(Z21, Z1, s.d_m, s.sigma, s.mu_iota, s.r, s.uc));
  rep.merge(check_U4(Z22, double(s.l), s.sd_m, s.r, s.uc));

  HomogenizeInput in;
  in.Z1 = Z1;
  in.Z21 = Z21;
  in.Z22 = Z22;
  in.r = s.r;
  in.big_L = s.uc.big_L;
  in.keep_cubic = s.keep_cubic;
  auto H = homogenize(in, {std::pow(double(s.l), s.sd_m), s.mu_iota, std::sqrt(Z1.c2_proxy())});
  rep.flag("homogenized_Z1_unit", H.z1_amplitude >= 0.5 && H.z1_amplitude <= 2, H.z1_amplitude,
           "normalized amplitude in [0.5, 2]");

  auto sys = s.system();
  HyperbolicParams hp;
  hp.c8 = s.c8;
  hp.c9 = s.c9;
  auto h = hyperbolic_fixed_point(sys, hp);
  rep.merge(h.report);
  rep.merge(check_U5prime(h.lambda1, h.lambda2, s.u5_order));
  auto lin = local_linear_form(sys, h);
  auto hc = find_homoclinic(sys, h, {0, 1});
  rep.merge(check_U6_U7(sys, lin, hc).report);
  auto fam = HomoclinicFamily::from(uncoupled_pendulums(s.lambda1, s.lambda2), {1, 1});
  rep.merge(critical_points(fam, s.z3, {kPi, kPi}, s.critical_radius).report, "U7_melnikov.");
  return finish(o, "conditions", rep, since(t0));
}

Report run_homoclinic(const Scenario& s, const RunOptions& o) {
  auto t0 = std::chrono::steady_clock::now();
  Report rep;
  auto sys = s.system();
  HyperbolicParams hp;
  hp.c8 = s.c8;
  hp.c9 = s.c9;
  auto h = hyperbolic_fixed_point(sys, hp);
  rep.merge(h.report);
  std::ostringstream fp;
  fp << "X1,X2,lambda1,lambda2\n" << fmt(h.fixed_point[0]) << ',' << fmt(h.fixed_point[1]) << ','
     << fmt(h.lambda1) << ',' << fmt(h.lambda2) << '\n';
  write_text(o, "fixed_point.csv", fp.str());
  for (Vec2 g : {Vec2{1, 0}, Vec2{0, 1}}) {
    auto hc = find_homoclinic(sys, h, g);
    std::string tag = g[0] == 1 ? "g10" : "g01";
    rep.merge(hc.report, tag + ".");
    write_text(o, "homoclinic_" + tag + ".csv", hc.orbit.csv());
    std::ostringstream sc;
    sc << "x,splitting\n";
    for (size_t i = 0; i < hc.scan_x.size(); ++i) sc << fmt(hc.scan_x[i]) << ',' << fmt(hc.scan_splitting[i]) << '\n';
    write_text(o, "splitting_" + tag + ".csv", sc.str());
    rep.flag(tag + ".splitting_d2", std::isfinite(hc.splitting_d2), hc.splitting_d2,
             "second difference of S^u - S^s across the section");
  }
  return finish(o, "homoclinic", rep, since(t0));
}

Report run_period(const Scenario& s, const RunOptions& o) {
  auto t0 = std::chrono::steady_clock::now();
  Report rep;
  auto sys = s.system();
  // the period and section laws live on the factor planes, which the coupling does not keep
  auto sys0 = sys;
  sys0.eps = 0;
  auto h = hyperbolic_fixed_point(sys0);
  if (sys.eps != 0) rep.flag("coupling_removed", true, sys.eps, "period and section measured at eps = 0");
  auto F = period_law(sys0, h, 1, s.period_E, s.dt);
  std::ostringstream os;
  os << "E,T\n";
  for (size_t i = 0; i < F.E.size(); ++i) os << fmt(F.E[i]) << ',' << fmt(F.T[i]) << '\n';
  write_text(o, "period.csv", os.str());
  rep.le("period_slope", std::abs(F.slope * h.lambda2 - 1), 0.02, "slope of T against log(1/E) is 1/lambda2");
  rep.le("period_failures", double(F.failures.size()), 0);

  auto R = section_expansion_rates(sys0, h, s.section_E, s.zeta, s.nu, s.dt);
  std::ostringstream ss;
  ss << "E,local_expansion,local_contraction,global_max,global_min,angle\n";
  for (size_t i = 0; i < R.E.size(); ++i)
    ss << fmt(R.E[i]) << ',' << fmt(R.local_expansion[i]) << ',' << fmt(R.local_contraction[i]) << ','
       << fmt(R.global_max[i]) << ',' << fmt(R.global_min[i]) << ',' << fmt(R.angle[i]) << '\n';
  write_text(o, "section.csv", ss.str());
  rep.merge(R.report, "section.");
  rep.le("section_slope", std::abs(R.slope / (h.lambda1 / h.lambda2) - 1), 0.05,
         "log-log slope of the local expansion is lambda1/lambda2");

  auto B = sys;
  B.tail = s.tail;
  B.tail_amp = s.tail_eps;
  double t = std::log(std::pow(s.tail_eps, -1.0 / 3));
  auto G = flow_difference_bound(sys, B, t, s.gronwall_samples, 1.0, unsigned(s.seed), s.dt);
  rep.merge(G.report, "gronwall.");
  rep.le("gronwall_slack", 2, G.slack, "bound / measured >= 2");
  return finish(o, "period", rep, since(t0));
}

Report run_melnikov(const Scenario& s, const RunOptions& o) {
  auto t0 = std::chrono::steady_clock::now();
  Report rep;
  auto fam = HomoclinicFamily::from(uncoupled_pendulums(s.lambda1, s.lambda2), {1, 1});
  auto xs = linspace(kPi - s.melnikov_half, kPi + s.melnikov_half, s.melnikov_grid);
  auto F = melnikov_evaluate(fam, s.z3, xs, xs);
  write_text(o, "melnikov.csv", F.csv());
  rep.merge(F.report);
  auto coarse = melnikov_evaluate(fam, s.z3, linspace(xs.front(), xs.back(), (s.melnikov_grid + 1) / 2),
                                  linspace(xs.front(), xs.back(), (s.melnikov_grid + 1) / 2));
  auto fi = check_flow_invariance(F, fam), fc = check_flow_invariance(coarse, fam);
  double ratio = fc.residual / fi.residual;
  rep.flag("flow_invariance_order", ratio >= 3.5 && ratio <= 4.5, ratio, "residual ratio on halving the spacing");
  rep.le("antisymmetry", fi.antisymmetry, 1e-8);
  auto hr = hessian_rank_scan(F);
  rep.le("hessian_rank", hr.max_rank, 1);
  auto cs = critical_points(fam, s.z3, {kPi, kPi}, s.critical_radius);
  rep.merge(cs.report, "critical.");
  std::ostringstream os;
  os << "x,q,delta,rank\n";
  for (const auto& c : cs.points)
    os << fmt(c.point[0]) << ',' << fmt(c.point[1]) << ',' << fmt(c.delta) << ',' << c.rank << '\n';
  write_text(o, "critical.csv", os.str());
  return finish(o, "melnikov", rep, since(t0));
}

Report run_actions(const Scenario& s, const RunOptions& o) {
  auto t0 = std::chrono::steady_clock::now();
  Report rep;
  CornerActionInput ex{2, 1, {0.1, 0}, {0, 0.1}, 1};
  rep.le("worked_through", std::abs(through_action(ex) - 0.01175175), 5e-9);
  rep.le("worked_broken", std::abs(broken_action(ex) - 0.01), 1e-15);

  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> Lg(0.1, 5), Tg(0.01, 20), Rg(1e-3, 1), Sg(0, 1);
  std::ostringstream os;
  os << "lambda1,lambda2,T,x1,x2,through,broken,difference\n";
  int violations = 0;
  double worst = 0;
  for (int k = 0; k < 1000; ++k) {
    CornerActionInput in;
    in.lambda1 = Lg(rng);
    in.lambda2 = Lg(rng);
    in.T = Tg(rng);
    in.X1pt = {(Sg(rng) < 0.5 ? -1 : 1) * Rg(rng), 0};
    in.X2pt = {0, (Sg(rng) < 0.5 ? -1 : 1) * Rg(rng)};
    double t = through_action(in), b = broken_action(in), dlt = through_minus_broken(in);
    if (!(dlt > 0)) ++violations;
    worst = std::max({worst, std::abs(t - through_action_quadrature(in)), std::abs(b - broken_action_quadrature(in))});
    os << fmt(in.lambda1) << ',' << fmt(in.lambda2) << ',' << fmt(in.T) << ',' << fmt(in.X1pt[0]) << ','
       << fmt(in.X2pt[1]) << ',' << fmt(t) << ',' << fmt(b) << ',' << fmt(dlt) << '\n';
  }
  write_text(o, "actions.csv", os.str());
  rep.le("through_gt_broken_violations", violations, 0);
  rep.le("closed_form_vs_quadrature", worst, 1e-9);

  // uncoupled flat from the separatrix values of the two factors
  auto sys = s.system();
  double c1 = separatrix_c_value(sys.Z1), c2 = separatrix_c_value(sys.Z2);
  auto poly = flat_polygon({{{1, 0}, c1}, {{-1, 0}, c1}, {{0, 1}, c2}, {{0, -1}, c2}});
  rep.merge(poly.report, "uncoupled_flat.");
  write_text(o, "flat_uncoupled.csv", poly.csv());
  return finish(o, "actions", rep, since(t0));
}

Report run_weakkam(const Scenario& s, const RunOptions& o) { return weakkam_impl(s, o, nullptr); }

Report run_annulus(const Scenario& s, const RunOptions& o) { return annulus_impl(s, o, nullptr); }

Report run_all(const Scenario& s, const RunOptions& o) {
  auto t0 = std::chrono::steady_clock::now();
  Report rep;
  rep.merge(run_plan(s, o), "plan.");
  rep.merge(run_normalform(s, o), "normalform.");
  rep.merge(run_conditions(s, o), "conditions.");
  rep.merge(run_homoclinic(s, o), "homoclinic.");
  rep.merge(run_period(s, o), "period.");
  rep.merge(run_melnikov(s, o), "melnikov.");
  rep.merge(run_actions(s, o), "actions.");
  ScanCache cache;
  rep.merge(weakkam_impl(s, o, &cache), "weakkam.");
  rep.merge(annulus_impl(s, o, &cache), "annulus.");
  return finish(o, "all", rep, since(t0));
}

}  // namespace dlab::cli
