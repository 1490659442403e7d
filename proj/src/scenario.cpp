#include "dlab/scenario.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace dlab {

namespace {

std::string show(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}
std::string show(int v) { return std::to_string(v); }
std::string show(long v) { return std::to_string(v); }
std::string show(std::uint64_t v) { return std::to_string(v); }
std::string show(bool v) { return v ? "true" : "false"; }
std::string show(const std::string& v) { return v; }
std::string show(const std::vector<double>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + show(v[i]);
  return s;
}
std::string show(const TrigSeries& v) { return modes_str(v); }

[[noreturn]] void bad(const std::string& key, const std::string& text) {
  throw Error(Module::config, "cannot parse " + key + " = '" + text + "'");
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  std::istringstream is(text);
  T v{};
  if (!(is >> v)) bad(key, text);
  std::string rest;
  if (is >> rest) bad(key, text);
  return v;
}

void parse(const std::string& key, const std::string& t, double& v) { v = parse_number<double>(key, t); }
void parse(const std::string& key, const std::string& t, int& v) { v = parse_number<int>(key, t); }
void parse(const std::string& key, const std::string& t, long& v) { v = parse_number<long>(key, t); }
void parse(const std::string& key, const std::string& t, std::uint64_t& v) { v = parse_number<std::uint64_t>(key, t); }
void parse(const std::string& key, const std::string& t, std::string& v) {
  if (t.empty()) bad(key, t);
  v = t;
}
void parse(const std::string& key, const std::string& t, bool& v) {
  if (t == "true" || t == "1") v = true;
  else if (t == "false" || t == "0") v = false;
  else bad(key, t);
}
void parse(const std::string& key, const std::string& t, std::vector<double>& v) {
  std::istringstream is(t);
  v.clear();
  std::string tok;
  while (is >> tok) v.push_back(parse_number<double>(key, tok));
  if (v.empty()) bad(key, t);
}
void parse(const std::string& key, const std::string& t, TrigSeries& v) {
  try {
    v = parse_modes(t);
  } catch (const Error&) {
    bad(key, t);
  }
}

// The single table of keys: section, key, field, and the condition it has to meet.
template <class F>
void visit(Scenario& s, F&& f) {
  f("scenario", "name", s.name, "free text, used in report titles");
  f("scenario", "seed", s.seed, "seeds every random sample; same seed, same CSVs");

  f("frequency", "w1", s.w1, "expression in sqrt, pi, e, + - * / ( ); 0 < w1 < 1");
  f("frequency", "w2", s.w2, "0 < w2 < 1");
  f("frequency", "tau", s.tau, "Diophantine exponent, tau >= 0");
  f("frequency", "c0", s.c0, "|<k, w> + k3| >= c0 / |k|^(1 + tau) for 0 < |k| <= kmax");
  f("frequency", "kmax", s.diophantine_kmax, "scan radius of the Diophantine check");

  f("plan", "l", s.l, "integer base, l >= 2");
  f("plan", "m_max", s.m_max, "number of plan levels, 1 <= m_max <= 12");
  f("plan", "xi", s.xi, "xi > 8 / (r - 6)");
  f("plan", "r", s.r, "regularity, r > 6");
  f("plan", "sigma", s.sigma, "sigma > 3 r + 4 xi + 15");

  f("smalldiv", "m", s.sd_m, "plan level of the desk instance");
  f("smalldiv", "a", s.sd_a, "segment abscissa a / l^m");
  f("smalldiv", "y_lo", s.sd_y_lo, "segment ordinate range, y_lo < y_hi");
  f("smalldiv", "y_hi", s.sd_y_hi, "");
  f("smalldiv", "xi", s.sd_xi, "cutoff floor(l^(m (1 + xi))) must stay enumerable");
  f("smalldiv", "delta", s.sd_delta, "tube half-width, delta << delta_plus");
  f("smalldiv", "delta_plus", s.sd_delta_plus, "excluded radius around sub-resonances");
  f("smalldiv", "samples", s.sd_samples, "frequencies sampled on the tube");

  f("fourier", "sequences", s.fourier_sequences, "random admissible sequences for the tail bound");
  f("fourier", "count", s.fourier_count, "coefficients per sequence");
  f("fourier", "kmax", s.fourier_kmax, "largest |k| drawn");
  f("fourier", "norm", s.fourier_norm, "C^r norm scale, |f_k| <= norm (2 pi |k|)^-r");

  f("normalform", "d_m", s.d_m, "d_m in [sqrt2 / l^(m+1), sqrt2 / l^m]");
  f("normalform", "delta", s.delta, "delta < delta_plus");
  f("normalform", "delta_plus", s.delta_plus, "delta < delta_plus < 1");
  f("normalform", "much_less", s.much_less, "factor read for '<<'");
  f("normalform", "less_dot", s.less_dot, "factor read for the dotted '<'");

  f("potential", "lambda1", s.lambda1, "Z1 = lambda1 (cos X1 - 1), lambda1 > lambda2 > 0");
  f("potential", "lambda2", s.lambda2, "Z2 = lambda2 (cos X2 - 1)");
  f("potential", "eps", s.eps, "coupling eps Z3, 0 <= eps small enough for U6/U7");
  f("potential", "z3", s.z3, "modes 'k1 k2 k3 a b; ...' of Z3, a cos + b sin of k1 X1 + k2 X2 + k3 2 pi s");
  f("potential", "tail_eps", s.tail_eps, "tail amplitude epsilon, 0 < epsilon << 1");
  f("potential", "tail", s.tail, "modes of the time-periodic tail");
  f("potential", "d", s.d, "wedge exponent in 3 epsilon^d, 0 < d < 1");
  f("potential", "keep_cubic", s.keep_cubic, "keep delta D3h(Y,Y,Y)/6 in the kinetic energy");

  f("constants", "c4", s.uc.c4, "U1 eigenvalue constant, c4 > 0");
  f("constants", "c5", s.uc.c5, "U2 eigenvalue constant, c5 > c4");
  f("constants", "c6", s.uc.c6, "U3 constant, 1/2 <= c6 < c5 / 2");
  f("constants", "L", s.uc.big_L, "U4 constant, L >= 1");
  f("constants", "eta", s.uc.eta, "U4 extra decay, eta >= 0");
  f("constants", "c8", s.c8, "required gap lambda1 - lambda2 >= c8 (0: not asserted)");
  f("constants", "c9", s.c9, "required ratio lambda1 / lambda2 - 1 >= c9 (0: not asserted)");
  f("constants", "mu_iota", s.mu_iota, "second-block period, 1 <= mu iota <= l^m");
  f("constants", "u5_order", s.u5_order, "order k of the eigenvalue nonresonance, k >= 1");
  f("constants", "zeta", s.zeta, "section radius, 0 < zeta < 1");
  f("constants", "nu", s.nu, "section offset, 0 < nu < zeta");

  f("dynamics", "dt", s.dt, "integrator step, dt <= 1e-2");
  f("dynamics", "period_E", s.period_E, "energies for the period law, all in (0, 1e-2]");
  f("dynamics", "section_E", s.section_E, "energies for the section rates");
  f("dynamics", "gronwall_samples", s.gronwall_samples, "initial states for the flow difference");

  f("melnikov", "grid", s.melnikov_grid, "nodes per axis around (pi, pi), odd");
  f("melnikov", "half", s.melnikov_half, "half-width of the grid");
  f("melnikov", "radius", s.critical_radius, "ball radius for the critical-point count");

  f("weakkam", "grid", s.wk_grid, "nodes per axis, overridden by --grid");
  f("weakkam", "window", s.wk_window, "stencil radius in cells along the fastest axis");
  f("weakkam", "margin", s.wk_margin, "stencil radius >= margin x speed bound x t, margin >= 1");
  f("weakkam", "tol", s.wk_tol, "sup-norm of the converged one-step change");
  f("weakkam", "scan_step", s.scan_step, "cohomology grid step");
  f("weakkam", "scan_half1", s.scan_half1, "scan half-width in c1, beyond the flat");
  f("weakkam", "scan_half2", s.scan_half2, "scan half-width in c2, beyond the flat");
  f("weakkam", "tol_flat", s.tol_flat, "flat = connected set with alpha <= min + tol_flat");

  f("annulus", "grid", s.an_grid, "nodes per axis for the coverage solves");
  f("annulus", "window", s.an_window, "stencil radius");
  f("annulus", "rays", s.an_rays, "uniform rays, flat vertex directions are added");
  f("annulus", "deltas", s.an_deltas, "levels alpha - min alpha sampled; want some Delta >= 3 epsilon^d");
  f("annulus", "s_hi", s.an_s_hi, "ray length searched for the level");
}

}  // namespace

TrigSeries parse_modes(const std::string& text) {
  TrigSeries s;
  std::istringstream all(text);
  std::string item;
  while (std::getline(all, item, ';')) {
    std::istringstream is(item);
    Mode m;
    if (!(is >> m.k1)) continue;  // empty item
    if (!(is >> m.k2 >> m.k3 >> m.a >> m.b)) throw Error(Module::config, "mode needs k1 k2 k3 a b: '" + item + "'");
    std::string rest;
    if (is >> rest) throw Error(Module::config, "trailing text in mode '" + item + "'");
    s.modes.push_back(m);
  }
  return s;
}

std::string modes_str(const TrigSeries& s) {
  std::ostringstream os;
  os.precision(12);
  for (size_t i = 0; i < s.modes.size(); ++i) {
    const auto& m = s.modes[i];
    os << (i ? "; " : "") << m.k1 << ' ' << m.k2 << ' ' << m.k3 << ' ' << m.a << ' ' << m.b;
  }
  return os.str();
}

MechanicalSystem Scenario::system() const {
  auto sys = uncoupled_pendulums(lambda1, lambda2);
  sys.Z3 = z3;
  sys.eps = eps;
  return sys;
}

TonelliLagrangian Scenario::lagrangian() const { return TonelliLagrangian::from_mechanical(system()); }

LaxOleinikParams Scenario::wk_params() const {
  LaxOleinikParams p;
  p.n = wk_grid;
  p.window = wk_window;
  p.margin = wk_margin;
  p.tol = wk_tol;
  return p;
}

LaxOleinikParams Scenario::annulus_params() const {
  auto p = wk_params();
  p.n = an_grid;
  p.window = an_window;
  return p;
}

AdmissibilityParams Scenario::admissibility() const {
  AdmissibilityParams p;
  p.sigma = sigma;
  p.r = r;
  p.xi = xi;
  p.m = sd_m;
  p.l = double(l);
  p.d_m = d_m;
  p.delta = delta;
  p.delta_plus = delta_plus;
  p.much_less = much_less;
  p.less_dot = less_dot;
  return p;
}

void Scenario::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw Error(Module::config, "invalid scenario: " + what);
  };
  need(l >= 2, "l >= 2");
  need(m_max >= 1 && m_max <= 12, "1 <= m_max <= 12");
  need(r > 0 && sigma > 0 && xi > 0, "r, sigma, xi positive");
  need(tau >= 0 && c0 > 0, "tau >= 0, c0 > 0");
  need(lambda1 > 0 && lambda2 > 0, "lambda1, lambda2 > 0");
  need(eps >= 0 && tail_eps > 0 && tail_eps < 1, "eps >= 0, 0 < tail_eps < 1");
  need(d > 0 && d < 1, "0 < d < 1");
  need(dt > 0 && dt <= 1e-2, "0 < dt <= 1e-2");
  need(!period_E.empty() && !section_E.empty(), "energy lists non-empty");
  for (double E : period_E) need(E > 0 && E <= 1e-2, "period energies in (0, 1e-2]");
  for (double E : section_E) need(E > 0 && E <= 1e-2, "section energies in (0, 1e-2]");
  need(melnikov_grid >= 5, "melnikov grid >= 5");
  need(melnikov_half > 0 && melnikov_half < 3, "0 < melnikov half < 3");
  need(critical_radius > 0 && critical_radius < 3, "0 < critical radius < 3");
  need(wk_grid >= 8 && an_grid >= 8, "weak KAM grids >= 8");
  need(wk_window >= 1 && an_window >= 1 && wk_margin >= 1, "window >= 1, margin >= 1");
  need(wk_tol > 0, "weak KAM tol > 0");
  need(scan_step > 0 && scan_half1 >= 2 * scan_step && scan_half2 >= 2 * scan_step, "scan step and half-widths");
  need(tol_flat > 0, "tol_flat > 0");
  need(an_rays >= 1 && !an_deltas.empty() && an_s_hi > 0, "annulus rays, deltas, s_hi");
  for (double D : an_deltas) need(D > 0, "annulus deltas positive");
  need(mu_iota >= 1 && u5_order >= 1, "mu_iota >= 1, u5_order >= 1");
  need(zeta > 0 && zeta < 1 && nu > 0 && nu < zeta, "0 < nu < zeta < 1");
  need(gronwall_samples >= 1 && sd_samples >= 1 && fourier_sequences >= 1 && fourier_count >= 1, "sample counts");
}

Scenario load_scenario(const std::string& path) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::read_ini(path, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(Module::config, "cannot read scenario '" + path + "': " + e.message());
  }
  Scenario s;
  std::set<std::string> known;
  visit(s, [&](const char* sec, const char* key, auto& field, const char*) {
    std::string full = std::string(sec) + "." + key;
    known.insert(full);
    if (auto v = pt.get_optional<std::string>(full)) parse(full, *v, field);
  });
  for (const auto& [sec, body] : pt) {
    if (body.empty() && !body.data().empty()) throw Error(Module::config, "key outside a section: " + sec);
    for (const auto& [key, val] : body)
      if (!known.count(sec + "." + key)) throw Error(Module::config, "unknown key " + sec + "." + key);
  }
  s.validate();
  return s;
}

std::string explain_scenario() {
  Scenario s;
  std::ostringstream os;
  std::string current;
  visit(s, [&](const char* sec, const char* key, auto& field, const char* note) {
    if (current != sec) {
      os << (current.empty() ? "" : "\n") << '[' << sec << "]\n";
      current = sec;
    }
    if (*note) os << "; " << note << '\n';
    os << key << " = " << show(field) << '\n';
  });
  return os.str();
}

}  // namespace dlab
