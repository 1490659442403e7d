#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dlab/action.hpp"

namespace dlab {

namespace {

constexpr double kPi = std::numbers::pi;

double coth(double x) { return 1 / std::tanh(x); }

// int_a^b f over `panels` equal Gauss-Legendre panels
template <class F>
double gl_composite(F&& f, double a, double b, int panels) {
  using Q = boost::math::quadrature::gauss<double, 15>;
  double h = (b - a) / panels, s = 0;
  for (int k = 0; k < panels; ++k) s += Q::integrate(f, a + k * h, a + (k + 1) * h);
  return s;
}

// coefficients of X = p e^{l t} + q e^{-l t} through a at t = 0 and b at t = T, written
// to stay finite for large l T: returns (p e^{l t}, q e^{-l t})
std::pair<double, double> branches(double l, double a, double b, double T, double t) {
  double d = 1 - std::exp(-2 * l * T);
  double up = (b * std::exp(-l * (T - t)) - a * std::exp(-l * (2 * T - t))) / d;
  double dn = (a * std::exp(-l * t) - b * std::exp(-l * (T + t))) / d;
  return {up, dn};
}

int panels_for(double l, double T) { return std::max(4, int(std::ceil(l * T / 0.25))); }

}  // namespace

void CornerActionInput::validate() const {
  if (!(lambda1 > 0) || !(lambda2 > 0)) throw Error(Module::action, "rates must be positive");
  if (!(T > 0)) throw Error(Module::action, "transit time T must be positive");
  if ((X1pt[0] == 0 && X1pt[1] == 0) || (X2pt[0] == 0 && X2pt[1] == 0))
    throw Error(Module::action, "boundary points must be nonzero");
}

double through_action(const CornerActionInput& in) {
  in.validate();
  double l[2] = {in.lambda1, in.lambda2}, s = 0;
  for (int i = 0; i < 2; ++i) {
    double a = in.X1pt[i], b = in.X2pt[i], x = l[i] * in.T;
    s += ((a * a + b * b) * coth(x) - 2 * a * b / std::sinh(x)) / 2;
  }
  return s;
}

double through_action_displayed(const CornerActionInput& in) {
  in.validate();
  double n1 = in.X1pt[0] * in.X1pt[0] + in.X1pt[1] * in.X1pt[1];
  double n2 = in.X2pt[0] * in.X2pt[0] + in.X2pt[1] * in.X2pt[1];
  return n1 / 2 * coth(in.lambda1 * in.T) + n2 / 2 * coth(in.lambda2 * in.T);
}

double broken_action(const CornerActionInput& in) {
  in.validate();
  double n1 = in.X1pt[0] * in.X1pt[0] + in.X1pt[1] * in.X1pt[1];
  double n2 = in.X2pt[0] * in.X2pt[0] + in.X2pt[1] * in.X2pt[1];
  return n1 / 2 + n2 / 2;
}

double through_minus_broken(const CornerActionInput& in) {
  in.validate();
  double l[2] = {in.lambda1, in.lambda2}, s = 0;
  for (int i = 0; i < 2; ++i) {
    double a = in.X1pt[i], b = in.X2pt[i], x = l[i] * in.T;
    s += (a * a + b * b) / std::expm1(2 * x) - a * b / std::sinh(x);
  }
  return s;
}

double through_action_quadrature(const CornerActionInput& in) {
  in.validate();
  double l[2] = {in.lambda1, in.lambda2}, s = 0;
  for (int i = 0; i < 2; ++i) {
    double a = in.X1pt[i], b = in.X2pt[i], li = l[i];
    // (V^2 + l^2 X^2) / (2 l) with V = l (p - q), X = p + q
    auto f = [&](double t) {
      auto [p, q] = branches(li, a, b, in.T, t);
      double X = p + q, V = li * (p - q);
      return (V * V + li * li * X * X) / (2 * li);
    };
    s += gl_composite(f, 0, in.T, panels_for(li, in.T));
  }
  return s;
}

double broken_action_quadrature(const CornerActionInput& in) {
  in.validate();
  double l[2] = {in.lambda1, in.lambda2}, s = 0;
  for (int i = 0; i < 2; ++i) {
    double li = l[i], t_end = 40 / li;
    for (double c : {in.X1pt[i], in.X2pt[i]}) {
      // I: X = c e^{-l t}, V = -l X on [0, inf); II is its time reverse with the same action
      auto f = [&](double t) {
        double X = c * std::exp(-li * t), V = -li * X;
        return (V * V + li * li * X * X) / (2 * li);
      };
      s += gl_composite(f, 0, t_end, panels_for(li, t_end));
    }
  }
  return s;
}

double through_boundary_error(const CornerActionInput& in) {
  in.validate();
  double l[2] = {in.lambda1, in.lambda2}, e = 0;
  for (int i = 0; i < 2; ++i) {
    auto [p0, q0] = branches(l[i], in.X1pt[i], in.X2pt[i], in.T, 0);
    auto [p1, q1] = branches(l[i], in.X1pt[i], in.X2pt[i], in.T, in.T);
    e = std::max({e, std::abs(p0 + q0 - in.X1pt[i]), std::abs(p1 + q1 - in.X2pt[i])});
  }
  return e;
}

bool admissible_class(const HClass& g) {
  return std::abs(g[0]) <= 1 && std::abs(g[1]) <= 1 && (g[0] != 0 || g[1] != 0);
}

std::vector<HClass> decompose_homology(const HClass& n) {
  if (n[0] == 0 && n[1] == 0) throw Error(Module::action, "the zero class has no decomposition");
  std::vector<HClass> out;
  HClass r = n;
  auto sgn = [](int v) { return (v > 0) - (v < 0); };
  // peel a diagonal class while both entries are nonzero, then axis classes
  while (r[0] != 0 || r[1] != 0) {
    HClass s{sgn(r[0]), sgn(r[1])};
    out.push_back(s);
    r = {r[0] - s[0], r[1] - s[1]};
  }
  return out;
}

namespace {

double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }

std::vector<Vec2> clip(const std::vector<Vec2>& poly, const Vec2& n, double c) {
  std::vector<Vec2> out;
  size_t m = poly.size();
  for (size_t k = 0; k < m; ++k) {
    const Vec2& P = poly[k];
    const Vec2& Q = poly[(k + 1) % m];
    double fp = dot(n, P) - c, fq = dot(n, Q) - c;
    if (fp <= 0) out.push_back(P);
    if ((fp < 0 && fq > 0) || (fp > 0 && fq < 0)) {
      double t = fp / (fp - fq);
      out.push_back({P[0] + t * (Q[0] - P[0]), P[1] + t * (Q[1] - P[1])});
    }
  }
  return out;
}

}  // namespace

FlatPolygon flat_polygon(const std::vector<FlatEdge>& edges, double tol) {
  if (edges.empty()) throw Error(Module::action, "flat needs at least one edge");
  double scale = 0;
  for (const auto& e : edges) {
    if (!admissible_class(e.g)) {
      std::ostringstream os;
      os << "class (" << e.g[0] << ", " << e.g[1] << ") is not one of the eight admissible classes";
      throw Error(Module::action, os.str());
    }
    if (!(e.c_g > 0)) throw Error(Module::action, "critical values must be positive");
    scale = std::max(scale, e.c_g);
  }
  for (const auto& e : edges) {
    bool found = false;
    for (const auto& f : edges)
      if (f.g[0] == -e.g[0] && f.g[1] == -e.g[1] && std::abs(f.c_g - e.c_g) <= tol * scale) found = true;
    if (!found) {
      std::ostringstream os;
      os << "asymmetric flat input: class (" << e.g[0] << ", " << e.g[1] << ") has no matching opposite edge";
      throw Error(Module::action, os.str());
    }
  }
  double R = 100 * scale;
  std::vector<Vec2> poly{{-R, -R}, {R, -R}, {R, R}, {-R, R}};
  for (const auto& e : edges) {
    double n = std::hypot(double(e.g[0]), double(e.g[1]));
    poly = clip(poly, {e.g[0] / n, e.g[1] / n}, e.c_g);
  }
  for (const auto& v : poly)
    if (std::max(std::abs(v[0]), std::abs(v[1])) >= R * (1 - 1e-12))
      throw Error(Module::action, "flat is unbounded: the active classes do not span the plane");
  // drop repeated and collinear vertices
  double eps = tol * scale;
  auto cleanup = [&](std::vector<Vec2> p) {
    bool changed = true;
    while (changed && p.size() > 2) {
      changed = false;
      for (size_t k = 0; k < p.size(); ++k) {
        const Vec2& A = p[(k + p.size() - 1) % p.size()];
        const Vec2& B = p[k];
        const Vec2& C = p[(k + 1) % p.size()];
        double cross = (B[0] - A[0]) * (C[1] - B[1]) - (B[1] - A[1]) * (C[0] - B[0]);
        if (std::hypot(B[0] - A[0], B[1] - A[1]) <= eps || std::abs(cross) <= eps * scale) {
          p.erase(p.begin() + long(k));
          changed = true;
          break;
        }
      }
    }
    return p;
  };
  FlatPolygon out;
  out.vertices = cleanup(poly);
  size_t m = out.vertices.size();
  switch (m) {
    case 4: out.kind = "rectangle"; break;
    case 6: out.kind = "hexagon"; break;
    case 8: out.kind = "octagon"; break;
    default: {
      std::ostringstream os;
      os << "flat polygon with " << m << " vertices";
      throw Error(Module::action, os.str());
    }
  }
  bool convex = true;
  for (size_t k = 0; k < m; ++k) {
    const Vec2& A = out.vertices[k];
    const Vec2& B = out.vertices[(k + 1) % m];
    const Vec2& C = out.vertices[(k + 2) % m];
    if ((B[0] - A[0]) * (C[1] - B[1]) - (B[1] - A[1]) * (C[0] - B[0]) <= 0) convex = false;
    // class whose unit normal is the outward normal of this edge
    Vec2 nrm{B[1] - A[1], A[0] - B[0]};
    double nn = std::hypot(nrm[0], nrm[1]);
    double best = -2;
    const FlatEdge* pick = nullptr;
    for (const auto& e : edges) {
      double gn = std::hypot(double(e.g[0]), double(e.g[1]));
      double cosang = (e.g[0] * nrm[0] + e.g[1] * nrm[1]) / (gn * nn);
      if (cosang > best) {
        best = cosang;
        pick = &e;
      }
    }
    out.edge_class.push_back(pick->g);
    double gn = std::hypot(double(pick->g[0]), double(pick->g[1]));
    Vec2 gh{pick->g[0] / gn, pick->g[1] / gn};
    out.edge_defect = std::max({out.edge_defect, std::abs(dot(gh, A) - pick->c_g), std::abs(dot(gh, B) - pick->c_g)});
  }
  for (const auto& v : out.vertices) {
    double d = 1e300;
    for (const auto& w : out.vertices) d = std::min(d, std::hypot(v[0] + w[0], v[1] + w[1]));
    out.symmetry_defect = std::max(out.symmetry_defect, d);
  }
  auto& r = out.report;
  r.title = "flat polygon";
  r.flag("vertex_count_admissible", true, double(m), out.kind);
  r.flag("convex", convex);
  r.le("edge_on_class_line", out.edge_defect, 1e3 * eps);
  r.le("central_symmetry", out.symmetry_defect, 1e3 * eps);
  return out;
}

std::string FlatPolygon::csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "x,y\n";
  for (const auto& v : vertices) os << v[0] << ',' << v[1] << '\n';
  return os.str();
}

Vec2 FlatPolygon::centroid() const {
  Vec2 g{0, 0};
  for (const auto& v : vertices) {
    g[0] += v[0] / vertices.size();
    g[1] += v[1] / vertices.size();
  }
  return g;
}

double separatrix_c_value(const Trig1& Z, double a) {
  if (!(a > 0)) throw Error(Module::action, "kinetic coefficient must be positive");
  double scale = 1 + Z.c2_proxy(), top = -1e300;
  for (int i = 0; i < 4096; ++i) {
    double x = 2 * kPi * i / 4096, v = Z.value(x);
    top = std::max(top, v);
    if (v > 1e-12 * scale) {
      std::ostringstream os;
      os << "potential is positive at x = " << x << " (" << v << ")";
      throw Error(Module::action, os.str());
    }
  }
  if (top < -1e-9 * scale) throw Error(Module::action, "potential maximum must be normalized to 0");
  auto f = [&](double x) { return std::sqrt(std::max(0.0, -2 * Z.value(x) / a)); };
  double I = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0, 2 * kPi, 15, 1e-14);
  return I / (2 * kPi);
}

}  // namespace dlab
