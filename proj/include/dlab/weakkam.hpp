#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dlab/action.hpp"
#include "dlab/common.hpp"
#include "dlab/grid.hpp"
#include "dlab/system.hpp"

namespace dlab {

// L(x, v) = 1/2 <v, K v> + <b, v> + U(x) on T^1 (dim 1, second coordinates ignored) or T^2.
struct TonelliLagrangian {
  int dim = 2;
  Mat2 K{1, 0, 0, 1};
  Vec2 b{0, 0};
  std::function<double(double, double)> U;

  double operator()(Vec2 x, Vec2 v) const;
  // H(x, p) = 1/2 <p - b, K^-1 (p - b)> - U(x)
  double hamiltonian(Vec2 x, Vec2 p) const;
  Mat2 Kinv() const;
  // positive definiteness of K, finite U at sample points
  void validate() const;

  // Legendre dual of a mechanical Hamiltonian 1/2 <Y, A Y> + <drift, Y> + V(X)
  static TonelliLagrangian from_mechanical(const MechanicalSystem& sys);
  // 1/2 v^2 + lambda (1 - cos x)
  static TonelliLagrangian pendulum(double lambda = 1);
  static TonelliLagrangian free(int dim);
};

struct LaxOleinikParams {
  int n = 128;            // grid points per axis
  int window = 32;        // stencil radius in cells along the fastest axis
  double margin = 4;      // stencil radius >= margin x speed bound x t
  double tol = 1e-8;      // sup-norm of the renormalized one-step change
  int max_iter = 20000;
  int retries = 3;        // window enlargements before giving up
  bool parallel = true;
};

// Discrete backward Lax-Oleinik operator for L_c = L - <c, v> with time step t:
//   T u(x) = min_d [ u(x - w_d t) + t L_c(x - w_d t / 2, w_d) ],
// a min-plus map over grid displacements. The velocities w_d = (m + d) h / t are centred
// at the lattice point m nearest the free optimum v0 = -K^-1 (b - c). Feet stay on the
// grid: interpolating u at off-grid feet undercuts its concave kinks and drives alpha
// below the flat. The midpoint potential lives on the half-spaced grid, precomputed.
class LaxOleinik {
 public:
  // reversed = true gives the operator of L(x, -v) at cohomology -c
  LaxOleinik(const TonelliLagrangian& L, Vec2 c, const LaxOleinikParams& p, bool reversed = false);

  GridFunction step(const GridFunction& u, bool parallel = true) const;
  GridFunction step_serial(const GridFunction& u) const { return step(u, false); }
  // fraction of nodes whose minimizer sits on the outer ring of the stencil, from the
  // last step taken with tracking on
  double boundary_hits() const { return boundary_hits_; }
  void track_boundary(bool on) { track_boundary_ = on; }
  void enlarge(double factor);

  GridFunction zero() const;
  double t_step() const { return t_; }
  std::array<int, 2> window() const { return {W_[0], W_[1]}; }
  const std::array<int, 2>& dims() const { return n_; }
  const std::array<double, 2>& spacing() const { return h_; }
  Vec2 center_velocity() const { return v0_; }

 private:
  void build_stencil();

  TonelliLagrangian L_;
  Vec2 beta_{0, 0};  // net linear coefficient b - c
  Vec2 v0_{0, 0};
  std::array<int, 2> n_{1, 1};
  std::array<double, 2> h_{1, 1};
  std::array<int, 2> W_{0, 0};
  std::array<int, 2> m_{0, 0};  // v0 t / h rounded
  double t_ = 1;
  std::vector<double> Uhalf_;  // t U on the half grid
  struct Row {
    int d1, w;
    size_t off;  // into kin_ and ring_
  };
  std::vector<Row> rows_;
  std::vector<double> kin_;  // t (1/2 <w, K w> + <b - c, w>)
  std::vector<char> ring_;
  bool track_boundary_ = false;
  mutable double boundary_hits_ = 0;
};

// one step with a fresh operator
GridFunction lax_oleinik_step(const GridFunction& u, const TonelliLagrangian& L, Vec2 c,
                              const LaxOleinikParams& p = {});

struct WeakKamResult {
  GridFunction u_minus, u_plus;  // u_minus normalized to min 0
  Vec2 c{0, 0};
  double alpha = 0;       // from the backward iteration
  double alpha_plus = 0;  // same value from the reversed iteration
  int iterations = 0;
  double residual = 0;       // last sup-norm change of the renormalized iterate
  double hj_residual = 0;    // mean |H(x, c + du) - alpha| on nodes where u is differentiable
  double hj_max = 0;
  double differentiable = 0; // fraction of such nodes
  double semiconcavity = 0;  // max (u(x+h) + u(x-h) - 2 u(x)) / h^2
  double t_step = 0;
  std::array<int, 2> window{0, 0};
  Report report;
};

// Iterates the operator from `warm` (or 0) until converged; with_plus = false skips u_plus.
WeakKamResult weak_kam_solve(const TonelliLagrangian& L, Vec2 c, const LaxOleinikParams& p = {},
                             const GridFunction* warm = nullptr, bool with_plus = true);

// B = u_minus - u_plus shifted so min B = 0
GridFunction barrier(const GridFunction& u_minus, const GridFunction& u_plus);
GridFunction barrier(const WeakKamResult& r);

struct Interval {
  double lo = 0, hi = 0;  // on the loop coordinate, hi may exceed 2 pi when wrapping
};

struct ManeEstimate {
  GridFunction mask;  // 1 where B <= threshold
  double threshold = 0;
  double coverage = 0;
  std::vector<Interval> intervals;  // masked set on the loop x_axis = const
};

// loop: the closed curve where coordinate `axis` equals grid index `index`, parametrized
// by the other coordinate (for dim 1 the whole circle)
ManeEstimate mane_set_estimate(const GridFunction& B, double threshold, int axis = 0, int index = 0);
// default threshold: 3 times the discrete H-J residual
ManeEstimate mane_set_estimate(const WeakKamResult& r);

struct AlphaScan {
  std::vector<double> c1, c2;  // c2 = {0} for dim 1
  GridFunction alpha;          // over (c1, c2)
  double alpha_min = 0;
  Vec2 argmin{0, 0};
  int convexity_violations = 0;
  double worst_convexity = 0;
  GridFunction flat;  // 1 on the connected flat region
  double tol_flat = 0;
  // dim 2: support values in the eight admissible directions, polygon and symmetry defect
  std::vector<FlatEdge> edges;
  FlatPolygon polygon;
  double symmetry_defect = 0;
  // dim 1: flat interval
  double flat_lo = 0, flat_hi = 0;
  Report report;
};

AlphaScan alpha_scan(const TonelliLagrangian& L, const std::vector<double>& c1, const std::vector<double>& c2,
                     double tol_flat, const LaxOleinikParams& p = {});

// alpha(center + s dir) along a ray, from a fresh or warm solve
double alpha_at(const TonelliLagrangian& L, Vec2 c, const LaxOleinikParams& p, GridFunction* warm = nullptr);

// s in [0, s_hi] with alpha(center + s dir) - base = level: bisection while the lower end
// is on the flat, Illinois regula falsi after; stops when the level is met to rel_tol or
// the bracket is shorter than s_tol. A known point below the level (s_lo) shortens the search.
struct RayRoot {
  bool ok = false;
  double s = 0;
  double value = 0;
  int solves = 0;
};
RayRoot ray_level(const TonelliLagrangian& L, Vec2 center, Vec2 dir, double base, double level, double s_hi,
                  const LaxOleinikParams& p, double rel_tol = 0.05, double s_tol = 1e-4, double s_lo = 0);

struct AnnulusSample {
  double Delta = 0;
  double theta = 0;
  Vec2 c{0, 0};
  double coverage = 0;
  double threshold = 0;
  bool ok = false;  // root found
};

struct AnnulusReport {
  std::vector<AnnulusSample> samples;
  int excluded = 0;
  double verified_Delta0 = 0;  // largest Delta with coverage < 1 on it and on every smaller Delta
  double wedge_reach = 0;      // 3 eps^d
  Report report;
  std::string csv() const;  // Delta,theta,c1,c2,coverage,threshold,ok
};

// rays at the angles `thetas` from `center`
AnnulusReport annulus_diagnostic(const TonelliLagrangian& L, Vec2 center, double alpha_min,
                                 const std::vector<double>& Delta_list, const std::vector<double>& thetas,
                                 double eps, double d, double s_hi, const LaxOleinikParams& p);
// uniform angles plus the directions of the polygon vertices seen from their centroid
std::vector<double> annulus_rays(int uniform, const FlatPolygon& flat);

}  // namespace dlab
