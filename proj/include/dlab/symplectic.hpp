#pragma once

#include <array>
#include <random>
#include <string>
#include <vector>

#include "dlab/common.hpp"
#include "dlab/system.hpp"
#include "dlab/trig.hpp"

namespace dlab {

using RatMat3 = std::array<std::array<Rat, 3>, 3>;

Rat det3(const RatMat3& M);
RatMat3 transpose3(const RatMat3& M);
RatMat3 inverse3(const RatMat3& M);  // throws on singular input
RatMat3 mul3(const RatMat3& A, const RatMat3& B);
bool is_identity(const RatMat3& M);
std::string mat_str(const RatMat3& M);

struct CanonicalChange {
  RatMat3 Xi, Xi_t, Xi_inv;
  std::array<Rat, 2> p_star{0, 0};
  std::array<Rat, 2> theta{1, 1};  // diagonal of the amplifying matrix
  bool two_resonant = true;
};

// rows (l^m, 0, -a), (0, mu iota, -mu c), (0, 0, 1/(mu iota l^m))
CanonicalChange build_xi_2res(const Int& lm, const Int& a, const Int& mu_iota, const Int& mu_c);
// rows (l^m, 0, -a), (0, l^m, 0), (0, 0, 1/l^{2m})
CanonicalChange build_xi_1res(const Int& lm, const Int& a);

// old (q1, q2, theta3, p1, p2, I) -> new (x1, x2, s, y1, y2, J); theta3 is the
// time angle. (x, s) = Xi (q, theta3), (p, I) = Xi^t (y, J) + (p*, 0).
using Point6 = std::array<double, 6>;
Point6 transform_coords(const CanonicalChange& C, const Point6& old_point);
Point6 inverse_coords(const CanonicalChange& C, const Point6& new_point);
// x1, x2 reduced to [0, 2 pi)
Point6 reduce_angles(const Point6& z);

// 6x6 Jacobian of the forward map, row-major
std::array<double, 36> jacobian(const CanonicalChange& C);
// sum dp_i ^ dq_i over the three conjugate pairs of a 6-vector ordered (angles, actions)
double two_form6(const Point6& u, const Point6& v);
// max |omega(Du, Dv) - factor omega(u, v)| / (|factor| |u| |v|) over random unit-box pairs
double two_form_defect(const std::array<double, 36>& D, double factor, int samples, std::mt19937_64& rng);

struct PulledBackQuadratic {
  Rat J_coefficient;             // coefficient of J
  std::array<Rat, 2> linear_y;   // gradient in y at y = 0
  std::array<Rat, 4> hessian_y;  // Theta D^2h Theta
};

// h(p) = 1/2 <p, A p> + <b, p> plus the action I, pulled back through C at p*
PulledBackQuadratic pull_back_quadratic(const CanonicalChange& C, const std::array<Rat, 4>& A,
                                        const std::array<Rat, 2>& b);

// Symmetric n-tensor on R^2, entries indexed by the bits of the index tuple.
struct Tensor2 {
  int order = 2;
  std::vector<double> v;  // size 2^order
  double at(const std::vector<int>& idx) const;
};

// D^n h'(0) = <Theta, D^n h(p*) Theta^t ... > : every slot scaled by theta
Tensor2 rescale_tensor(const std::array<double, 2>& theta, const Tensor2& T);

// The homogenization diagonal (x1, x2, s, y1, y2, J) = diag(...) (X1, X2, S, Y1, Y2, e)
struct HomogenizationScales {
  double lm = 1, mu_iota = 1, delta = 1;
  std::array<double, 6> diag() const;
};

struct HomogenizeInput {
  Mat2 A{1, 0, 0, 1};  // D^2 h(p*)
  Trig1 Z1;            // p*^sigma [f]_1 in x1
  Trig1 Z21;           // p*^sigma [f]_{2,1} in x2
  TrigSeries Z22;      // p*^sigma [f]_{2,2}
  double r = 8;
  double big_L = 1e3;
  // optional third derivative of h at p*; kept in the kinetic energy when asked
  std::array<double, 8> D3h{};
  bool keep_cubic = false;
};

struct HomogenizedSystem {
  MechanicalSystem sys;  // potential Z'(Theta X)/delta^2, kinetic 1/2 <Y, A Y>
  HomogenizationScales scales;
  double n1 = 0, n2 = 0, n3 = 0;  // C2 proxies of the normalized blocks Z~1, Z~2, Z~3
  double block_factor = 1;        // (l^m / mu iota)^{r+2}
  bool hardest = false;           // mu iota == l^m
  double cubic_term = 0;          // max over |Y| <= 1 of |delta/6 D3h(Y,Y,Y)|
  double z1_amplitude = 0;        // max |coefficient| of Z~1
  std::string warning;
};

HomogenizedSystem homogenize(const HomogenizeInput& in, const HomogenizationScales& sc);

// The resonant system before rescaling, written in its own time s:
// mu iota l^m (1/2 <y, Theta A Theta y> + Z'(x)). Used to cross-check the
// homogenization against an independent integration.
MechanicalSystem resonant_system(const HomogenizeInput& in, const HomogenizationScales& sc);
// (x, y) -> (X, Y) = (Theta^-1 x, Theta y / delta) and back
State to_homogenized(const State& xy, const HomogenizationScales& sc);
State from_homogenized(const State& XY, const HomogenizationScales& sc);

}  // namespace dlab
