#pragma once

#include <array>
#include <string>
#include <vector>

#include "dlab/common.hpp"

namespace dlab {

struct DiophantineVector {
  Rat w1, w2;  // kept exact; irrational inputs are rounded to 45 digits
  double tau = 1.0;
  double c0 = 1.0;
};

DiophantineVector make_diophantine(const std::string& w1, const std::string& w2, double tau, double c0);

struct DiophantineReport {
  double min_margin = 0;
  std::array<long, 2> worst_k{0, 0};
  bool pass = false;
};

// Scans 0 < |k| <= k_max (max-norm, one representative of each +-k pair).
DiophantineReport diophantine_check(const DiophantineVector& v, int k_max);

struct Lattice {
  std::vector<IVec3> basis;
  bool is_maximal = false;     // every basis vector primitive
  std::vector<Int> multipliers;  // gcds removed by maximal_reduce
};

struct PlanIndex {
  int m = 1;
  bool half = false;  // m + 1/2
};

struct ResonantPlan {
  long l = 10;
  Rat w1, w2;                // target frequency
  std::vector<Int> a, b;     // a[m-1], b[m-1] for m = 1..levels()
  // b_{m+1/2} = b_{m+1}; the medium point shares the first coordinate of w_m

  int levels() const { return int(a.size()); }
  Int scale(int m) const;  // l^m
  std::array<Rat, 2> point(int m) const;
  std::array<Rat, 2> half_point(int m) const;  // m in 1..levels()-1
  Int b_half(int m) const { return b[m]; }
  Rat dist2(int m) const;
  Rat half_dist2(int m) const;
  double dist(int m) const;
  double half_dist(int m) const;
};

ResonantPlan build_plan(const DiophantineVector& v, long l, int m_max);

Lattice lattice_for(const ResonantPlan& plan, PlanIndex which);
Lattice maximal_reduce(const Lattice& L);

// Integer lattice helpers.
Int gcd3(const IVec3& v);
IVec3 primitive(const IVec3& v);
Int dot(const IVec3& u, const IVec3& v);
IVec3 cross(const IVec3& u, const IVec3& v);
int rational_rank(const std::vector<IVec3>& vs);
// Z-basis of { x in Z^n : A x = 0 } for an integer matrix given by rows.
std::vector<std::vector<Int>> integer_kernel(const std::vector<std::vector<Int>>& rows, size_t ncols);
Lattice intersect(const Lattice& A, const Lattice& B);
// { k in Z^3 : <k, (w1, w2, 1)> = 0 } as a Z-basis of two primitive vectors.
Lattice resonance_lattice(const Rat& w1, const Rat& w2);
bool in_lattice(const Lattice& L, const IVec3& k);
// Smallest lattice in Z^3 containing L that is closed under division.
Lattice saturate(const Lattice& L);

Report verify_plan_properties(const ResonantPlan& plan);

Int subresonance_bound(long l, int m, double xi);  // floor(l^{m(1+xi)})

// Reduced fractions c/q with q <= D strictly between lo and hi (lo < hi).
std::vector<Rat> farey_interior(const Rat& lo, const Rat& hi, const Int& D, size_t max_count = 1000000);

// Sub-resonant points strictly inside the vertical segment from w_m to w_{m+1/2},
// sorted from w_m toward w_{m+1/2}.
std::vector<std::array<Rat, 2>> sub_resonances(const ResonantPlan& plan, int m, double xi);

std::string plan_csv(const ResonantPlan& plan);

}  // namespace dlab
