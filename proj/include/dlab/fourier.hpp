#pragma once

#include <array>
#include <map>
#include <random>
#include <string>

#include "dlab/common.hpp"
#include "dlab/grid.hpp"
#include "dlab/resonance.hpp"
#include "dlab/trig.hpp"

namespace dlab {

using K3 = std::array<long, 3>;

// a*cos(phase) + b*sin(phase), phase = k1 q1 + k2 q2 + 2 pi k3 t
struct Coef {
  double a = 0;
  double b = 0;
};

long max_norm(const K3& k);
IVec3 to_ivec(const K3& k);

// Real Fourier series on T^2 x S. Keys live in the lexicographically positive
// half-space (plus the origin), so each conjugate pair is stored once.
struct FourierSeq {
  std::map<K3, Coef> coeffs;
  int r = 8;
  double norm_cr = 1.0;

  // Adds a*cos + b*sin at k, folding -k onto the stored half.
  void add(const K3& k, double a, double b);
  Coef get(const K3& k) const;  // folded, zero if absent
  // |f_k| of the complex form; the two conjugate exponentials share it
  static double magnitude(const K3& k, const Coef& c);
  double decay_bound(const K3& k) const;  // (2 pi |k|)^{-r} * norm_cr
  // first coefficient breaking the declared decay, if any
  bool decay_ok(K3* bad = nullptr) const;
  void validate() const;                  // throws on decay violation
  double c2_mass(double K = 0) const;     // sum over |k| >= K of |k|^2 |f_k| over all of Z^3
  long max_k(int axis) const;
  void prune(double tol = 0.0);
  TrigSeries to_trig() const;
};

bool canonical_half(const K3& k);  // true if k is the stored representative

FourierSeq combine(double alpha, const FourierSeq& f, double beta, const FourierSeq& g);

FourierSeq pickup(const FourierSeq& f, const Lattice& L);
FourierSeq shear(const FourierSeq& f, const Lattice& L, double K);

struct Truncation {
  FourierSeq low;
  double tail_bound = 0;
  double discarded_c2 = 0;
};

Truncation truncate(const FourierSeq& f, double K);

// Sum over Z^3 \ {0} of |k|^{-4} with the max-norm, summed over shells to
// 10^4 plus an integral-test remainder. Upper bound.
double kappa3();
// count of k in Z^3 with |k| = n
long shell_count(long n);

GridFunction synthesize(const FourierSeq& f, std::array<int, 3> grid);
// Recovers coefficients with |k_i| <= kmax[i] from grid samples.
FourierSeq analyze(const GridFunction& g, std::array<long, 3> kmax, double drop_below = 1e-14);
double eval(const FourierSeq& f, double q1, double q2, double t);

struct ConditionReport {
  bool c1 = false, c2 = false, c2p = false;
  K3 c1_violator{0, 0, 0}, c2_violator{0, 0, 0}, c2p_violator{0, 0, 0};
  Int lambda = 1, mu = 1;
  Report report;
};

// mu = min { k > 0 : |k e2| > l^m }
Int c2prime_mu(const IVec3& e2, const Int& lm);

// L is the resonance lattice, Lmax its maximal reduction (multiplier of the
// first vector is lambda). mu <= 0 asks for the C2' value.
ConditionReport check_conditions(const FourierSeq& f, const Lattice& L, const Lattice& Lmax, int m, long l,
                                 long mu = 0);

FourierSeq random_admissible(std::mt19937_64& rng, int count, long kmax, int r, double norm_cr);

std::string to_text(const FourierSeq& f);
FourierSeq from_text(const std::string& text);

}  // namespace dlab
