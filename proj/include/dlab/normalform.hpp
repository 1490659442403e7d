#pragma once

#include <cstdint>
#include <functional>

#include "dlab/fourier.hpp"
#include "dlab/trig.hpp"

namespace dlab {

// <k, (w1, w2, 1)> == 0 in exact arithmetic
bool is_resonant(const K3& k, const Rat& w1, const Rat& w2);
Rat pairing(const K3& k, const Rat& w1, const Rat& w2);

// lcm of the denominators of w1 and w2
Int period_tstar(const Rat& w1, const Rat& w2);
inline Int period_tstar(const Int& lm, const Int& iota) { return lcm(lm, iota); }

FourierSeq resonant_average(const FourierSeq& f, const Rat& w1, const Rat& w2);

// Time average (1/T*) int_0^T* f(q + 2 pi w* t, t) dt by the trapezoid rule,
// which is exact for trigonometric polynomials once n exceeds the top frequency.
double time_average(const FourierSeq& f, const Rat& w1, const Rat& w2, double q1, double q2, double t0, int n = 0);

enum class ResonantModes { absorb, reject };

// W with d/dt W(q + 2 pi w t, t) = f - Z on |k| <= K. Resonant modes are the
// average Z and are skipped, unless `reject` asks for a hard error.
FourierSeq solve_cohomological(const FourierSeq& f, const Rat& w1, const Rat& w2, double K,
                               ResonantModes mode = ResonantModes::absorb);

// max over a grid of |d_w W - (T_K f - Z)|
double cohomological_residual(const FourierSeq& W, const FourierSeq& f, const Rat& w1, const Rat& w2, double K,
                              int n = 64);

// sum |k| * hypot(a, b): coefficient proxy for the size of W_q
double drift_proxy(const FourierSeq& W);

struct SegmentSpec {
  long l = 10;
  int m = 2;
  Int a;          // first coordinate a / l^m
  Rat y_lo, y_hi; // the segment's second coordinate range
};

struct SmallDenominatorResult {
  double alpha = 0;        // formula value
  double measured_min = 0; // over sampled frequencies and admissible k
  K3 worst_k{0, 0, 0};
  double worst_x = 0, worst_y = 0;
  long cutoff = 0;         // floor(l^{m(1+xi)})
  int samples = 0;
  int excluded_points = 0; // sub-resonant centres cut out of the tube
  bool admissible = false; // alpha > 0
  bool pass = false;       // measured_min >= alpha
};

double small_denominator_alpha(long l, int m, double a, double delta, double delta_plus, double xi);

// Samples w in the delta-tube around the segment minus the delta_plus balls
// around every sub-resonant point with |k| <= l^{m(1+xi)}, and measures
// min |<k, w~>| over k not parallel to e1 = (l^m, 0, -a).
SmallDenominatorResult small_denominator_margin(const SegmentSpec& seg, double delta, double delta_plus, double xi,
                                                int samples = 400, std::uint64_t seed = 1);

struct AdmissibilityParams {
  double sigma = 70, r = 8, xi = 4.5;
  int m = 2;
  double l = 10;
  double d_m = 5e-3;
  double delta = 1e-70, delta_plus = 1e-40;
  double much_less = 100;  // factor for <<
  double less_dot = 1;     // factor for the dotted <
};

double inf_delta_plus_exponent(double sigma, double r, double xi);
Report admissibility_report(const AdmissibilityParams& p);

struct ZSplit {
  TrigSeries Z1, Z21, Z22;  // in x1 = <g1, theta>, x2 = <g2, theta>
  FourierSeq Z1k, Z21k, Z22k;
};

// g1 = lambda e1, g2 = mu e2. Every coefficient must sit on span_Z{g1, g2}.
ZSplit split_Z(const FourierSeq& Z, const IVec3& g1, const IVec3& g2);
Trig1 as_trig1_x1(const TrigSeries& s);
Trig1 as_trig1_x2(const TrigSeries& s);

struct UConstants {
  double c4 = 1, c5 = 2, c6 = 0.5;
  double big_L = 1e3;  // L in U4
  double eta = 0;
};

Report check_U1_U2(const Trig1& Z1, double d_m, double sigma, int m, double l, double r, const UConstants& c);
Report check_U3(const Trig1& Z21, const Trig1& Z1, double d_star, double sigma, double mu_iota, double r,
                const UConstants& c);
Report check_U4(const TrigSeries& Z22, double l, int m, double r, const UConstants& c);

// Keeps the modes of Z2(x1, x2) with no x2 dependence.
TrigSeries second_average(const TrigSeries& Z2, const Rat& omega2);
double second_average_quadrature(const TrigSeries& Z2, const Rat& omega2, double x1, double x2, int n = 0);

struct BifurcationReport {
  int samples = 0;
  int max_count = 0;          // largest number of global maximizers seen
  int two_max_samples = 0;
  int longest_two_max_run = 0;
  int branch_switches = 0;
  double min_curvature = 0;   // min |F''| at maximizers
  Report report;
};

BifurcationReport check_bifurcation(const std::function<Trig1(double)>& family, double lam0, double lam1, int steps);

struct NormalFormParams {
  double K = 0;         // cutoff l^{m(1+xi)}
  double d_m = 5e-3;
  double sigma = 70;
  double alpha = 1e-3;  // small-denominator margin
};

struct ResonantNormalForm {
  Rat w1, w2;
  Int t_star;
  FourierSeq Z, W;
  // log10 of the C^2 bounds of the two remainders, of d^sigma C2(Z) and of
  // d^sigma times the drift proxy of W
  double log10_R1 = 0, log10_R2 = 0, log10_Z = 0, log10_drift = 0;
};

ResonantNormalForm one_step_normal_form(const FourierSeq& f, const Rat& w1, const Rat& w2, const NormalFormParams& p);

}  // namespace dlab
