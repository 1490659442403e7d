#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dlab/dynamics.hpp"
#include "dlab/normalform.hpp"
#include "dlab/system.hpp"
#include "dlab/weakkam.hpp"

namespace dlab {

// Everything a run needs, read from an INI file. Unknown keys are rejected.
struct Scenario {
  std::string name = "default";
  std::uint64_t seed = 1;

  // frequency
  std::string w1 = "sqrt(2)-1", w2 = "sqrt(3)-1";
  double tau = 1, c0 = 0.005;
  int diophantine_kmax = 2000;

  // plan and indices
  long l = 10;
  int m_max = 6;
  double xi = 4.5, r = 8, sigma = 70;

  // small-denominator desk instance on one segment
  int sd_m = 2;
  long sd_a = 41;
  std::string sd_y_lo = "0.73", sd_y_hi = "0.732";
  double sd_xi = 0.3, sd_delta = 1e-12, sd_delta_plus = 2e-6;
  int sd_samples = 400;

  // random admissible Fourier data
  int fourier_sequences = 100, fourier_count = 200;
  long fourier_kmax = 60;
  double fourier_norm = 1;

  // normal form
  double d_m = 5e-3, delta = 1e-70, delta_plus = 1e-40;
  double much_less = 100, less_dot = 1;

  // potential of the homogenized system
  double lambda1 = 4, lambda2 = 1;
  double eps = 0;
  TrigSeries z3{{{1, -1, 0, 0.5, 0}, {1, 1, 0, -0.5, 0}, {1, -2, 0, -0.25, 0}, {1, 2, 0, 0.25, 0}}};  // sin X1 sin X2 (1 - cos X2)
  double tail_eps = 1e-6;  // the tiny tail amplitude, epsilon in 3 eps^d
  TrigSeries tail{{{1, 1, 1, 1, 0}, {0, 1, 2, 0, 1}}};
  double d = 0.3;
  bool keep_cubic = false;

  // constants
  UConstants uc;
  double c8 = 0, c9 = 0;
  double mu_iota = 50;  // second-block period of the constructed instance
  int u5_order = 4;
  double zeta = 0.2, nu = 0.1;

  // dynamics
  double dt = 1e-3;
  std::vector<double> period_E{1e-6, 3.16e-6, 1e-5, 3.16e-5, 1e-4, 3.16e-4, 1e-3};
  std::vector<double> section_E{1e-8, 1e-7, 1e-6, 1e-5};
  int gronwall_samples = 200;

  // Melnikov
  int melnikov_grid = 41;
  double melnikov_half = 0.6, critical_radius = 0.5;

  // weak KAM
  int wk_grid = 32, wk_window = 8;
  double wk_margin = 2, wk_tol = 1e-7;
  double scan_step = 0.3, scan_half1 = 3.3, scan_half2 = 2.1, tol_flat = 1e-3;

  // annulus
  int an_grid = 48, an_window = 12, an_rays = 8;
  std::vector<double> an_deltas{0.025, 0.05};
  double an_s_hi = 4;

  MechanicalSystem system() const;
  TonelliLagrangian lagrangian() const;
  LaxOleinikParams wk_params() const;
  LaxOleinikParams annulus_params() const;
  AdmissibilityParams admissibility() const;
  void validate() const;
};

// throws Error(config) on a missing file, a malformed value or an unknown key
Scenario load_scenario(const std::string& path);
// every key with its default and the inequality it has to satisfy
std::string explain_scenario();

// "k1 k2 k3 a b; ..." both ways
TrigSeries parse_modes(const std::string& text);
std::string modes_str(const TrigSeries& s);

}  // namespace dlab
