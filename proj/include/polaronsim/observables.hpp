#pragma once

// Scalar and distributional observables: occupations, equal-time phonon
// statistics, the Wigner map of the mechanical mode, and the exponential
// cooling fit extracting an effective rate and asymptotic occupation.

#include <optional>
#include <string>
#include <vector>

#include "polaronsim/lindblad.hpp"

namespace polaronsim {

// Normalized second factorial moment <b†b†bb>/<b†b>² of the mechanical mode.
// Accepts either the full tripartite state (reduced internally) or an
// already-reduced single-mode state. Throws Error(undefined_statistic) when
// the occupation sits below `floor` (the vacuum limit is a genuine 0/0).
double g2_phonon(const DensityMatrix& rho, double floor = 1e-8);

struct WignerMap {
  std::vector<double> x_grid;  // dimensionless quadratures, x = √2 Re α
  std::vector<double> p_grid;  //                            p = √2 Im α
  Eigen::MatrixXd values;      // values(i, j) = W(x_grid[i], p_grid[j])
  double min_value = 0.0;
  double integral = 0.0;       // trapezoidal ∫∫ W dx dp, 1 for a good grid
  double imag_residual = 0.0;  // largest imaginary part before discarding
  bool accuracy_warning = false;  // |integral - 1| > 5e-2: grid too coarse
};

// Displaced-parity evaluation W(x,p) = (1/π)·Tr[ρ D(α) Π D(-α)] with the
// displacement built from the truncated mode operators. `rho_mech` must be a
// single-mode state (one entry in dims()).
WignerMap wigner(const DensityMatrix& rho_mech,
                 const std::vector<double>& x_grid,
                 const std::vector<double>& p_grid);

// 81 x 81 over [-4.5, 4.5]²; covers ≥ 5 standard deviations for all shipped
// scenarios.
WignerMap wigner_default(const DensityMatrix& rho_mech);

std::vector<double> linear_grid(double lo, double hi, int points);

struct CoolingFit {
  double gamma_eff = 0.0;
  double n_min = 0.0;
  double t0 = 0.0;       // fit window start (after the photon transient)
  double t_end = 0.0;    // fit window end (last trajectory point)
  double residual = 0.0; // root-mean-square misfit over the window
};

// Least-squares fit of phonon_number(t) = n_min + (n(t0) - n_min)
// e^{-γ(t-t0)}, with t0 the first time the photon number has settled within
// 5% of its final value. Rising series (amplification) are rejected with
// Error(unsupported_regime): steady-state analysis applies there instead.
CoolingFit fit_cooling(const Trajectory& traj);

struct ScalarObservables {
  double phonon_number = 0.0;
  double photon_number = 0.0;
  double atom_excitation = 0.0;
  std::optional<double> g2_phonon;  // empty below the occupation floor
  std::vector<double> polariton_block_populations;  // index = N, 0..cav_dim
};

// Named scalars of a full tripartite state.
ScalarObservables scalar_observables(const DensityMatrix& rho,
                                     const HilbertSpace& space);

}  // namespace polaronsim
