#pragma once

// Hamiltonians of the driven atom-cavity-mechanics system, the polariton
// block eigensystem with ladder labeling, closed-form polaron energies,
// and the weak-drive joint spectral density.

#include <vector>

#include "polaronsim/hilbert.hpp"

namespace polaronsim {

// All frequencies and rates share one unit system (the mechanical frequency
// is the natural scale). Dissipative rates may be given directly or via
// quality factors at the config layer; this struct stores resolved rates.
struct ModelParams {
  double omega_m = 1.0;    // mechanical frequency
  double omega_c = 100.0;  // cavity frequency
  double omega_a = 100.0;  // atomic transition frequency
  double g_ac = 0.5;       // atom-cavity coupling
  double g_cm = 0.1;       // cavity-mechanics coupling
  double gamma_ac = 1e-2;  // shared atom and cavity decay rate
  double gamma_m = 1e-4;   // mechanical decay rate
  double n_th = 3.45;      // mechanical bath occupation
  double F_p = 1e-2;       // coherent drive amplitude
  double omega_p = 99.5;   // drive frequency (rotating frame)
  double F_inc = 0.0;      // incoherent polariton pump rate

  void validate() const;
  bool resonant(double tol = 1e-9) const;  // |omega_c - omega_a| <= tol*omega_c

  // Bare n = 1 polariton lines omega_c -/+ g_ac used as drive anchors.
  double lower_polariton() const { return omega_c - g_ac; }
  double upper_polariton() const { return omega_c + g_ac; }
};

// Lab-frame Hamiltonian:
//   omega_c a†a + omega_a σ+σ- + omega_m b†b
//   + i g_ac (σ+ a - σ- a†) - g_cm a†a (b + b†)
Operator hamiltonian(const ModelParams& p, const HilbertSpace& space);

// Frame rotating at the drive frequency, with the coherent drive folded in:
//   H_lab - omega_p (a†a + σ+σ-) + i F_p (a† - a)
Operator rotating_hamiltonian(const ModelParams& p, const HilbertSpace& space);

// Conserved excitation number a†a + σ+σ- (exact on the truncation).
Operator polariton_number(const HilbertSpace& space);

enum class Branch { minus, plus, none };

// One labeled eigenstate: polariton number n, ladder index m, branch.
// n = 0 states (and the pure |e, k_max> truncation shelf) carry branch none
// and m equal to their rank in the block.
struct PolaronLevel {
  int n = 0;
  int m = 0;
  Branch branch = Branch::none;
  double energy = 0.0;
  Vector state;  // full-space amplitudes, deterministic phase
};

// Exact diagonalization of the lab-frame Hamiltonian, block by block in the
// conserved polariton number, labels assigned by energy order with
// near-degeneracies resolved by upper-polariton content. Sorted by (n,
// energy). Throws Error(classification) if the labeling self-checks fail.
std::vector<PolaronLevel> eigensystem(const ModelParams& p,
                                      const HilbertSpace& space);

// Closed-form polaron ladder energy (resonant regime only):
//   base(n) = n omega_c - (omega_m/2) q0(n)^2,  q0(n) = sqrt(2) g_cm (n-1/2)/omega_m
//   m = 0:   base - Omega_n/2                    (unpaired ladder bottom)
//   m >= 1:  base + (m-1/2) omega_m -/+ nu(n,m)
//   nu = sqrt(((Omega_n - omega_m)/2)^2 + m g_cm^2/4),  Omega_n = 2 sqrt(n) g_ac
double polaron_energy(const ModelParams& p, int n, int m, Branch branch);

// The reduced two-level x mechanics ladder Hamiltonian behind the closed
// form, on basis index = pol * (mech_cutoff+1) + m with pol 0 = lower
// polariton. Useful as an independent check of the ladder structure.
Matrix effective_ladder_hamiltonian(const ModelParams& p, int n,
                                    int mech_cutoff);

enum class TransitionClass { reducing, conserving, increasing };

// One weak-drive absorption line from a 0-polariton source level.
struct TransitionRecord {
  double e_initial = 0.0;
  double e_final = 0.0;
  double omega = 0.0;         // e_final - e_initial
  double weight = 0.0;        // F_p^2 |<final| a† |initial>|^2 * boltzmann
  int source_m = 0;           // phonon number of the source level
  double delta_phonon = 0.0;  // <b†b>_final - source_m
  TransitionClass cls = TransitionClass::conserving;
};

struct JsdOptions {
  double omega_min = 0.0;  // grid bounds; if min >= max a default window
  double omega_max = 0.0;  // around the polariton lines is chosen
  int points = 2001;
  double broadening = 0.0;  // Lorentzian FWHM; <= 0 means gamma_ac
  bool ground_state_only = false;  // only the l = 0 source state
};

struct SpectralDensity {
  std::vector<double> omega;
  std::vector<double> density;
  std::vector<TransitionRecord> transitions;
  double total_weight = 0.0;  // sum of line weights (= F_p^2 * retained mass)
};

// Joint spectral density of 0 -> 1 polariton absorption under the coherent
// cavity drive: thermally weighted source levels, transition weights from
// the exact eigensystem, normalized Lorentzian broadening.
SpectralDensity joint_spectral_density(const ModelParams& p,
                                       const HilbertSpace& space,
                                       const JsdOptions& options);

}  // namespace polaronsim
