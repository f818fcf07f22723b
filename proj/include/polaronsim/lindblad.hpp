#pragma once

// Lindblad generator assembly (rotating frame, optional incoherent polariton
// pump), adaptive master-equation integration, and steady-state solving.

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "polaronsim/hilbert.hpp"
#include "polaronsim/model.hpp"

namespace polaronsim {

using SparseMatrix = Eigen::SparseMatrix<Complex>;

// Generator dρ/dt = -i[H, ρ] + Σ_k rate_k (J ρ J† - ½{J†J, ρ}), stored in
// operator form for fast dense application; the column-stacked sparse
// matrix of the full map is built lazily for the linear solver.
class Superoperator {
 public:
  static Superoperator coherent(const Operator& h);
  static Superoperator dissipator(const Operator& jump, double rate);

  Superoperator& operator+=(const Superoperator& other);

  const HilbertSpace& space() const { return space_; }
  int dim() const { return space_.dim(); }

  // Action on a density matrix in matrix form.
  Matrix apply(const Matrix& rho) const;
  // Column-stacked D² x D² matrix of the same map (cached).
  const SparseMatrix& action() const;

 private:
  Superoperator() = default;
  struct Jump {
    SparseMatrix op;
    SparseMatrix op_dag;
    SparseMatrix op_dag_op;
    double rate = 0.0;
  };
  HilbertSpace space_;
  bool has_hamiltonian_ = false;
  SparseMatrix h_;
  std::vector<Jump> jumps_;
  mutable std::shared_ptr<const SparseMatrix> action_;
};

Superoperator operator+(Superoperator a, const Superoperator& b);

// Incoherent pump jump |±(1)><g, k=0| ⊗ identity on mechanics.
Operator incoherent_jump(const HilbertSpace& space, Branch branch);

// Full generator in the pump rotating frame: coherent part from
// rotating_hamiltonian plus γ_ac L[a] + γ_ac L[σ-] + n_th γ_m L[b†]
// + (n_th+1) γ_m L[b], and F_inc (L[J+] + L[J-]) when F_inc > 0.
Superoperator liouvillian(const ModelParams& p, const HilbertSpace& space);

struct IntegratorOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  double initial_step = 0.0;  // 0 = automatic
  double max_step = 0.0;      // 0 = unbounded
  long max_steps = 20000000;
  int checkpoint_stride = 0;  // store the state every k-th output time (0 = none)
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> photon_number;
  std::vector<double> phonon_number;
  std::vector<double> atom_excitation;
  std::vector<double> g2_phonon;          // NaN where undefined
  std::vector<unsigned char> g2_defined;  // 0/1 guard flags
  std::vector<double> trace_residual;     // |tr rho - 1|
  std::vector<double> n2_population;      // total population of n >= 2 blocks

  std::vector<std::pair<double, DensityMatrix>> checkpoints;
  DensityMatrix final_state;

  double max_trace_residual = 0.0;
  double max_hermiticity_residual = 0.0;
  double min_eigenvalue = 0.0;  // over checkpoints and the final state
  double max_n2_population = 0.0;
  long steps_accepted = 0;
  long steps_rejected = 0;
};

// Integrates dρ/dt = L(ρ) with an adaptive embedded Runge-Kutta (Dormand-
// Prince 5(4)) stepper, landing exactly on every requested output time.
// times must be strictly increasing; integration starts at times.front().
Trajectory evolve(const Superoperator& lv, const DensityMatrix& rho0,
                  const std::vector<double>& times,
                  const IntegratorOptions& options = {});

struct SteadyStateOptions {
  double residual_tol = 1e-10;  // permitted ‖L(ρ)‖_max
  double kernel_tol = 1e-7;     // second-slice kernel agreement (Frobenius)
  int direct_max_dim = 70000;   // largest D² handled by the direct solver
  bool allow_iterative = true;  // ILUT-preconditioned BiCGSTAB fallback
  int max_iterations = 40000;
};

struct SteadyState {
  DensityMatrix rho;
  double residual_max = 0.0;      // ‖L(ρ)‖_max after projection
  double kernel_residual = 0.0;   // relative distance of the two candidates
  double hermiticity_drop = 0.0;  // anti-Hermitian part removed
  std::string method;             // "sparse_lu" or "bicgstab_ilut"
  int iterations = 0;
};

// Solves L(ρ) = 0, tr ρ = 1 through a bordered sparse linear system (one
// row replaced by the trace constraint), with one round of iterative
// refinement and a second, differently-sliced solve probing that the
// kernel is one-dimensional.
SteadyState steady_state(const Superoperator& lv,
                         const SteadyStateOptions& options = {});

}  // namespace polaronsim
