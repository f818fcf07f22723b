#pragma once

// Finite truncations of the atom (x) cavity (x) mechanics Hilbert space,
// elementary operators on it, and density matrices with their reductions.

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace polaronsim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Machine-readable failure classes, mapped to CLI exit codes.
enum class ErrorCode {
  config,             // bad configuration / invalid request
  incompatible_space, // operands live on different truncations
  domain,             // argument outside the defined domain
  unsupported_regime, // closed form only valid in a narrower regime
  classification,     // eigensystem labeling failed self-checks
  degenerate_steady_state,
  stiffness,          // integrator step size collapsed
  solver,             // linear solver failed or residual too large
  undefined_statistic // e.g. g2 with (numerically) no population
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Composite space ordered atom (slowest) x cavity x mechanics (fastest):
//   index(atom, k, l) = atom * cav_dim * mech_dim + k * mech_dim + l
// with atom 0 = ground, 1 = excited; k photons; l phonons.
struct HilbertSpace {
  int cav_cutoff = 0;   // highest retained photon number
  int mech_cutoff = 0;  // highest retained phonon number

  static constexpr int atom_dim = 2;
  int cav_dim() const { return cav_cutoff + 1; }
  int mech_dim() const { return mech_cutoff + 1; }
  int dim() const { return atom_dim * cav_dim() * mech_dim(); }

  int index(int atom, int k, int l) const;
  std::vector<int> dims() const { return {atom_dim, cav_dim(), mech_dim()}; }

  bool operator==(const HilbertSpace&) const = default;
};

HilbertSpace make_space(int cav_cutoff, int mech_cutoff);

enum class Mode { atom, cavity, mechanics };

// A dense operator tagged with the space it acts on. All algebra checks
// space compatibility and throws Error(incompatible_space) on mismatch.
class Operator {
 public:
  Operator() = default;
  Operator(HilbertSpace space, Matrix matrix);

  const HilbertSpace& space() const { return space_; }
  const Matrix& matrix() const { return matrix_; }

  Operator dagger() const;
  bool is_hermitian(double tol = 1e-12) const;

  Operator& operator+=(const Operator& other);
  Operator& operator-=(const Operator& other);
  Operator& operator*=(Complex scale);

 private:
  HilbertSpace space_;
  Matrix matrix_;
};

Operator operator+(Operator a, const Operator& b);
Operator operator-(Operator a, const Operator& b);
Operator operator*(const Operator& a, const Operator& b);
Operator operator*(Complex scale, Operator a);
Operator operator*(Operator a, Complex scale);
Operator commutator(const Operator& a, const Operator& b);

// Identity on the composite space.
Operator identity(const HilbertSpace& space);

// Single-mode matrices (not embedded): dim x dim lowering operator and
// number operator for a truncated oscillator.
Matrix lowering_matrix(int dim);
Matrix number_matrix(int dim);

// Elementary embedded operators I (x) op (x) I on the composite space.
Operator cavity_annihilation(const HilbertSpace& space);
Operator mech_annihilation(const HilbertSpace& space);
Operator sigma_minus(const HilbertSpace& space);
Operator sigma_plus(const HilbertSpace& space);
Operator sigma_z(const HilbertSpace& space);
Operator number_operator(const HilbertSpace& space, Mode mode);  // a†a, b†b or σ+σ-

// Embed an arbitrary single-factor matrix into the composite space.
Operator embed(const HilbertSpace& space, Mode mode, const Matrix& local);

// Density matrix over an explicit factorization (tripartite for the full
// system, single-factor after partial trace). Validates hermiticity and
// unit trace on construction; positivity can be probed separately.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  static DensityMatrix from_matrix(Matrix matrix, std::vector<int> dims,
                                   double tol = 1e-9);
  // Skips validation; for solver internals and tests that build exact states.
  static DensityMatrix unchecked(Matrix matrix, std::vector<int> dims);

  const Matrix& matrix() const { return matrix_; }
  const std::vector<int>& dims() const { return dims_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }

  double trace_error() const;       // |tr(rho) - 1|
  double hermiticity_error() const; // max |rho - rho†|
  double min_eigenvalue() const;    // smallest eigenvalue of (rho+rho†)/2

 private:
  Matrix matrix_;
  std::vector<int> dims_;
};

// Pure |atom, k⟩⟨atom, k| (x) rho_mech on the composite space.
DensityMatrix product_state(const HilbertSpace& space, int atom, int k,
                            const DensityMatrix& mech);

// Single-mode states on a truncated oscillator of dimension dim.
DensityMatrix fock_state(int dim, int level);
DensityMatrix thermal_state(int dim, double mean_occupation);  // renormalized

// Trace out all factors except `keep` (tripartite input required for
// mode-addressed reduction).
DensityMatrix partial_trace(const DensityMatrix& rho, Mode keep);

Complex expectation(const Operator& op, const DensityMatrix& rho);

}  // namespace polaronsim
