#include "polaronsim/hilbert.hpp"

#include <cmath>

namespace polaronsim {

namespace {

void require_same_space(const HilbertSpace& a, const HilbertSpace& b,
                        const char* what) {
  if (!(a == b)) {
    throw Error(ErrorCode::incompatible_space,
                std::string(what) + ": operands live on different truncations");
  }
}

void require_same_dims(const std::vector<int>& a, const std::vector<int>& b,
                       const char* what) {
  if (a != b) {
    throw Error(ErrorCode::incompatible_space,
                std::string(what) + ": operands live on different factorizations");
  }
}

}  // namespace

int HilbertSpace::index(int atom, int k, int l) const {
  if (atom < 0 || atom >= atom_dim || k < 0 || k > cav_cutoff || l < 0 ||
      l > mech_cutoff) {
    throw Error(ErrorCode::domain, "basis label outside truncation");
  }
  return atom * cav_dim() * mech_dim() + k * mech_dim() + l;
}

HilbertSpace make_space(int cav_cutoff, int mech_cutoff) {
  if (cav_cutoff < 1 || mech_cutoff < 1) {
    throw Error(ErrorCode::config,
                "truncation cutoffs must be at least 1 photon and 1 phonon");
  }
  return HilbertSpace{cav_cutoff, mech_cutoff};
}

Operator::Operator(HilbertSpace space, Matrix matrix)
    : space_(space), matrix_(std::move(matrix)) {
  if (matrix_.rows() != space_.dim() || matrix_.cols() != space_.dim()) {
    throw Error(ErrorCode::incompatible_space,
                "operator matrix does not match the space dimension");
  }
}

Operator Operator::dagger() const { return Operator(space_, matrix_.adjoint()); }

bool Operator::is_hermitian(double tol) const {
  return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

Operator& Operator::operator+=(const Operator& other) {
  require_same_space(space_, other.space_, "operator sum");
  matrix_ += other.matrix_;
  return *this;
}

Operator& Operator::operator-=(const Operator& other) {
  require_same_space(space_, other.space_, "operator difference");
  matrix_ -= other.matrix_;
  return *this;
}

Operator& Operator::operator*=(Complex scale) {
  matrix_ *= scale;
  return *this;
}

Operator operator+(Operator a, const Operator& b) { return a += b; }
Operator operator-(Operator a, const Operator& b) { return a -= b; }

Operator operator*(const Operator& a, const Operator& b) {
  require_same_space(a.space(), b.space(), "operator product");
  return Operator(a.space(), a.matrix() * b.matrix());
}

Operator operator*(Complex scale, Operator a) { return a *= scale; }
Operator operator*(Operator a, Complex scale) { return a *= scale; }

Operator commutator(const Operator& a, const Operator& b) {
  require_same_space(a.space(), b.space(), "commutator");
  return Operator(a.space(), a.matrix() * b.matrix() - b.matrix() * a.matrix());
}

Operator identity(const HilbertSpace& space) {
  return Operator(space, Matrix::Identity(space.dim(), space.dim()));
}

Matrix lowering_matrix(int dim) {
  Matrix a = Matrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

Matrix number_matrix(int dim) {
  Matrix n = Matrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) n(k, k) = double(k);
  return n;
}

Operator embed(const HilbertSpace& space, Mode mode, const Matrix& local) {
  const std::vector<int> dims = space.dims();
  const int which = static_cast<int>(mode);
  if (local.rows() != dims[which] || local.cols() != dims[which]) {
    throw Error(ErrorCode::incompatible_space,
                "local matrix does not match the factor dimension");
  }
  // index = atom * (cav*mech) + k * mech + l; the embedded operator is
  // diagonal in the untouched labels.
  const int D = space.dim();
  Matrix out = Matrix::Zero(D, D);
  for (int a = 0; a < dims[0]; ++a)
    for (int k = 0; k < dims[1]; ++k)
      for (int l = 0; l < dims[2]; ++l) {
        const int row = space.index(a, k, l);
        const int labels[3] = {a, k, l};
        for (int col_label = 0; col_label < dims[which]; ++col_label) {
          const Complex v = local(labels[which], col_label);
          if (v == Complex(0.0, 0.0)) continue;
          int lbl[3] = {a, k, l};
          lbl[which] = col_label;
          out(row, space.index(lbl[0], lbl[1], lbl[2])) = v;
        }
      }
  return Operator(space, std::move(out));
}

Operator cavity_annihilation(const HilbertSpace& space) {
  return embed(space, Mode::cavity, lowering_matrix(space.cav_dim()));
}

Operator mech_annihilation(const HilbertSpace& space) {
  return embed(space, Mode::mechanics, lowering_matrix(space.mech_dim()));
}

Operator sigma_minus(const HilbertSpace& space) {
  return embed(space, Mode::atom, lowering_matrix(2));
}

Operator sigma_plus(const HilbertSpace& space) {
  return embed(space, Mode::atom, lowering_matrix(2).adjoint());
}

Operator sigma_z(const HilbertSpace& space) {
  Matrix sz = Matrix::Zero(2, 2);
  sz(0, 0) = -1.0;
  sz(1, 1) = 1.0;
  return embed(space, Mode::atom, sz);
}

Operator number_operator(const HilbertSpace& space, Mode mode) {
  const std::vector<int> dims = space.dims();
  return embed(space, mode, number_matrix(dims[static_cast<int>(mode)]));
}

DensityMatrix DensityMatrix::from_matrix(Matrix matrix, std::vector<int> dims,
                                         double tol) {
  int prod = 1;
  for (int d : dims) prod *= d;
  if (matrix.rows() != matrix.cols() || matrix.rows() != prod) {
    throw Error(ErrorCode::incompatible_space,
                "density matrix shape does not match the factor dimensions");
  }
  DensityMatrix rho;
  rho.matrix_ = std::move(matrix);
  rho.dims_ = std::move(dims);
  if (rho.hermiticity_error() > tol) {
    throw Error(ErrorCode::domain, "density matrix is not hermitian");
  }
  if (rho.trace_error() > tol) {
    throw Error(ErrorCode::domain, "density matrix trace differs from 1");
  }
  return rho;
}

DensityMatrix DensityMatrix::unchecked(Matrix matrix, std::vector<int> dims) {
  DensityMatrix rho;
  rho.matrix_ = std::move(matrix);
  rho.dims_ = std::move(dims);
  return rho;
}

double DensityMatrix::trace_error() const {
  return std::abs(matrix_.trace() - Complex(1.0, 0.0));
}

double DensityMatrix::hermiticity_error() const {
  return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (matrix_ + matrix_.adjoint()),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

DensityMatrix product_state(const HilbertSpace& space, int atom, int k,
                            const DensityMatrix& mech) {
  if (mech.dim() != space.mech_dim()) {
    throw Error(ErrorCode::incompatible_space,
                "mechanical state does not match the mechanics truncation");
  }
  const int D = space.dim();
  Matrix out = Matrix::Zero(D, D);
  for (int l = 0; l < space.mech_dim(); ++l)
    for (int lp = 0; lp < space.mech_dim(); ++lp)
      out(space.index(atom, k, l), space.index(atom, k, lp)) =
          mech.matrix()(l, lp);
  return DensityMatrix::unchecked(std::move(out), space.dims());
}

DensityMatrix fock_state(int dim, int level) {
  if (level < 0 || level >= dim) {
    throw Error(ErrorCode::domain, "fock level outside truncation");
  }
  Matrix m = Matrix::Zero(dim, dim);
  m(level, level) = 1.0;
  return DensityMatrix::unchecked(std::move(m), {dim});
}

DensityMatrix thermal_state(int dim, double mean_occupation) {
  if (mean_occupation < 0.0) {
    throw Error(ErrorCode::domain, "thermal occupation must be nonnegative");
  }
  Matrix m = Matrix::Zero(dim, dim);
  if (mean_occupation == 0.0) {
    m(0, 0) = 1.0;
  } else {
    // Boltzmann weights x^l with x = n/(n+1), renormalized over the truncation.
    const double x = mean_occupation / (mean_occupation + 1.0);
    double norm = 0.0, w = 1.0;
    for (int l = 0; l < dim; ++l, w *= x) norm += w;
    w = 1.0;
    for (int l = 0; l < dim; ++l, w *= x) m(l, l) = w / norm;
  }
  return DensityMatrix::unchecked(std::move(m), {dim});
}

DensityMatrix partial_trace(const DensityMatrix& rho, Mode keep) {
  if (rho.dims().size() != 3) {
    throw Error(ErrorCode::domain,
                "partial trace by mode requires a tripartite state");
  }
  const int da = rho.dims()[0], dc = rho.dims()[1], dm = rho.dims()[2];
  const int which = static_cast<int>(keep);
  const int dkeep = rho.dims()[which];
  Matrix out = Matrix::Zero(dkeep, dkeep);
  auto idx = [&](int a, int k, int l) { return (a * dc + k) * dm + l; };
  for (int a = 0; a < da; ++a)
    for (int k = 0; k < dc; ++k)
      for (int l = 0; l < dm; ++l) {
        const int labels[3] = {a, k, l};
        int lbl[3] = {a, k, l};
        for (int col = 0; col < dkeep; ++col) {
          lbl[which] = col;
          out(labels[which], col) +=
              rho.matrix()(idx(a, k, l), idx(lbl[0], lbl[1], lbl[2]));
        }
      }
  return DensityMatrix::unchecked(std::move(out), {dkeep});
}

Complex expectation(const Operator& op, const DensityMatrix& rho) {
  std::vector<int> op_dims = op.space().dims();
  require_same_dims(op_dims, rho.dims(), "expectation");
  return (op.matrix() * rho.matrix()).trace();
}

}  // namespace polaronsim
