#include "polaronsim/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseLU>
#include <Eigen/IterativeLinearSolvers>

namespace polaronsim {

namespace {

constexpr Complex kI{0.0, 1.0};

SparseMatrix to_sparse(const Matrix& dense) {
  std::vector<Eigen::Triplet<Complex>> trip;
  for (int j = 0; j < dense.cols(); ++j)
    for (int i = 0; i < dense.rows(); ++i)
      if (dense(i, j) != Complex(0.0, 0.0)) trip.emplace_back(i, j, dense(i, j));
  SparseMatrix s(dense.rows(), dense.cols());
  s.setFromTriplets(trip.begin(), trip.end());
  return s;
}

// vec(A X B) = (B^T ⊗ A) vec(X) for column-stacked vec.
void add_kron(std::vector<Eigen::Triplet<Complex>>& trip, const SparseMatrix& bt,
              const SparseMatrix& a, Complex scale) {
  const int d = a.rows();
  for (int kb = 0; kb < bt.outerSize(); ++kb)
    for (SparseMatrix::InnerIterator itb(bt, kb); itb; ++itb)
      for (int ka = 0; ka < a.outerSize(); ++ka)
        for (SparseMatrix::InnerIterator ita(a, ka); ita; ++ita)
          trip.emplace_back(itb.row() * d + ita.row(), itb.col() * d + ita.col(),
                            scale * itb.value() * ita.value());
}

struct DiagObservables {
  Eigen::VectorXd photon;
  Eigen::VectorXd phonon;
  Eigen::VectorXd atom;
  Eigen::VectorXd n2_block;  // indicator of polariton number >= 2
  std::vector<int> mech_level;
};

DiagObservables diag_observables(const HilbertSpace& s) {
  DiagObservables d;
  const int n = s.dim();
  d.photon.resize(n);
  d.phonon.resize(n);
  d.atom.resize(n);
  d.n2_block.resize(n);
  d.mech_level.resize(n);
  for (int a = 0; a < 2; ++a)
    for (int k = 0; k <= s.cav_cutoff; ++k)
      for (int l = 0; l <= s.mech_cutoff; ++l) {
        const int i = s.index(a, k, l);
        d.photon(i) = k;
        d.phonon(i) = l;
        d.atom(i) = a;
        d.n2_block(i) = (a + k >= 2) ? 1.0 : 0.0;
        d.mech_level[i] = l;
      }
  return d;
}

}  // namespace

Superoperator Superoperator::coherent(const Operator& h) {
  Superoperator s;
  s.space_ = h.space();
  s.has_hamiltonian_ = true;
  s.h_ = to_sparse(h.matrix());
  return s;
}

Superoperator Superoperator::dissipator(const Operator& jump, double rate) {
  if (rate < 0.0) {
    throw Error(ErrorCode::domain, "dissipator rate must be nonnegative");
  }
  Superoperator s;
  s.space_ = jump.space();
  if (rate > 0.0) {
    Jump j;
    j.op = to_sparse(jump.matrix());
    j.op_dag = to_sparse(jump.dagger().matrix());
    j.op_dag_op = to_sparse((jump.dagger() * jump).matrix());
    j.rate = rate;
    s.jumps_.push_back(std::move(j));
  }
  return s;
}

Superoperator& Superoperator::operator+=(const Superoperator& other) {
  if (!(space_ == other.space_)) {
    throw Error(ErrorCode::incompatible_space,
                "superoperator sum: operands live on different truncations");
  }
  if (other.has_hamiltonian_) {
    if (has_hamiltonian_) {
      h_ = (h_ + other.h_).pruned();
    } else {
      h_ = other.h_;
      has_hamiltonian_ = true;
    }
  }
  jumps_.insert(jumps_.end(), other.jumps_.begin(), other.jumps_.end());
  action_.reset();
  return *this;
}

Superoperator operator+(Superoperator a, const Superoperator& b) { return a += b; }

Matrix Superoperator::apply(const Matrix& rho) const {
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  if (has_hamiltonian_) {
    out.noalias() += Complex(0.0, -1.0) * (h_ * rho);
    out.noalias() += Complex(0.0, 1.0) * (rho * h_);
  }
  for (const Jump& j : jumps_) {
    const Matrix t = j.op * rho;
    out.noalias() += j.rate * (t * j.op_dag);
    out.noalias() += (-0.5 * j.rate) * (j.op_dag_op * rho);
    out.noalias() += (-0.5 * j.rate) * (rho * j.op_dag_op);
  }
  return out;
}

const SparseMatrix& Superoperator::action() const {
  if (!action_) {
    const int d = space_.dim();
    const long n = long(d) * d;
    std::vector<Eigen::Triplet<Complex>> trip;
    SparseMatrix eye(d, d);
    eye.setIdentity();
    if (has_hamiltonian_) {
      const SparseMatrix ht = h_.transpose();
      add_kron(trip, eye, h_, Complex(0.0, -1.0));
      add_kron(trip, ht, eye, Complex(0.0, 1.0));
    }
    for (const Jump& j : jumps_) {
      const SparseMatrix jconj = j.op.conjugate();
      const SparseMatrix jdjt = j.op_dag_op.transpose();
      add_kron(trip, jconj, j.op, Complex(j.rate, 0.0));
      add_kron(trip, eye, j.op_dag_op, Complex(-0.5 * j.rate, 0.0));
      add_kron(trip, jdjt, eye, Complex(-0.5 * j.rate, 0.0));
    }
    auto built = std::make_shared<SparseMatrix>(n, n);
    built->setFromTriplets(trip.begin(), trip.end());
    built->makeCompressed();
    action_ = built;
  }
  return *action_;
}

Operator incoherent_jump(const HilbertSpace& space, Branch branch) {
  if (branch == Branch::none) {
    throw Error(ErrorCode::domain, "incoherent pump targets the +/- polaritons");
  }
  const Complex phase = branch == Branch::plus ? kI : -kI;
  const double s = 1.0 / std::sqrt(2.0);
  Matrix m = Matrix::Zero(space.dim(), space.dim());
  for (int l = 0; l <= space.mech_cutoff; ++l) {
    m(space.index(0, 1, l), space.index(0, 0, l)) = s;
    m(space.index(1, 0, l), space.index(0, 0, l)) = phase * s;
  }
  return Operator(space, std::move(m));
}

Superoperator liouvillian(const ModelParams& p, const HilbertSpace& space) {
  p.validate();
  Superoperator lv = Superoperator::coherent(rotating_hamiltonian(p, space));
  lv += Superoperator::dissipator(cavity_annihilation(space), p.gamma_ac);
  lv += Superoperator::dissipator(sigma_minus(space), p.gamma_ac);
  Operator b = mech_annihilation(space);
  lv += Superoperator::dissipator(b.dagger(), p.n_th * p.gamma_m);
  lv += Superoperator::dissipator(b, (p.n_th + 1.0) * p.gamma_m);
  if (p.F_inc > 0.0) {
    lv += Superoperator::dissipator(incoherent_jump(space, Branch::plus), p.F_inc);
    lv += Superoperator::dissipator(incoherent_jump(space, Branch::minus), p.F_inc);
  }
  return lv;
}

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double kC2 = 1.0 / 5, kC3 = 3.0 / 10, kC4 = 4.0 / 5, kC5 = 8.0 / 9;
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187,
                 kA53 = 64448.0 / 6561, kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33,
                 kA63 = 46732.0 / 5247, kA64 = 49.0 / 176,
                 kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192,
                 kB5 = -2187.0 / 6784, kB6 = 11.0 / 84;
constexpr double kE1 = 35.0 / 384 - 5179.0 / 57600,
                 kE3 = 500.0 / 1113 - 7571.0 / 16695,
                 kE4 = 125.0 / 192 - 393.0 / 640,
                 kE5 = -2187.0 / 6784 + 92097.0 / 339200,
                 kE6 = 11.0 / 84 - 187.0 / 2100, kE7 = -1.0 / 40;

double g2_from_marginal(const Eigen::VectorXd& q, bool& defined) {
  double mean = 0.0, fact2 = 0.0;
  for (int l = 0; l < q.size(); ++l) {
    mean += l * q(l);
    fact2 += double(l) * (l - 1) * q(l);
  }
  if (mean <= 1e-8) {
    defined = false;
    return std::numeric_limits<double>::quiet_NaN();
  }
  defined = true;
  return fact2 / (mean * mean);
}

}  // namespace

Trajectory evolve(const Superoperator& lv, const DensityMatrix& rho0,
                  const std::vector<double>& times,
                  const IntegratorOptions& options) {
  const HilbertSpace& space = lv.space();
  if (rho0.dims() != space.dims()) {
    throw Error(ErrorCode::incompatible_space,
                "initial state does not match the generator's space");
  }
  if (times.size() < 2) {
    throw Error(ErrorCode::config, "evolve needs at least two time points");
  }
  for (size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw Error(ErrorCode::config, "output times must be strictly increasing");
    }
  }
  const double atol = options.abs_tol, rtol = options.rel_tol;
  if (atol <= 0.0 || rtol <= 0.0) {
    throw Error(ErrorCode::config, "integrator tolerances must be positive");
  }

  const DiagObservables dobs = diag_observables(space);
  const int d = space.dim();
  const int mech_dim = space.mech_dim();
  Trajectory traj;
  traj.times.reserve(times.size());

  auto record = [&](double t, const Matrix& y) {
    traj.times.push_back(t);
    double tr_re = 0.0;
    double photon = 0.0, phonon = 0.0, atom = 0.0, n2 = 0.0;
    Eigen::VectorXd marginal = Eigen::VectorXd::Zero(mech_dim);
    for (int i = 0; i < d; ++i) {
      const double pii = y(i, i).real();
      tr_re += pii;
      photon += dobs.photon(i) * pii;
      phonon += dobs.phonon(i) * pii;
      atom += dobs.atom(i) * pii;
      n2 += dobs.n2_block(i) * pii;
      marginal(dobs.mech_level[i]) += pii;
    }
    double tr_im = std::abs(y.trace().imag());
    const double trace_res = std::hypot(tr_re - 1.0, tr_im);
    traj.photon_number.push_back(photon);
    traj.phonon_number.push_back(phonon);
    traj.atom_excitation.push_back(atom);
    traj.n2_population.push_back(n2);
    traj.trace_residual.push_back(trace_res);
    traj.max_trace_residual = std::max(traj.max_trace_residual, trace_res);
    traj.max_n2_population = std::max(traj.max_n2_population, n2);
    bool defined = false;
    const double g2 = g2_from_marginal(marginal, defined);
    traj.g2_phonon.push_back(g2);
    traj.g2_defined.push_back(defined ? 1 : 0);
  };

  Matrix y = rho0.matrix();
  double t = times.front();
  record(t, y);

  Matrix k1 = lv.apply(y), k2, k3, k4, k5, k6, k7, ytmp, y5, err;

  // Initial step from the local derivative scale.
  double h = options.initial_step;
  if (h <= 0.0) {
    const double y_scale = y.cwiseAbs().maxCoeff() + atol;
    const double f_scale = k1.cwiseAbs().maxCoeff() + 1e-300;
    h = std::min(0.01 * y_scale / f_scale, times.back() - times.front());
  }
  if (options.max_step > 0.0) h = std::min(h, options.max_step);

  const double span = times.back() - times.front();
  size_t next_out = 1;
  const int stride = options.checkpoint_stride;

  auto error_norm = [&](const Matrix& e, const Matrix& a, const Matrix& b) {
    double worst = 0.0;
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i) {
        const double scale =
            atol + rtol * std::max(std::abs(a(i, j)), std::abs(b(i, j)));
        worst = std::max(worst, std::abs(e(i, j)) / scale);
      }
    return worst;
  };

  while (next_out < times.size()) {
    if (traj.steps_accepted + traj.steps_rejected >= options.max_steps) {
      throw Error(ErrorCode::stiffness,
                  "integrator exceeded the step budget at t = " +
                      std::to_string(t));
    }
    const double t_target = times[next_out];
    bool hit_output = false;
    double h_try = h;
    if (t + h_try >= t_target) {
      h_try = t_target - t;
      hit_output = true;
    }
    // A landing step may legitimately be rounding-level short (the previous
    // step can stop within one ulp of the output time); only an
    // error-controlled step this small signals stiffness.
    if (!hit_output && h_try < 1e-14 * std::max(span, 1.0)) {
      throw Error(ErrorCode::stiffness,
                  "integrator step size collapsed at t = " + std::to_string(t));
    }

    ytmp = y + h_try * (kA21 * k1);
    k2 = lv.apply(ytmp);
    ytmp = y + h_try * (kA31 * k1 + kA32 * k2);
    k3 = lv.apply(ytmp);
    ytmp = y + h_try * (kA41 * k1 + kA42 * k2 + kA43 * k3);
    k4 = lv.apply(ytmp);
    ytmp = y + h_try * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4);
    k5 = lv.apply(ytmp);
    ytmp = y + h_try * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5);
    k6 = lv.apply(ytmp);
    y5 = y + h_try * (kB1 * k1 + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
    k7 = lv.apply(y5);
    err = h_try * (kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6 + kE7 * k7);

    const double e = error_norm(err, y, y5);
    if (e <= 1.0) {
      t = hit_output ? t_target : t + h_try;
      y.swap(y5);
      k1.swap(k7);
      ++traj.steps_accepted;
      if (hit_output) {
        record(t, y);
        if (stride > 0 && ((next_out % stride) == 0 || next_out + 1 == times.size())) {
          traj.checkpoints.emplace_back(
              t, DensityMatrix::from_matrix(y, space.dims(), 1e-6));
        }
        ++next_out;
      }
    } else {
      ++traj.steps_rejected;
    }
    // An accepted landing step was shortened for the output grid, not by
    // error control, so it says nothing about the error-governed scale;
    // keep the previous step size in that case.
    if (!(hit_output && e <= 1.0)) {
      const double grow = 0.9 * std::pow(std::max(e, 1e-10), -0.2);
      h = h_try * std::clamp(grow, 0.2, 5.0);
      if (options.max_step > 0.0) h = std::min(h, options.max_step);
    }
  }

  traj.max_hermiticity_residual = (y - y.adjoint()).cwiseAbs().maxCoeff();
  traj.final_state = DensityMatrix::unchecked(y, space.dims());
  double min_eig = traj.final_state.min_eigenvalue();
  for (const auto& cp : traj.checkpoints) {
    min_eig = std::min(min_eig, cp.second.min_eigenvalue());
    traj.max_hermiticity_residual =
        std::max(traj.max_hermiticity_residual, cp.second.hermiticity_error());
  }
  traj.min_eigenvalue = min_eig;
  return traj;
}

namespace {

struct BorderedSystem {
  SparseMatrix a;           // Liouvillian with row r0 replaced by the trace row
  long r0 = 0, r1 = 0;      // replaced row; probe row for the second slice
  Eigen::VectorXcd ell_r0;  // original Liouvillian rows (dense for simplicity)
  Eigen::VectorXcd ell_r1;
  Eigen::VectorXcd trace_row;
};

BorderedSystem make_bordered(const SparseMatrix& lop, int d) {
  const long n = long(d) * d;
  BorderedSystem sys;
  sys.r0 = 0;            // vec index of rho(0,0)
  sys.r1 = d + 1;        // vec index of rho(1,1)
  sys.ell_r0 = Eigen::VectorXcd::Zero(n);
  sys.ell_r1 = Eigen::VectorXcd::Zero(n);
  sys.trace_row = Eigen::VectorXcd::Zero(n);
  for (int j = 0; j < d; ++j) sys.trace_row(long(j) * d + j) = 1.0;

  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(lop.nonZeros() + d);
  for (int k = 0; k < lop.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(lop, k); it; ++it) {
      if (it.row() == sys.r0) {
        sys.ell_r0(it.col()) = it.value();
        continue;
      }
      if (it.row() == sys.r1) sys.ell_r1(it.col()) = it.value();
      trip.emplace_back(it.row(), it.col(), it.value());
    }
  for (int j = 0; j < d; ++j)
    trip.emplace_back(sys.r0, long(j) * d + j, Complex(1.0, 0.0));
  sys.a = SparseMatrix(n, n);
  sys.a.setFromTriplets(trip.begin(), trip.end());
  sys.a.makeCompressed();
  return sys;
}

// Shift-invert block inverse iteration estimating the dimension of the
// Liouvillian kernel; used when the bordered solve cannot proceed, both to
// distinguish a degenerate steady state from a plain solver failure and to
// recover the unique kernel vector when the slicing merely hit bad luck.
struct KernelProbe {
  int dimension = 0;
  Eigen::VectorXcd candidate;
  double second_residual = 0.0;
};

KernelProbe kernel_inverse_iteration(const SparseMatrix& lop, int d) {
  const long n = long(d) * d;
  double linf = 0.0;
  for (int k = 0; k < lop.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(lop, k); it; ++it)
      linf = std::max(linf, std::abs(it.value()));
  const Complex sigma = 1e-8 * linf * Complex(0.7, 0.69);

  SparseMatrix shifted = lop;
  SparseMatrix eye(n, n);
  eye.setIdentity();
  shifted += sigma * eye;
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(shifted);
  if (lu.info() != Eigen::Success) {
    throw Error(ErrorCode::solver,
                "steady-state kernel diagnosis factorization failed");
  }

  // Deterministic diagonal starting block (steady states of these models
  // always have diagonal support).
  Eigen::VectorXcd w1 = Eigen::VectorXcd::Zero(n);
  Eigen::VectorXcd w2 = Eigen::VectorXcd::Zero(n);
  for (int j = 0; j < d; ++j) {
    w1(long(j) * d + j) = 1.0;
    w2(long(j) * d + j) = 1.0 + double(j) / d;
  }
  auto orthonormalize = [&]() {
    w1.normalize();
    w2 -= w1 * w1.dot(w2);
    w2.normalize();
  };
  orthonormalize();
  for (int iter = 0; iter < 12; ++iter) {
    w1 = lu.solve(w1);
    w2 = lu.solve(w2);
    if (!w1.allFinite() || !w2.allFinite()) {
      throw Error(ErrorCode::solver,
                  "steady-state kernel diagnosis iteration failed");
    }
    orthonormalize();
  }
  KernelProbe probe;
  const double tol = 1e-7 * linf;
  const double r1 = (lop * w1).norm();
  const double r2 = (lop * w2).norm();
  probe.dimension = (r1 < tol ? 1 : 0) + (r2 < tol ? 1 : 0);
  probe.candidate = r1 <= r2 ? w1 : w2;
  probe.second_residual = std::max(r1, r2) / std::max(linf, 1e-300);
  return probe;
}

}  // namespace

SteadyState steady_state(const Superoperator& lv,
                         const SteadyStateOptions& options) {
  const int d = lv.dim();
  const long n = long(d) * d;
  const SparseMatrix& lop = lv.action();
  BorderedSystem sys = make_bordered(lop, d);

  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(n);
  b(sys.r0) = 1.0;
  Eigen::VectorXcd b1 = Eigen::VectorXcd::Zero(n);
  b1(sys.r1) = 1.0;

  Eigen::VectorXcd x, z1;
  SteadyState result;

  const bool diagnosable = n <= options.direct_max_dim;
  bool solved = false;
  if (diagnosable) {
    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(sys.a);
    if (lu.info() == Eigen::Success) {
      x = lu.solve(b);
      // One round of iterative refinement.
      Eigen::VectorXcd r = b - sys.a * x;
      x += lu.solve(r);
      z1 = lu.solve(b1);
      result.method = "sparse_lu";
      solved = x.allFinite() && z1.allFinite();
    }
  }
  if (!solved && options.allow_iterative) {
    Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<Complex>> it;
    it.preconditioner().setDroptol(1e-5);
    it.preconditioner().setFillfactor(30);
    it.setMaxIterations(options.max_iterations);
    it.setTolerance(1e-13);
    it.compute(sys.a);
    if (it.info() == Eigen::Success) {
      x = it.solve(b);
      if (it.info() == Eigen::Success && x.allFinite()) {
        result.iterations = int(it.iterations());
        z1 = it.solve(b1);
        if (it.info() == Eigen::Success && z1.allFinite()) {
          result.method = "bicgstab_ilut";
          solved = true;
        }
      }
    }
  }
  if (!solved) {
    if (!diagnosable) {
      throw Error(ErrorCode::solver,
                  "steady-state solvers failed and the system is too large "
                  "for the kernel diagnosis");
    }
    KernelProbe probe = kernel_inverse_iteration(lop, d);
    if (probe.dimension >= 2) {
      throw Error(ErrorCode::degenerate_steady_state,
                  "steady-state kernel is not one-dimensional");
    }
    if (probe.dimension == 0) {
      throw Error(ErrorCode::solver,
                  "steady-state solve failed; no kernel vector found "
                  "(best residual " +
                      std::to_string(probe.second_residual) + ")");
    }
    result.method = "shift_invert_lu";
    x = probe.candidate;
    double herm_drop = 0.0;
    Matrix rho_si = Eigen::Map<const Matrix>(x.data(), d, d);
    Matrix herm = 0.5 * (rho_si + rho_si.adjoint());
    herm_drop = (rho_si - herm).cwiseAbs().maxCoeff();
    const double tr = herm.trace().real();
    if (std::abs(tr) < 1e-12) {
      throw Error(ErrorCode::solver,
                  "steady-state kernel candidate has vanishing trace");
    }
    herm /= tr;
    result.hermiticity_drop = herm_drop;
    result.kernel_residual = probe.second_residual;
    result.residual_max = lv.apply(herm).cwiseAbs().maxCoeff();
    if (result.residual_max > options.residual_tol) {
      throw Error(ErrorCode::solver, "steady-state residual " +
                                         std::to_string(result.residual_max) +
                                         " exceeds tolerance");
    }
    result.rho =
        DensityMatrix::from_matrix(std::move(herm), lv.space().dims(), 1e-6);
    return result;
  }

  // Second slice via a rank-2 Woodbury update: restore the original row r0
  // and constrain the trace on row r1 instead.
  const Eigen::VectorXcd v1 = sys.ell_r0 - sys.trace_row;
  const Eigen::VectorXcd v2 = sys.trace_row - sys.ell_r1;
  // Plain (unconjugated) transpose products, as the update is algebraic.
  const Complex v1x = (v1.transpose() * x)(0), v1z = (v1.transpose() * z1)(0);
  const Complex v2x = (v2.transpose() * x)(0), v2z = (v2.transpose() * z1)(0);
  Eigen::Matrix2cd cap;
  cap << 1.0 + v1x, v1z, v2x, 1.0 + v2z;
  // The slice system solves A2 x2 = e_{r1}, so the projected rhs is V^T z1.
  Eigen::Vector2cd rhs2(v1z, v2z);
  const double cap_scale = cap.cwiseAbs().maxCoeff();
  const double cap_det = std::abs(cap.determinant());
  Eigen::VectorXcd x2;
  bool probe_ok = cap_det > 1e-10 * cap_scale * cap_scale;
  if (probe_ok) {
    Eigen::Vector2cd coef = cap.inverse() * rhs2;
    x2 = z1 - x * coef(0) - z1 * coef(1);
  }

  auto normalize = [&](const Eigen::VectorXcd& vec_x, double* herm_drop) {
    Matrix rho = Eigen::Map<const Matrix>(vec_x.data(), d, d);
    Matrix herm = 0.5 * (rho + rho.adjoint());
    if (herm_drop) *herm_drop = (rho - herm).cwiseAbs().maxCoeff();
    const Complex tr = herm.trace();
    if (std::abs(tr) < 1e-300) {
      throw Error(ErrorCode::solver, "steady-state candidate has zero trace");
    }
    herm /= tr.real();
    return herm;
  };

  Matrix rho = normalize(x, &result.hermiticity_drop);
  if (probe_ok) {
    Matrix rho2 = normalize(x2, nullptr);
    result.kernel_residual = (rho2 - rho).norm() / rho.norm();
  } else {
    result.kernel_residual = std::numeric_limits<double>::infinity();
  }
  if (result.kernel_residual > options.kernel_tol) {
    throw Error(ErrorCode::degenerate_steady_state,
                "steady-state kernel is not one-dimensional (slice residual " +
                    std::to_string(result.kernel_residual) + ")");
  }

  result.residual_max = lv.apply(rho).cwiseAbs().maxCoeff();
  if (result.residual_max > options.residual_tol) {
    throw Error(ErrorCode::solver,
                "steady-state residual " + std::to_string(result.residual_max) +
                    " exceeds tolerance " +
                    std::to_string(options.residual_tol));
  }
  result.rho = DensityMatrix::from_matrix(std::move(rho), lv.space().dims(), 1e-6);
  return result;
}

}  // namespace polaronsim
