#include "polaronsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace polaronsim {

namespace {

constexpr Complex kI{0.0, 1.0};

// Deterministic eigenvector phase: largest-magnitude component real positive.
void fix_phase(Vector& v) {
  int imax = 0;
  double best = -1.0;
  for (int i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > best) {
      best = a;
      imax = i;
    }
  }
  if (best > 0.0) v *= std::conj(v(imax)) / best;
}

}  // namespace

void ModelParams::validate() const {
  if (omega_m <= 0.0 || omega_c <= 0.0 || omega_a <= 0.0) {
    throw Error(ErrorCode::config, "mode frequencies must be positive");
  }
  if (g_ac < 0.0 || g_cm < 0.0) {
    throw Error(ErrorCode::config, "couplings must be nonnegative");
  }
  if (gamma_ac < 0.0 || gamma_m < 0.0 || F_p < 0.0 || F_inc < 0.0 ||
      n_th < 0.0) {
    throw Error(ErrorCode::config, "rates and occupations must be nonnegative");
  }
  if (F_p > 0.0 && omega_p <= 0.0) {
    throw Error(ErrorCode::config, "driven model needs a positive drive frequency");
  }
}

bool ModelParams::resonant(double tol) const {
  return std::abs(omega_c - omega_a) <= tol * std::max(omega_c, omega_a);
}

Operator hamiltonian(const ModelParams& p, const HilbertSpace& space) {
  p.validate();
  Operator a = cavity_annihilation(space);
  Operator b = mech_annihilation(space);
  Operator sm = sigma_minus(space);
  Operator sp = sigma_plus(space);
  Operator n_cav = number_operator(space, Mode::cavity);

  Operator h = p.omega_c * n_cav + p.omega_a * (sp * sm) +
               p.omega_m * number_operator(space, Mode::mechanics) +
               kI * p.g_ac * (sp * a - sm * a.dagger()) -
               p.g_cm * (n_cav * (b + b.dagger()));
  return h;
}

Operator rotating_hamiltonian(const ModelParams& p, const HilbertSpace& space) {
  Operator h = hamiltonian(p, space);
  Operator a = cavity_annihilation(space);
  h -= p.omega_p * polariton_number(space);
  h += kI * p.F_p * (a.dagger() - a);
  return h;
}

Operator polariton_number(const HilbertSpace& space) {
  return number_operator(space, Mode::cavity) +
         number_operator(space, Mode::atom);
}

std::vector<PolaronLevel> eigensystem(const ModelParams& p,
                                      const HilbertSpace& space) {
  const Matrix H = hamiltonian(p, space).matrix();
  const int M = space.mech_dim();
  const int D = space.dim();
  std::vector<PolaronLevel> out;
  out.reserve(D);

  for (int n = 0; n <= space.cav_cutoff + 1; ++n) {
    // Basis of the fixed-polariton-number block: |g, n, l> then |e, n-1, l>.
    std::vector<int> idx;
    const bool has_g = n <= space.cav_cutoff;
    const bool has_e = n >= 1;
    if (has_g)
      for (int l = 0; l < M; ++l) idx.push_back(space.index(0, n, l));
    if (has_e)
      for (int l = 0; l < M; ++l) idx.push_back(space.index(1, n - 1, l));
    const int B = static_cast<int>(idx.size());

    Matrix block(B, B);
    for (int i = 0; i < B; ++i)
      for (int j = 0; j < B; ++j) block(i, j) = H(idx[i], idx[j]);
    Eigen::SelfAdjointEigenSolver<Matrix> es(block);
    if (es.info() != Eigen::Success) {
      throw Error(ErrorCode::solver, "block diagonalization failed");
    }
    const Eigen::VectorXd& e = es.eigenvalues();
    Matrix vec = es.eigenvectors();

    auto emit = [&](int col, int m, Branch branch, double energy) {
      PolaronLevel lvl;
      lvl.n = n;
      lvl.m = m;
      lvl.branch = branch;
      lvl.energy = energy;
      Vector full = Vector::Zero(D);
      for (int i = 0; i < B; ++i) full(idx[i]) = vec(i, col);
      fix_phase(full);
      out.push_back(std::move(lvl));
      out.back().state = std::move(full);
    };

    if (!(has_g && has_e)) {
      // Single-component ladder: the n = 0 ground ladder or the pure
      // |e, k_max, l> truncation shelf. Rank labels, no branch.
      for (int r = 0; r < B; ++r) emit(r, r, Branch::none, e(r));
      continue;
    }

    // Upper-polariton projection amplitude of block-coordinate vector v:
    // component l is <+(n), l | v> with |+(n)> = (|g,n> + i|e,n-1>)/sqrt(2).
    auto plus_amplitudes = [&](const Vector& v) {
      Vector amp(M);
      const double s = 1.0 / std::sqrt(2.0);
      for (int l = 0; l < M; ++l)
        amp(l) = s * (v(l) + std::conj(kI) * v(M + l));
      return amp;
    };

    // Ascending energies realize the ladder: unpaired bottom (m = 0), then
    // doublets m = 1 .. M-1, then the unpaired top truncation level.
    const double deg_tol =
        1e-9 * (std::abs(e(0)) + std::abs(e(B - 1)) + p.omega_m);
    emit(0, 0, Branch::minus, e(0));
    for (int m = 1; m <= M - 1; ++m) {
      const int lo = 2 * m - 1, hi = 2 * m;
      if (e(hi) - e(lo) > deg_tol) {
        emit(lo, m, Branch::minus, e(lo));
        emit(hi, m, Branch::plus, e(hi));
        continue;
      }
      // Degenerate pair: split the 2d eigenspace by upper-polariton content.
      Matrix q(B, 2);
      q.col(0) = vec.col(lo);
      q.col(1) = vec.col(hi);
      Matrix amp(M, 2);
      amp.col(0) = plus_amplitudes(q.col(0));
      amp.col(1) = plus_amplitudes(q.col(1));
      Matrix k = amp.adjoint() * amp;  // 2x2 content matrix
      Eigen::SelfAdjointEigenSolver<Matrix> ks(k);
      if (ks.eigenvalues()(1) - ks.eigenvalues()(0) < 1e-6) {
        throw Error(ErrorCode::classification,
                    "degenerate pair has indistinguishable polariton content");
      }
      Matrix rotated = q * ks.eigenvectors();  // col 0: lower + content
      Vector energies =
          (ks.eigenvectors().adjoint() *
           Eigen::Vector2cd(e(lo), e(hi)).asDiagonal().toDenseMatrix() *
           ks.eigenvectors())
              .diagonal();
      vec.col(lo) = rotated.col(0);
      vec.col(hi) = rotated.col(1);
      emit(lo, m, Branch::minus, energies(0).real());
      emit(hi, m, Branch::plus, energies(1).real());
    }
    emit(B - 1, M, Branch::plus, e(B - 1));
  }

  // Self-check: every state carries its block's exact polariton number.
  const Matrix N = polariton_number(space).matrix();
  for (const PolaronLevel& lvl : out) {
    const double n_val = (lvl.state.adjoint() * N * lvl.state)(0).real();
    if (std::abs(n_val - lvl.n) > 1e-9) {
      throw Error(ErrorCode::classification,
                  "polariton-number label check failed");
    }
  }
  if (static_cast<int>(out.size()) != D) {
    throw Error(ErrorCode::classification, "eigensystem level count mismatch");
  }

  std::stable_sort(out.begin(), out.end(),
                   [](const PolaronLevel& a, const PolaronLevel& b) {
                     if (a.n != b.n) return a.n < b.n;
                     return a.energy < b.energy;
                   });
  return out;
}

double polaron_energy(const ModelParams& p, int n, int m, Branch branch) {
  p.validate();
  if (!p.resonant()) {
    throw Error(ErrorCode::unsupported_regime,
                "closed-form ladder energies require atom-cavity resonance");
  }
  if (n < 1 || m < 0) {
    throw Error(ErrorCode::domain, "ladder energies need n >= 1 and m >= 0");
  }
  if (branch == Branch::none) {
    throw Error(ErrorCode::domain, "ladder energies carry a +/- branch");
  }
  const double omega_n = 2.0 * std::sqrt(double(n)) * p.g_ac;
  const double q0 = std::sqrt(2.0) * p.g_cm * (n - 0.5) / p.omega_m;
  const double base = n * p.omega_c - 0.5 * p.omega_m * q0 * q0;
  if (m == 0) {
    if (branch == Branch::plus) {
      throw Error(ErrorCode::domain,
                  "the m = 0 level is an unpaired singlet (branch minus)");
    }
    return base - 0.5 * omega_n;
  }
  const double nu =
      std::hypot(0.5 * (omega_n - p.omega_m), 0.5 * p.g_cm * std::sqrt(double(m)));
  return base + (m - 0.5) * p.omega_m + (branch == Branch::plus ? nu : -nu);
}

Matrix effective_ladder_hamiltonian(const ModelParams& p, int n,
                                    int mech_cutoff) {
  p.validate();
  if (!p.resonant()) {
    throw Error(ErrorCode::unsupported_regime,
                "the reduced ladder model requires atom-cavity resonance");
  }
  if (n < 1 || mech_cutoff < 1) {
    throw Error(ErrorCode::domain, "reduced ladder needs n >= 1 and a cutoff");
  }
  const int M = mech_cutoff + 1;
  const double omega_n = 2.0 * std::sqrt(double(n)) * p.g_ac;
  const double q0 = std::sqrt(2.0) * p.g_cm * (n - 0.5) / p.omega_m;
  const double base = n * p.omega_c - 0.5 * p.omega_m * q0 * q0;

  // basis index = pol * M + m, pol 0 = lower polariton.
  Matrix h = Matrix::Zero(2 * M, 2 * M);
  for (int pol = 0; pol < 2; ++pol)
    for (int m = 0; m < M; ++m)
      h(pol * M + m, pol * M + m) =
          base + (pol == 0 ? -0.5 : 0.5) * omega_n + m * p.omega_m;
  // Polariton-flip phonon exchange -(g_cm/2)(σ+ b + σ- b†) in the shifted frame.
  for (int m = 1; m < M; ++m) {
    const double v = -0.5 * p.g_cm * std::sqrt(double(m));
    h(M + (m - 1), m) = v;  // <+, m-1| h |-, m>
    h(m, M + (m - 1)) = v;
  }
  return h;
}

SpectralDensity joint_spectral_density(const ModelParams& p,
                                       const HilbertSpace& space,
                                       const JsdOptions& options) {
  if (options.points < 2) {
    throw Error(ErrorCode::config, "spectral grid needs at least two points");
  }
  const std::vector<PolaronLevel> levels = eigensystem(p, space);

  std::vector<const PolaronLevel*> sources, targets;
  for (const PolaronLevel& lvl : levels) {
    if (lvl.n == 0) sources.push_back(&lvl);
    if (lvl.n == 1) targets.push_back(&lvl);
  }

  // Thermal source weights: Boltzmann factors renormalized over the
  // retained ladder (m is the exact phonon number of the n = 0 level).
  std::vector<double> weight(sources.size(), 0.0);
  if (options.ground_state_only || p.n_th == 0.0) {
    weight[0] = 1.0;
  } else {
    const double x = p.n_th / (1.0 + p.n_th);
    double norm = 0.0;
    for (size_t s = 0; s < sources.size(); ++s) {
      weight[s] = std::pow(x, sources[s]->m);
      norm += weight[s];
    }
    for (double& w : weight) w /= norm;
  }

  const Matrix adag = cavity_annihilation(space).dagger().matrix();
  const Matrix bdagb = number_operator(space, Mode::mechanics).matrix();
  std::vector<double> target_phonon(targets.size());
  for (size_t t = 0; t < targets.size(); ++t) {
    target_phonon[t] =
        (targets[t]->state.adjoint() * bdagb * targets[t]->state)(0).real();
  }

  SpectralDensity result;
  const double record_floor = 1e-16 * p.F_p * p.F_p;
  for (size_t s = 0; s < sources.size(); ++s) {
    if (weight[s] == 0.0) continue;
    const Vector lifted = adag * sources[s]->state;
    for (size_t t = 0; t < targets.size(); ++t) {
      const Complex amp = targets[t]->state.dot(lifted);
      const double w = p.F_p * p.F_p * std::norm(amp) * weight[s];
      result.total_weight += w;
      if (w < record_floor) continue;
      TransitionRecord rec;
      rec.e_initial = sources[s]->energy;
      rec.e_final = targets[t]->energy;
      rec.omega = rec.e_final - rec.e_initial;
      rec.weight = w;
      rec.source_m = sources[s]->m;
      rec.delta_phonon = target_phonon[t] - sources[s]->m;
      rec.cls = rec.delta_phonon < -0.25 ? TransitionClass::reducing
                : rec.delta_phonon > 0.25 ? TransitionClass::increasing
                                          : TransitionClass::conserving;
      result.transitions.push_back(rec);
    }
  }
  std::sort(result.transitions.begin(), result.transitions.end(),
            [](const TransitionRecord& a, const TransitionRecord& b) {
              return a.omega < b.omega;
            });

  double lo = options.omega_min, hi = options.omega_max;
  if (!(lo < hi)) {
    lo = p.lower_polariton() - 0.5 * p.omega_m;
    hi = p.upper_polariton() + 0.5 * p.omega_m;
  }
  const double fwhm = options.broadening > 0.0 ? options.broadening : p.gamma_ac;
  if (fwhm <= 0.0) {
    throw Error(ErrorCode::config, "spectral broadening must be positive");
  }
  const double half = 0.5 * fwhm;
  result.omega.resize(options.points);
  result.density.assign(options.points, 0.0);
  for (int i = 0; i < options.points; ++i) {
    result.omega[i] = lo + (hi - lo) * i / (options.points - 1);
  }
  // Normalized Lorentzian of full width fwhm at half maximum.
  for (const TransitionRecord& rec : result.transitions) {
    for (int i = 0; i < options.points; ++i) {
      const double d = result.omega[i] - rec.omega;
      result.density[i] +=
          rec.weight * half / (std::numbers::pi * (d * d + half * half));
    }
  }
  return result;
}

}  // namespace polaronsim
