#include "polaronsim/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace polaronsim {

namespace {

// Diagonal of the mechanical reduced state, whichever form we were handed.
Eigen::VectorXd mech_diagonal(const DensityMatrix& rho) {
  if (rho.dims().size() == 1) {
    return rho.matrix().diagonal().real();
  }
  if (rho.dims().size() == 3) {
    return partial_trace(rho, Mode::mechanics).matrix().diagonal().real();
  }
  throw Error(ErrorCode::incompatible_space,
              "expected a tripartite or single-mode state");
}

}  // namespace

double g2_phonon(const DensityMatrix& rho, double floor) {
  const Eigen::VectorXd diag = mech_diagonal(rho);
  double occupation = 0.0, factorial2 = 0.0;
  for (int l = 0; l < diag.size(); ++l) {
    occupation += l * diag(l);
    factorial2 += double(l) * (l - 1) * diag(l);
  }
  if (occupation <= floor) {
    throw Error(ErrorCode::undefined_statistic,
                "phonon occupation " + std::to_string(occupation) +
                    " below the G2 floor " + std::to_string(floor));
  }
  return factorial2 / (occupation * occupation);
}

std::vector<double> linear_grid(double lo, double hi, int points) {
  if (points < 2 || !(hi > lo)) {
    throw Error(ErrorCode::config, "grid needs at least 2 increasing points");
  }
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i)
    g[i] = lo + (hi - lo) * double(i) / (points - 1);
  return g;
}

WignerMap wigner(const DensityMatrix& rho_mech,
                 const std::vector<double>& x_grid,
                 const std::vector<double>& p_grid) {
  if (rho_mech.dims().size() != 1) {
    throw Error(ErrorCode::incompatible_space,
                "wigner expects a single-mode reduced state");
  }
  if (x_grid.size() < 2 || p_grid.size() < 2) {
    throw Error(ErrorCode::config, "wigner needs at least a 2x2 grid");
  }
  const int m0 = rho_mech.dim();

  // Largest displacement requested by the grid.
  double xmax = 0.0, pmax = 0.0;
  for (double x : x_grid) xmax = std::max(xmax, std::abs(x));
  for (double p : p_grid) pmax = std::max(pmax, std::abs(p));
  const double amax = std::hypot(xmax, pmax) / std::numbers::sqrt2;

  // Spectral decomposition of the state; negligible eigenvalues are dropped
  // and their mass is reported as the evaluation residual.
  Eigen::SelfAdjointEigenSolver<Matrix> rho_es(rho_mech.matrix());
  const Eigen::VectorXd& pops = rho_es.eigenvalues();
  const double pop_floor = 1e-14 * pops.cwiseAbs().maxCoeff();
  double dropped = 0.0;
  std::vector<int> kept;
  int top_level = 0;
  for (int k = 0; k < m0; ++k) {
    if (std::abs(pops(k)) <= pop_floor) {
      dropped += std::abs(pops(k));
      continue;
    }
    kept.push_back(k);
    for (int l = m0 - 1; l > top_level; --l) {
      if (std::abs(rho_es.eigenvectors()(l, k)) > 1e-9) {
        top_level = l;
        break;
      }
    }
  }

  // Displacing level l by α populates levels up to ≈ (√l + √2·|α|)²; pad the
  // evaluation truncation so the displaced operators are converged, which
  // keeps grid corners free of cutoff artifacts.
  const double reach = std::sqrt(double(top_level) + 1.0) +
                       std::numbers::sqrt2 * amax;
  const int m = std::max(m0, int(std::ceil(reach * reach)) + 4);

  // D(α) = R(θ) D(|α|) R(-θ) with R(θ) = e^{iθ b†b}, identities that hold
  // exactly for the truncated operators. D(|α|) = V e^{i|α|Λ} V† from a
  // one-time eigendecomposition of the Hermitian generator -i(b† - b).
  const Matrix bdag = lowering_matrix(m).adjoint();
  Eigen::SelfAdjointEigenSolver<Matrix> es(
      Complex(0, -1) * (Matrix(bdag) - Matrix(bdag.adjoint())));
  const Matrix& v = es.eigenvectors();
  const Eigen::VectorXd& lambda = es.eigenvalues();

  // Padded state eigenvectors, pre-rotated into the displacement eigenbasis.
  Matrix psi = Matrix::Zero(m, long(kept.size()));
  for (size_t k = 0; k < kept.size(); ++k)
    psi.block(0, long(k), m0, 1) = rho_es.eigenvectors().col(kept[k]);

  Eigen::VectorXd parity(m);
  for (int k = 0; k < m; ++k) parity(k) = (k % 2 == 0) ? 1.0 : -1.0;

  WignerMap map;
  map.x_grid = x_grid;
  map.p_grid = p_grid;
  map.values.resize(long(x_grid.size()), long(p_grid.size()));

  const double inv_pi = std::numbers::inv_pi;
  Matrix phased(m, long(kept.size())), w(m, long(kept.size()));
  for (size_t i = 0; i < x_grid.size(); ++i) {
    for (size_t j = 0; j < p_grid.size(); ++j) {
      const double re = x_grid[i] / std::numbers::sqrt2;
      const double im = p_grid[j] / std::numbers::sqrt2;
      const double amp = std::hypot(re, im);
      const double theta = std::atan2(im, re);

      // Tr[ρ D Π D†] = Σ_k p_k Σ_l (±1)_l |(D(-α) ψ_k)_l|² with
      // D(-α) ψ = R(θ) V e^{-i amp Λ} V† R(-θ) ψ; the harmonic-phase R(θ)
      // commutes with the parity weights and drops out.
      for (int r = 0; r < m; ++r)
        phased.row(r) = psi.row(r) * std::polar(1.0, -theta * r);
      w.noalias() = v.adjoint() * phased;
      for (int c = 0; c < w.cols(); ++c)
        for (int r = 0; r < m; ++r)
          w(r, c) *= std::polar(1.0, -amp * lambda(r));
      phased.noalias() = v * w;

      double value = 0.0;
      for (size_t k = 0; k < kept.size(); ++k) {
        double parity_sum = 0.0;
        for (int r = 0; r < m; ++r)
          parity_sum += parity(r) * std::norm(phased(r, long(k)));
        value += pops(kept[k]) * parity_sum;
      }
      map.values(long(i), long(j)) = inv_pi * value;
    }
  }

  map.min_value = map.values.minCoeff();
  // No imaginary part survives the |..|² evaluation; report the dropped
  // spectral mass as the honest bound on what the map omits.
  map.imag_residual = inv_pi * dropped;

  // Trapezoidal normalization check.
  auto weights = [](const std::vector<double>& g) {
    Eigen::VectorXd w(long(g.size()));
    for (size_t i = 0; i < g.size(); ++i) {
      const double left = i == 0 ? g[0] : g[i - 1];
      const double right = i + 1 == g.size() ? g[i] : g[i + 1];
      w(long(i)) = 0.5 * (right - left);
    }
    return w;
  };
  const Eigen::VectorXd wx = weights(x_grid), wp = weights(p_grid);
  map.integral = (wx.transpose() * map.values * wp).value();
  map.accuracy_warning = std::abs(map.integral - 1.0) > 5e-2;
  return map;
}

WignerMap wigner_default(const DensityMatrix& rho_mech) {
  const std::vector<double> grid = linear_grid(-4.5, 4.5, 81);
  return wigner(rho_mech, grid, grid);
}

namespace {

// Sum of squared residuals of the pinned-amplitude exponential model at a
// given rate; reports the per-rate optimal plateau through `n_min`.
double cooling_sse(const std::vector<double>& t, const std::vector<double>& n,
                   size_t i0, double gamma, double* n_min_out) {
  const double t0 = t[i0], n0 = n[i0];
  double sww = 0.0, swr = 0.0;
  for (size_t i = i0; i < t.size(); ++i) {
    const double e = std::exp(-gamma * (t[i] - t0));
    sww += (1.0 - e) * (1.0 - e);
    swr += (1.0 - e) * (n[i] - n0 * e);
  }
  double n_min = sww > 0.0 ? swr / sww : 0.0;
  n_min = std::max(n_min, 0.0);
  double sse = 0.0;
  for (size_t i = i0; i < t.size(); ++i) {
    const double e = std::exp(-gamma * (t[i] - t0));
    const double r = n[i] - (n_min + (n0 - n_min) * e);
    sse += r * r;
  }
  if (n_min_out) *n_min_out = n_min;
  return sse;
}

}  // namespace

CoolingFit fit_cooling(const Trajectory& traj) {
  const std::vector<double>& t = traj.times;
  const std::vector<double>& n = traj.phonon_number;
  if (t.size() < 8) {
    throw Error(ErrorCode::domain, "cooling fit needs at least 8 samples");
  }

  // Fit window starts once the photon field has settled within 5% of its
  // final value (the switch-on transient carries non-exponential dynamics).
  const double photon_final = traj.photon_number.back();
  size_t i0 = 0;
  while (i0 + 8 < t.size() &&
         std::abs(traj.photon_number[i0] - photon_final) >
             0.05 * std::abs(photon_final)) {
    ++i0;
  }

  // Plateau estimate from the trailing 10% of the window.
  const size_t tail = std::max<size_t>(1, (t.size() - i0) / 10);
  double plateau = 0.0;
  for (size_t i = t.size() - tail; i < t.size(); ++i) plateau += n[i];
  plateau /= double(tail);

  const double n0 = n[i0];
  const double scale = std::max({std::abs(n0), std::abs(plateau), 1e-30});
  if (n0 - plateau < 1e-9 * scale) {
    throw Error(ErrorCode::unsupported_regime,
                "phonon series is not decaying (amplification or equilibrium);"
                " use steady-state analysis instead");
  }

  // Initial rate from the 1/e crossing toward the plateau.
  const double target = plateau + (n0 - plateau) / std::numbers::e;
  double gamma0 = 0.0;
  for (size_t i = i0 + 1; i < t.size(); ++i) {
    if (n[i] <= target) {
      gamma0 = 1.0 / (t[i] - t[i0]);
      break;
    }
  }
  if (gamma0 == 0.0) gamma0 = 1.0 / (t.back() - t[i0]);

  // Coarse log-spaced scan bracketing the optimum, then golden-section.
  double best_gamma = gamma0, best_sse = cooling_sse(t, n, i0, gamma0, nullptr);
  for (int k = -40; k <= 40; ++k) {
    const double gamma = gamma0 * std::pow(10.0, k / 20.0);
    const double sse = cooling_sse(t, n, i0, gamma, nullptr);
    if (sse < best_sse) {
      best_sse = sse;
      best_gamma = gamma;
    }
  }
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = best_gamma * std::pow(10.0, -1.0 / 20.0);
  double hi = best_gamma * std::pow(10.0, 1.0 / 20.0);
  double g1 = hi - phi * (hi - lo), g2 = lo + phi * (hi - lo);
  double s1 = cooling_sse(t, n, i0, g1, nullptr);
  double s2 = cooling_sse(t, n, i0, g2, nullptr);
  for (int iter = 0; iter < 90; ++iter) {
    if (s1 <= s2) {
      hi = g2;
      g2 = g1;
      s2 = s1;
      g1 = hi - phi * (hi - lo);
      s1 = cooling_sse(t, n, i0, g1, nullptr);
    } else {
      lo = g1;
      g1 = g2;
      s1 = s2;
      g2 = lo + phi * (hi - lo);
      s2 = cooling_sse(t, n, i0, g2, nullptr);
    }
  }

  CoolingFit fit;
  fit.gamma_eff = 0.5 * (lo + hi);
  fit.residual = std::sqrt(cooling_sse(t, n, i0, fit.gamma_eff, &fit.n_min) /
                           double(t.size() - i0));
  fit.t0 = t[i0];
  fit.t_end = t.back();
  if (!(fit.gamma_eff > 0.0)) {
    throw Error(ErrorCode::solver, "cooling fit collapsed to a zero rate");
  }
  return fit;
}

ScalarObservables scalar_observables(const DensityMatrix& rho,
                                     const HilbertSpace& space) {
  if (rho.dims() != space.dims()) {
    throw Error(ErrorCode::incompatible_space,
                "state truncation does not match the space");
  }
  ScalarObservables out;
  out.polariton_block_populations.assign(size_t(space.cav_dim()) + 1, 0.0);
  for (int atom = 0; atom < 2; ++atom)
    for (int k = 0; k < space.cav_dim(); ++k)
      for (int l = 0; l < space.mech_dim(); ++l) {
        const double pop = rho.matrix()(space.index(atom, k, l),
                                        space.index(atom, k, l)).real();
        out.phonon_number += l * pop;
        out.photon_number += k * pop;
        out.atom_excitation += atom * pop;
        out.polariton_block_populations[size_t(atom + k)] += pop;
      }
  try {
    out.g2_phonon = g2_phonon(rho);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::undefined_statistic) throw;
  }
  return out;
}

}  // namespace polaronsim
