#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "polaronsim/model.hpp"

using namespace polaronsim;

namespace {

ModelParams default_params() { return ModelParams{}; }

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

const PolaronLevel& find_level(const std::vector<PolaronLevel>& levels, int n,
                               int m, Branch branch) {
  for (const PolaronLevel& lvl : levels) {
    if (lvl.n == n && lvl.m == m && lvl.branch == branch) return lvl;
  }
  throw std::runtime_error("level not found");
}

}  // namespace

TEST_CASE("hamiltonian is hermitian and conserves the polariton number") {
  ModelParams p = default_params();
  HilbertSpace s = make_space(3, 8);
  Operator h = hamiltonian(p, s);
  CHECK(h.is_hermitian(1e-12));

  // N is integer-diagonal, so the commutator cancels bit-exactly.
  Operator n = polariton_number(s);
  CHECK(max_abs(commutator(h, n).matrix()) == 0.0);

  // The coherent drive breaks the conservation; the rest of the rotating
  // frame shifts block energies only.
  Operator hrot = rotating_hamiltonian(p, s);
  CHECK(hrot.is_hermitian(1e-12));
  CHECK(max_abs(commutator(hrot, n).matrix()) > 1e-3);

  Operator a = cavity_annihilation(s);
  Matrix rebuilt = h.matrix() - p.omega_p * n.matrix() +
                   Complex(0.0, p.F_p) * (a.dagger().matrix() - a.matrix());
  CHECK(max_abs(hrot.matrix() - rebuilt) == 0.0);
}

TEST_CASE("eigensystem matches a brute-force diagonalization") {
  ModelParams p = default_params();
  HilbertSpace s = make_space(2, 8);
  auto levels = eigensystem(p, s);
  REQUIRE(int(levels.size()) == s.dim());

  Eigen::SelfAdjointEigenSolver<Matrix> es(hamiltonian(p, s).matrix());
  std::vector<double> brute(es.eigenvalues().data(),
                            es.eigenvalues().data() + s.dim());
  std::vector<double> labeled;
  for (const auto& lvl : levels) labeled.push_back(lvl.energy);
  std::sort(labeled.begin(), labeled.end());
  for (int i = 0; i < s.dim(); ++i) {
    CHECK(labeled[i] == doctest::Approx(brute[i]).epsilon(1e-12));
  }

  // Eigenpair residuals and unit norms.
  const Matrix h = hamiltonian(p, s).matrix();
  for (const auto& lvl : levels) {
    CHECK(std::abs(lvl.state.norm() - 1.0) < 1e-12);
    CHECK((h * lvl.state - lvl.energy * lvl.state).norm() < 1e-10);
  }

  // The n = 0 ladder is the bare phonon ladder.
  for (const auto& lvl : levels) {
    if (lvl.n != 0) continue;
    CHECK(lvl.branch == Branch::none);
    CHECK(lvl.energy == doctest::Approx(lvl.m * p.omega_m).epsilon(1e-13));
  }

  // Block occupancy: n = 0 and the truncation shelf have mech_dim levels,
  // interior blocks twice that.
  std::map<int, int> count;
  for (const auto& lvl : levels) ++count[lvl.n];
  CHECK(count[0] == s.mech_dim());
  CHECK(count[1] == 2 * s.mech_dim());
  CHECK(count[2] == 2 * s.mech_dim());
  CHECK(count[3] == s.mech_dim());
}

TEST_CASE("closed-form ladder energies equal the reduced-model eigenvalues") {
  // Independent oracle: diagonalize the explicit two-level x phonon ladder
  // Hamiltonian and compare level by level with the closed form.
  ModelParams p = default_params();
  const int cutoff = 60;
  for (int n = 1; n <= 3; ++n) {
    Matrix h = effective_ladder_hamiltonian(p, n, cutoff);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    const auto& e = es.eigenvalues();
    // Ascending ladder: singlet, then doublet pairs (top shelf excluded).
    CHECK(e(0) == doctest::Approx(polaron_energy(p, n, 0, Branch::minus))
                      .epsilon(1e-13));
    for (int m = 1; m <= 10; ++m) {
      CHECK(e(2 * m - 1) ==
            doctest::Approx(polaron_energy(p, n, m, Branch::minus)).epsilon(1e-12));
      CHECK(e(2 * m) ==
            doctest::Approx(polaron_energy(p, n, m, Branch::plus)).epsilon(1e-12));
    }
  }
}

TEST_CASE("closed form stays exact when the ladder bottom is unpaired") {
  // With 2 g_ac < omega_m the naive doublet formula at m = 0 would give
  // base - |Omega - omega_m|/2; the exact singlet sits at base - Omega/2.
  ModelParams p = default_params();
  p.g_ac = 0.3;  // Omega(1) = 0.6 < omega_m
  Matrix h = effective_ladder_hamiltonian(p, 1, 40);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const double omega_1 = 2.0 * p.g_ac;
  const double q0 = std::sqrt(2.0) * p.g_cm * 0.5 / p.omega_m;
  const double base = p.omega_c - 0.5 * p.omega_m * q0 * q0;
  CHECK(polaron_energy(p, 1, 0, Branch::minus) ==
        doctest::Approx(base - 0.5 * omega_1).epsilon(1e-14));
  CHECK(es.eigenvalues()(0) ==
        doctest::Approx(polaron_energy(p, 1, 0, Branch::minus)).epsilon(1e-13));
}

TEST_CASE("closed form tracks the full eigensystem in the paper regime") {
  ModelParams p = default_params();
  HilbertSpace s = make_space(3, 40);
  auto levels = eigensystem(p, s);
  // Lowest ladder levels of the n = 1 and n = 2 blocks.  The closed form is
  // perturbative in the polaron displacement ~ g_cm (n - 1/2) / omega_m, so
  // the n = 2 block carries visibly larger corrections than n = 1.
  for (int n = 1; n <= 2; ++n) {
    const double bound = (n == 1 ? 2e-3 : 8e-3) * p.omega_m;
    CHECK(std::abs(find_level(levels, n, 0, Branch::minus).energy -
                   polaron_energy(p, n, 0, Branch::minus)) < bound);
    for (int m = 1; m <= 6; ++m) {
      for (Branch b : {Branch::minus, Branch::plus}) {
        const double closed = polaron_energy(p, n, m, b);
        const double numeric = find_level(levels, n, m, b).energy;
        CHECK(std::abs(numeric - closed) < bound);
      }
    }
  }

  // Doublet splitting grows as sqrt(m) g_cm at the resonant tuning.
  for (int m = 1; m <= 6; ++m) {
    const double split = find_level(levels, 1, m, Branch::plus).energy -
                         find_level(levels, 1, m, Branch::minus).energy;
    CHECK(split == doctest::Approx(std::sqrt(double(m)) * p.g_cm).epsilon(2e-2));
  }
}

TEST_CASE("decoupled mechanics reduces to the bare polariton doublet") {
  ModelParams p = default_params();
  p.g_cm = 0.0;
  HilbertSpace s = make_space(2, 6);
  auto levels = eigensystem(p, s);

  // n = 1 spectrum is {-g_ac + l w, +g_ac + l w}: reproduce the multiset.
  std::vector<double> expected, got;
  for (int l = 0; l < s.mech_dim(); ++l) {
    expected.push_back(p.omega_c - p.g_ac + l * p.omega_m);
    expected.push_back(p.omega_c + p.g_ac + l * p.omega_m);
  }
  for (const auto& lvl : levels)
    if (lvl.n == 1) got.push_back(lvl.energy);
  std::sort(expected.begin(), expected.end());
  std::sort(got.begin(), got.end());
  REQUIRE(got.size() == expected.size());
  for (size_t i = 0; i < got.size(); ++i) {
    CHECK(std::abs(got[i] - expected[i]) < 1e-10);
  }

  // Degenerate pairs (2 g_ac = omega_m tuning) must be resolved into pure
  // polariton content by the projector rule.
  const Matrix n_atom = number_operator(s, Mode::atom).matrix();
  for (const auto& lvl : levels) {
    if (lvl.n != 1 || lvl.branch == Branch::none) continue;
    const double atom_pop = (lvl.state.adjoint() * n_atom * lvl.state)(0).real();
    CHECK(atom_pop == doctest::Approx(0.5).epsilon(1e-9));
  }
}

TEST_CASE("closed-form domain errors") {
  ModelParams p = default_params();
  CHECK_THROWS_AS(polaron_energy(p, 0, 1, Branch::minus), Error);
  CHECK_THROWS_AS(polaron_energy(p, 1, 0, Branch::plus), Error);
  CHECK_THROWS_AS(polaron_energy(p, 1, 1, Branch::none), Error);
  ModelParams det = p;
  det.omega_a = 101.0;
  try {
    polaron_energy(det, 1, 1, Branch::minus);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unsupported_regime);
  }
  CHECK_THROWS_AS(effective_ladder_hamiltonian(det, 1, 10), Error);
}

TEST_CASE("joint spectral density obeys the drive-strength sum rule") {
  ModelParams p = default_params();
  HilbertSpace s = make_space(2, 20);
  JsdOptions opt;
  opt.points = 801;
  SpectralDensity jsd = joint_spectral_density(p, s, opt);

  // Raising the n = 0 ladder lands entirely inside the n = 1 block, so the
  // total line weight is exactly F_p^2.
  CHECK(jsd.total_weight == doctest::Approx(p.F_p * p.F_p).epsilon(1e-12));

  for (double d : jsd.density) CHECK(d >= 0.0);
  for (const auto& rec : jsd.transitions) {
    CHECK(rec.weight >= 0.0);
    CHECK(rec.omega == doctest::Approx(rec.e_final - rec.e_initial));
  }

  // Classes split by drive side: phonon-reducing and conserving lines sit
  // near the lower polariton, increasing lines near the upper one.
  bool any_reducing = false, any_conserving = false, any_increasing = false;
  for (const auto& rec : jsd.transitions) {
    if (rec.weight < 1e-6 * p.F_p * p.F_p) continue;
    if (rec.cls == TransitionClass::reducing) {
      any_reducing = true;
      CHECK(rec.omega < p.omega_c);
    }
    if (rec.cls == TransitionClass::conserving) any_conserving = true;
    if (rec.cls == TransitionClass::increasing) {
      any_increasing = true;
      CHECK(rec.omega > p.omega_c);
    }
  }
  CHECK(any_reducing);
  CHECK(any_conserving);
  CHECK(any_increasing);
}

TEST_CASE("joint spectral density reduces to two conserving polariton lines") {
  ModelParams p = default_params();
  p.g_cm = 0.0;
  HilbertSpace s = make_space(2, 12);
  JsdOptions opt;
  opt.points = 1601;
  SpectralDensity jsd = joint_spectral_density(p, s, opt);

  // All lines collapse onto omega_c -/+ g_ac with conserving character and
  // weight F_p^2/2 on each side.
  double w_lower = 0.0, w_upper = 0.0;
  for (const auto& rec : jsd.transitions) {
    if (rec.weight < 1e-14 * p.F_p * p.F_p) continue;
    CHECK(rec.cls == TransitionClass::conserving);
    CHECK(std::abs(rec.delta_phonon) < 1e-9);
    const bool lower = std::abs(rec.omega - p.lower_polariton()) < 1e-9;
    const bool upper = std::abs(rec.omega - p.upper_polariton()) < 1e-9;
    CHECK((lower || upper));
    (lower ? w_lower : w_upper) += rec.weight;
  }
  CHECK(w_lower == doctest::Approx(0.5 * p.F_p * p.F_p).epsilon(1e-10));
  CHECK(w_upper == doctest::Approx(0.5 * p.F_p * p.F_p).epsilon(1e-10));

  // Ground-state-only sourcing agrees with a zero-temperature bath.
  JsdOptions gs = opt;
  gs.ground_state_only = true;
  ModelParams cold = p;
  cold.n_th = 0.0;
  SpectralDensity a = joint_spectral_density(p, s, gs);
  SpectralDensity b = joint_spectral_density(cold, s, opt);
  REQUIRE(a.density.size() == b.density.size());
  for (size_t i = 0; i < a.density.size(); ++i) {
    CHECK(a.density[i] == doctest::Approx(b.density[i]).epsilon(1e-10));
  }
}
