#include <doctest.h>

#include <cmath>
#include <complex>

#include "polaronsim/hilbert.hpp"

using namespace polaronsim;

namespace {

// Test-side Kronecker product, independent of the library's embedding code.
Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("basis indexing is the documented row-major layout") {
  HilbertSpace s = make_space(3, 30);
  CHECK(s.dim() == 2 * 4 * 31);
  CHECK(s.index(0, 0, 0) == 0);
  CHECK(s.index(0, 0, 30) == 30);
  CHECK(s.index(0, 1, 0) == 31);
  CHECK(s.index(1, 0, 0) == 4 * 31);
  CHECK(s.index(1, 2, 5) == 1 * 4 * 31 + 2 * 31 + 5);

  // Round-trip: every (atom, k, l) maps to a distinct index in range.
  std::vector<int> seen(s.dim(), 0);
  for (int a = 0; a < 2; ++a)
    for (int k = 0; k <= 3; ++k)
      for (int l = 0; l <= 30; ++l) ++seen[s.index(a, k, l)];
  for (int c : seen) CHECK(c == 1);

  CHECK_THROWS_AS(s.index(2, 0, 0), Error);
  CHECK_THROWS_AS(s.index(0, 4, 0), Error);
  CHECK_THROWS_AS(s.index(0, 0, 31), Error);
  CHECK_THROWS_AS(make_space(0, 30), Error);
  CHECK_THROWS_AS(make_space(3, 0), Error);
}

TEST_CASE("lowering operator has sqrt(k) elements and the truncation artifact") {
  const int d = 7;
  Matrix a = lowering_matrix(d);
  for (int k = 1; k < d; ++k) {
    CHECK(a(k - 1, k).real() == doctest::Approx(std::sqrt(double(k))).epsilon(1e-15));
  }
  // [a, a†] = diag(1, ..., 1, 1-d) on a d-level truncation.
  Matrix comm = a * a.adjoint() - a.adjoint() * a;
  Matrix expected = Matrix::Identity(d, d);
  expected(d - 1, d - 1) = 1.0 - d;
  CHECK(max_abs(comm - expected) < 1e-14);
}

TEST_CASE("embedded elementary operators act on their own factor only") {
  HilbertSpace s = make_space(2, 3);
  Operator a = cavity_annihilation(s);
  Operator b = mech_annihilation(s);
  Operator sm = sigma_minus(s);
  Operator sp = sigma_plus(s);

  // Matrix elements against the index arithmetic.
  CHECK(a.matrix()(s.index(1, 1, 2), s.index(1, 2, 2)).real() ==
        doctest::Approx(std::sqrt(2.0)));
  CHECK(b.matrix()(s.index(0, 1, 2), s.index(0, 1, 3)).real() ==
        doctest::Approx(std::sqrt(3.0)));
  CHECK(sm.matrix()(s.index(0, 1, 1), s.index(1, 1, 1)).real() ==
        doctest::Approx(1.0));

  // Operators on different factors commute exactly.
  CHECK(max_abs(commutator(a, b).matrix()) == 0.0);
  CHECK(max_abs(commutator(sm, a).matrix()) == 0.0);
  CHECK(max_abs(commutator(sp, b).matrix()) == 0.0);

  // Embedding agrees with an explicit Kronecker product (atom x cav x mech).
  Matrix eye2 = Matrix::Identity(2, 2);
  Matrix eyec = Matrix::Identity(s.cav_dim(), s.cav_dim());
  Matrix eyem = Matrix::Identity(s.mech_dim(), s.mech_dim());
  CHECK(max_abs(a.matrix() - kron(kron(eye2, lowering_matrix(s.cav_dim())), eyem)) == 0.0);
  CHECK(max_abs(b.matrix() - kron(kron(eye2, eyec), lowering_matrix(s.mech_dim()))) == 0.0);
  CHECK(max_abs(sm.matrix() - kron(kron(lowering_matrix(2), eyec), eyem)) == 0.0);
}

TEST_CASE("pauli algebra holds for the embedded two-level operators") {
  HilbertSpace s = make_space(1, 2);
  Operator sm = sigma_minus(s);
  Operator sp = sigma_plus(s);
  Operator sz = sigma_z(s);
  Operator eye = identity(s);

  CHECK(max_abs((sp * sm - 0.5 * (eye + sz)).matrix()) < 1e-15);
  CHECK(max_abs((commutator(sp, sm) - sz).matrix()) < 1e-15);
  CHECK(max_abs((sp * sp).matrix()) == 0.0);
  CHECK(max_abs((sm * sm).matrix()) == 0.0);
  CHECK(max_abs((number_operator(s, Mode::atom) - sp * sm).matrix()) < 1e-15);
}

TEST_CASE("dagger is an involution and reverses products") {
  HilbertSpace s = make_space(2, 2);
  Operator a = cavity_annihilation(s);
  Operator b = mech_annihilation(s);
  Operator ab = a * b.dagger() + Complex(0.0, 0.5) * sigma_z(s);

  CHECK(max_abs((ab.dagger().dagger() - ab).matrix()) == 0.0);
  CHECK(max_abs(((a * b).dagger() - b.dagger() * a.dagger()).matrix()) == 0.0);
  CHECK(number_operator(s, Mode::cavity).is_hermitian());
  CHECK_FALSE(a.is_hermitian());
}

TEST_CASE("operations across different truncations are rejected") {
  HilbertSpace s1 = make_space(2, 3);
  HilbertSpace s2 = make_space(2, 4);
  Operator a1 = cavity_annihilation(s1);
  Operator a2 = cavity_annihilation(s2);

  CHECK_THROWS_AS(a1 + a2, Error);
  CHECK_THROWS_AS(a1 * a2, Error);
  CHECK_THROWS_AS(commutator(a1, a2), Error);
  try {
    a1 + a2;
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::incompatible_space);
  }

  DensityMatrix mech = fock_state(s2.mech_dim(), 0);
  DensityMatrix rho = product_state(s2, 0, 0, mech);
  CHECK_THROWS_AS(expectation(a1, rho), Error);
}

TEST_CASE("density matrix validation rejects malformed inputs") {
  Matrix good = Matrix::Zero(2, 2);
  good(0, 0) = 0.25;
  good(1, 1) = 0.75;
  good(0, 1) = Complex(0.1, 0.2);
  good(1, 0) = Complex(0.1, -0.2);
  DensityMatrix rho = DensityMatrix::from_matrix(good, {2});
  CHECK(rho.trace_error() < 1e-15);
  CHECK(rho.min_eigenvalue() > 0.0);

  Matrix bad_trace = good;
  bad_trace(1, 1) = 0.8;
  CHECK_THROWS_AS(DensityMatrix::from_matrix(bad_trace, {2}), Error);

  Matrix bad_herm = good;
  bad_herm(0, 1) = Complex(0.9, 0.2);
  CHECK_THROWS_AS(DensityMatrix::from_matrix(bad_herm, {2}), Error);

  CHECK_THROWS_AS(DensityMatrix::from_matrix(good, {3}), Error);
}

TEST_CASE("thermal state matches an independently summed geometric series") {
  const int dim = 31;  // phonon cutoff 30
  const double n_th = 3.45;
  DensityMatrix th = thermal_state(dim, n_th);

  // Oracle: sum the truncated Boltzmann series directly.
  const double x = n_th / (1.0 + n_th);
  double norm = 0.0, mean = 0.0, second = 0.0;
  for (int l = 0; l < dim; ++l) {
    const double w = std::pow(x, l);
    norm += w;
    mean += l * w;
    second += double(l) * (l - 1) * w;
  }
  mean /= norm;
  second /= norm;

  double got_mean = 0.0;
  for (int l = 0; l < dim; ++l) got_mean += l * th.matrix()(l, l).real();
  CHECK(got_mean == doctest::Approx(mean).epsilon(1e-12));
  // The truncated mean sits measurably below the nominal occupation.
  CHECK(mean == doctest::Approx(3.438).epsilon(1e-3));
  CHECK(mean < n_th);
  // Anticipated second-order statistic of the truncated distribution
  // (used later as the thermal-equilibrium oracle): g2 = <n(n-1)>/<n>^2.
  CHECK(second / (mean * mean) == doctest::Approx(1.9773).epsilon(1e-3));

  CHECK(th.trace_error() < 1e-14);
  CHECK(th.min_eigenvalue() >= 0.0);
  CHECK_THROWS_AS(thermal_state(dim, -0.1), Error);

  // Zero temperature collapses to the ground state.
  DensityMatrix vac = thermal_state(dim, 0.0);
  CHECK(vac.matrix()(0, 0).real() == doctest::Approx(1.0));
}

TEST_CASE("product states embed and reduce consistently") {
  HilbertSpace s = make_space(2, 6);
  DensityMatrix mech = thermal_state(s.mech_dim(), 1.3);
  DensityMatrix rho = product_state(s, 1, 2, mech);

  CHECK(rho.trace_error() < 1e-14);
  CHECK(expectation(number_operator(s, Mode::cavity), rho).real() ==
        doctest::Approx(2.0));
  CHECK(expectation(number_operator(s, Mode::atom), rho).real() ==
        doctest::Approx(1.0));

  // Against an explicit Kronecker construction.
  Matrix atom = Matrix::Zero(2, 2);
  atom(1, 1) = 1.0;
  Matrix cav = Matrix::Zero(s.cav_dim(), s.cav_dim());
  cav(2, 2) = 1.0;
  CHECK(max_abs(rho.matrix() - kron(kron(atom, cav), mech.matrix())) == 0.0);

  // Partial traces recover each factor.
  DensityMatrix red_m = partial_trace(rho, Mode::mechanics);
  CHECK(max_abs(red_m.matrix() - mech.matrix()) < 1e-14);
  DensityMatrix red_c = partial_trace(rho, Mode::cavity);
  CHECK(max_abs(red_c.matrix() - cav) < 1e-14);
  DensityMatrix red_a = partial_trace(rho, Mode::atom);
  CHECK(max_abs(red_a.matrix() - atom) < 1e-14);

  // Reduced expectations equal embedded expectations (entangled state too).
  Matrix psi = Matrix::Zero(s.dim(), s.dim());
  Vector v = Vector::Zero(s.dim());
  v(s.index(0, 1, 3)) = Complex(1.0 / std::sqrt(2.0), 0.0);
  v(s.index(1, 0, 2)) = Complex(0.0, 1.0 / std::sqrt(2.0));
  psi = v * v.adjoint();
  DensityMatrix ent = DensityMatrix::from_matrix(psi, s.dims());
  DensityMatrix ent_m = partial_trace(ent, Mode::mechanics);
  double local_n = 0.0;
  for (int l = 0; l < s.mech_dim(); ++l)
    local_n += l * ent_m.matrix()(l, l).real();
  CHECK(local_n == doctest::Approx(
                       expectation(number_operator(s, Mode::mechanics), ent).real())
                       .epsilon(1e-13));
  CHECK_THROWS_AS(partial_trace(ent_m, Mode::mechanics), Error);
}
