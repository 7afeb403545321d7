#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numbers>

#include "oracles.hpp"
#include "spinswap/hamiltonian.hpp"
#include "spinswap/observables.hpp"
#include "spinswap/propagate.hpp"

using namespace spinswap;

namespace {

constexpr double kPi = std::numbers::pi;

SpinMoments with_covariance(double yy, double yz, double zz, Eigen::Vector3d mean = {1.0, 0.0, 0.0}) {
  SpinMoments m;
  m.mean = mean;
  m.covariance_yz << yy, yz, yz, zz;
  return m;
}

QuantumState x_state(const ProductSpace& space) {
  return product_state(space, coherent_state_x(space.spin()), coherent_state_x(space.field()));
}

double variance_along(const Eigen::Matrix2d& c, double theta) {
  const Eigen::Vector2d u(std::sin(theta), std::cos(theta));
  return u.dot(c * u);
}

}  // namespace

TEST_CASE("moments of the coherent state") {
  const ProductSpace space(SpinQuantum(4), SpinQuantum(6));
  const SpinMoments m = spin_moments(x_state(space), LiftedSpin::atoms(space));
  CHECK(m.mean.x() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(std::abs(m.mean.y()) <= 1e-14);
  CHECK(std::abs(m.mean.z()) <= 1e-14);
  CHECK(m.covariance_yz(0, 0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(m.covariance_yz(1, 1) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(std::abs(m.covariance_yz(0, 1)) <= 1e-14);
  const SpinMoments light = spin_moments(x_state(space), LiftedSpin::light(space));
  CHECK(light.mean.x() == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("moments of an Sz eigenstate") {
  const ProductSpace space(SpinQuantum(2), SpinQuantum(3));
  Vector field = coherent_state_x(SpinQuantum(3));
  const QuantumState psi = product_state(space, Vector::Unit(3, 0), field);
  const SpinMoments m = spin_moments(psi, LiftedSpin::atoms(space));
  CHECK(m.mean.z() == doctest::Approx(1.0));
  CHECK(std::abs(m.covariance_yz(1, 1)) <= 1e-15);
  CHECK(std::abs(m.mean.x()) <= 1e-15);
}

TEST_CASE("moments against the dense oracle on random states") {
  oracle::Rng rng(7);
  const ProductSpace space(SpinQuantum(5), SpinQuantum(3));
  const Eigen::MatrixXcd I4 = Eigen::MatrixXcd::Identity(4, 4);
  const Eigen::MatrixXcd sp = oracle::raising(5);
  const Eigen::MatrixXcd sy = oracle::kron((sp - Eigen::MatrixXcd(sp.adjoint())) / Complex(0.0, 2.0), I4);
  const Eigen::MatrixXcd sz = oracle::kron(oracle::sz(5), I4);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector v = rng.unit_vector(space.dim());
    const SpinMoments m = spin_moments(QuantumState(space, v), LiftedSpin::atoms(space));
    const double my = oracle::expect(sy, v), mz = oracle::expect(sz, v);
    CHECK(m.mean.y() == doctest::Approx(my).epsilon(1e-12));
    CHECK(m.covariance_yz(0, 0) == doctest::Approx(oracle::expect(sy * sy, v) - my * my).epsilon(1e-12));
    CHECK(m.covariance_yz(0, 1) ==
          doctest::Approx(0.5 * oracle::expect(sy * sz + sz * sy, v) - my * mz).epsilon(1e-12));
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(m.covariance_yz).eigenvalues()(0) >= -1e-10);
  }
}

TEST_CASE("optimal squeezing direction") {
  SUBCASE("squeezed along y") {
    const SqueezingDirection d = optimal_squeezing_direction(with_covariance(0.3, 0.0, 1.0));
    CHECK(d.theta_z == doctest::Approx(kPi / 2).epsilon(1e-14));
    CHECK(d.variance_min == doctest::Approx(0.3).epsilon(1e-14));
    CHECK_FALSE(d.degenerate);
  }
  SUBCASE("squeezed along z") {
    const SqueezingDirection d = optimal_squeezing_direction(with_covariance(1.0, 0.0, 0.2));
    CHECK(d.theta_z == doctest::Approx(0.0));
  }
  SUBCASE("isotropic") {
    const SqueezingDirection d = optimal_squeezing_direction(with_covariance(0.7, 0.0, 0.7));
    CHECK(d.theta_z == 0.0);
    CHECK(d.variance_min == doctest::Approx(0.7));
    CHECK(d.degenerate);
  }
  SUBCASE("hand-solved off-diagonal case") {
    const SqueezingDirection d = optimal_squeezing_direction(with_covariance(1.0, 0.5, 1.0));
    CHECK(d.variance_min == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(d.theta_z == doctest::Approx(3 * kPi / 4).epsilon(1e-14));
  }
  SUBCASE("argmin beats a 360 point grid on random covariances") {
    oracle::Rng rng(360);
    for (int trial = 0; trial < 50; ++trial) {
      const double a = rng.uniform(0, 2), c = rng.uniform(0, 2);
      const double b = rng.uniform(-1, 1) * std::sqrt(a * c);
      const SpinMoments m = with_covariance(a, b, c);
      const SqueezingDirection d = optimal_squeezing_direction(m);
      CHECK(d.theta_z >= 0.0);
      CHECK(d.theta_z < kPi);
      CHECK(variance_along(m.covariance_yz, d.theta_z) == doctest::Approx(d.variance_min).epsilon(1e-12));
      for (int k = 0; k < 360; ++k)
        CHECK(d.variance_min <= variance_along(m.covariance_yz, kPi * k / 360.0) + 1e-12);
    }
  }
}

TEST_CASE("r and xi^2") {
  const ProductSpace space(SpinQuantum(8), SpinQuantum(4));
  const QuantumState acs = x_state(space);
  const LiftedSpin atoms = LiftedSpin::atoms(space);
  CHECK(*squeezing_ratio(acs, atoms) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(*xi_squared(acs, atoms) == doctest::Approx(1.0).epsilon(1e-13));

  SUBCASE("hand-computed values") {
    const SpinMoments m = with_covariance(0.25, 0.0, 1.0, {2.0, 0.0, 0.0});
    // sqrt(0.25) / sqrt(2/2)
    CHECK(*squeezing_ratio(m) == doctest::Approx(0.5));
    // 2*2*0.25 / 4
    CHECK(*xi_squared(m, 2.0) == doctest::Approx(0.25));
  }
  SUBCASE("the in-plane mean enters through y-bar") {
    // theta = pi/2 so y-bar = -z
    const SpinMoments m = with_covariance(0.25, 0.0, 1.0, {1.0, 0.0, 1.0});
    CHECK(*xi_squared(m, 2.0) == doctest::Approx(2 * 2.0 * 0.25 / 2.0));
  }
  SUBCASE("undefined at vanishing spin") {
    const SpinMoments m = with_covariance(0.5, 0.0, 0.5, {0.0, 0.0, 0.0});
    CHECK_FALSE(squeezing_ratio(m).has_value());
    CHECK_FALSE(xi_squared(m, 1.0).has_value());
    const ProductSpace zero(SpinQuantum(0), SpinQuantum(2));
    CHECK_FALSE(squeezing_ratio(x_state(zero), LiftedSpin::atoms(zero)).has_value());
  }
  SUBCASE("rotated coherent state keeps r = 1") {
    const ProductSpace p(SpinQuantum(10), SpinQuantum(0));
    const SpinOperators ops = build_spin_operators(SpinQuantum(10));
    // rotate |S,x> about the x axis by 0.3: Sx is unchanged, the transverse variances stay S/2
    const Eigen::MatrixXcd rot = oracle::expm_series(Eigen::MatrixXcd(ops.x), 0.3);
    const QuantumState psi(p, rot * coherent_state_x(SpinQuantum(10)));
    CHECK(*squeezing_ratio(psi, LiftedSpin::atoms(p)) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("global phase invariance") {
    const ProductSpace p(SpinQuantum(4), SpinQuantum(4));
    const SparseMatrix h = build_swap_hamiltonian(p, {1.0, 0.0});
    const Vector v = DensePropagator(h).apply(x_state(p).amplitudes(), 0.8);
    const QuantumState a(p, v), b(p, std::exp(Complex(0, 1.1)) * v);
    const LiftedSpin at = LiftedSpin::atoms(p);
    CHECK(*squeezing_ratio(a, at) == doctest::Approx(*squeezing_ratio(b, at)).epsilon(1e-13));
    CHECK(*xi_squared(a, at) == doctest::Approx(*xi_squared(b, at)).epsilon(1e-13));
  }
}

TEST_CASE("reduced densities, entropy and Schmidt number") {
  SUBCASE("Bell-like state") {
    const ProductSpace space(SpinQuantum(1), SpinQuantum(1));
    Vector v = Vector::Zero(4);
    v(0) = v(3) = 1.0 / std::sqrt(2.0);
    const QuantumState psi(space, v);
    const Eigen::MatrixXcd rho = reduced_field_density(psi);
    CHECK((rho - 0.5 * Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(von_neumann_entropy(rho) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(schmidt_number(rho) == doctest::Approx(2.0).epsilon(1e-14));
  }
  SUBCASE("maximally mixed") {
    for (int d : {2, 3, 7, 16}) {
      const Eigen::MatrixXcd rho = Eigen::MatrixXcd::Identity(d, d) / double(d);
      CHECK(von_neumann_entropy(rho) == doctest::Approx(std::log(double(d))).epsilon(1e-13));
      CHECK(schmidt_number(rho) == doctest::Approx(double(d)).epsilon(1e-13));
    }
  }
  SUBCASE("product state") {
    const ProductSpace space(SpinQuantum(3), SpinQuantum(5));
    oracle::Rng rng(1);
    const QuantumState psi = product_state(space, rng.unit_vector(4), rng.unit_vector(6));
    const Eigen::MatrixXcd rho = reduced_field_density(psi);
    CHECK(std::abs(von_neumann_entropy(rho)) <= 1e-9);
    CHECK(schmidt_number(rho) == doctest::Approx(1.0).epsilon(1e-12));
    // rank one: rho = |phi><phi|
    CHECK((rho * rho - rho).cwiseAbs().maxCoeff() <= 1e-14);
  }
  SUBCASE("spectra agree with the SVD oracle and between the two sides") {
    oracle::Rng rng(77);
    for (int trial = 0; trial < 10; ++trial) {
      const int ds = rng.integer(1, 7), dj = rng.integer(1, 7);
      const ProductSpace space(SpinQuantum(ds - 1), SpinQuantum(dj - 1));
      const QuantumState psi(space, rng.unit_vector(space.dim()));
      const Eigen::MatrixXcd rj = reduced_field_density(psi), rs = reduced_spin_density(psi);
      CHECK(std::abs(rj.trace() - 1.0) <= 1e-12);
      CHECK((rj - Eigen::MatrixXcd(rj.adjoint())).cwiseAbs().maxCoeff() <= 1e-14);
      Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(rj).eigenvalues().reverse();
      CHECK(ev.minCoeff() >= -1e-10);
      const Eigen::VectorXd w = oracle::schmidt_weights(psi.amplitudes(), ds, dj);
      for (Eigen::Index i = 0; i < w.size(); ++i) CHECK(ev(i) == doctest::Approx(w(i)).epsilon(1e-10));
      double entropy = 0.0;
      for (double l : w)
        if (l > 1e-14) entropy -= l * std::log(l);
      CHECK(von_neumann_entropy(rj) == doctest::Approx(entropy).epsilon(1e-9));
      CHECK(von_neumann_entropy(rs) == doctest::Approx(von_neumann_entropy(rj)).epsilon(1e-9));
      const double k = schmidt_number(rj);
      CHECK(k == doctest::Approx(1.0 / w.squaredNorm()).epsilon(1e-10));
      CHECK(k >= 1.0 - 1e-12);
      CHECK(k <= std::min(ds, dj) + 1e-12);
    }
  }
  SUBCASE("trace check") {
    CHECK_THROWS_AS(von_neumann_entropy(Eigen::MatrixXcd::Identity(2, 2)), std::invalid_argument);
    CHECK_THROWS_AS(schmidt_number(Eigen::MatrixXcd::Identity(3, 3)), std::invalid_argument);
  }
}

TEST_CASE("factor relabelling invariance at S = J") {
  const ProductSpace space(SpinQuantum(6), SpinQuantum(6));
  const SparseMatrix h = build_swap_hamiltonian(space, {1.0, 0.0});
  const Vector v = DensePropagator(h).apply(x_state(space).amplitudes(), 0.9);
  const QuantumState psi(space, v);
  // swap the roles of the two factors by transposing the amplitude matrix
  const Eigen::MatrixXcd mt = psi.amplitude_matrix().transpose();
  Vector swapped(space.dim());
  for (Eigen::Index a = 0; a < 7; ++a)
    for (Eigen::Index b = 0; b < 7; ++b) swapped(space.index(a, b)) = mt(a, b);
  const QuantumState other(space, swapped);
  CHECK(schmidt_number(reduced_field_density(psi)) ==
        doctest::Approx(schmidt_number(reduced_field_density(other))).epsilon(1e-12));
  CHECK(von_neumann_entropy(reduced_field_density(psi)) ==
        doctest::Approx(von_neumann_entropy(reduced_field_density(other))).epsilon(1e-10));
  // the atom observables of one labelling are the light observables of the other
  CHECK(*squeezing_ratio(psi, LiftedSpin::atoms(space)) ==
        doctest::Approx(*squeezing_ratio(other, LiftedSpin::light(space))).epsilon(1e-12));
  CHECK(*xi_squared(psi, LiftedSpin::atoms(space)) ==
        doctest::Approx(*xi_squared(other, LiftedSpin::light(space))).epsilon(1e-12));
}

TEST_CASE("squeezing report at t = 0") {
  const ProductSpace space(SpinQuantum(4), SpinQuantum(8));
  const QuantumState psi = x_state(space);
  const SpinMoments m = spin_moments(psi, LiftedSpin::atoms(space));
  const SqueezingReport r = squeezing_report(psi, m, 2.0);
  CHECK(r.theta_z == 0.0);
  CHECK(r.theta_degenerate);
  CHECK(r.delta_s_zbar == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(*r.r == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(*r.xi2 == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(r.s_x == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(std::abs(r.entropy_field) <= 1e-12);
  CHECK(r.schmidt_k == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("transverse mean stays at the noise floor on swap trajectories") {
  const ProductSpace space(SpinQuantum(4), SpinQuantum(4));
  const SparseMatrix h = build_swap_hamiltonian(space, {1.0, 0.0});
  const QuantumState psi = x_state(space);
  const DensePropagator prop(h);
  for (double t : {0.1, 0.5, 1.0, 2.0, 3.0}) {
    const SpinMoments m = spin_moments(prop.apply(psi.amplitudes(), t), LiftedSpin::atoms(space));
    CHECK(std::abs(m.mean.y()) <= 1e-10);
    CHECK(std::abs(m.mean.z()) <= 1e-10);
    if (t == 0.1) CHECK(m.mean.x() < 2.0);
  }
}

TEST_CASE("one-axis twisting squeezes S = 2") {
  const ProductSpace space(SpinQuantum(4), SpinQuantum(0));
  const SparseMatrix h = space.lift(build_ku_hamiltonian(SpinQuantum(4), 1.0), Factor::spin);
  const DensePropagator prop(h);
  const Vector psi0 = coherent_state_x(SpinQuantum(4));
  double best = 1e9;
  for (int k = 1; k <= 300; ++k) {
    const auto xi2 = xi_squared(QuantumState(space, prop.apply(psi0, 0.005 * k)), LiftedSpin::atoms(space));
    if (xi2) best = std::min(best, *xi2);
  }
  CHECK(best < 1.0);
}
