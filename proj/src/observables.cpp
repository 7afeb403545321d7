#include "spinswap/observables.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace spinswap {

namespace {

LiftedSpin lift_all(const ProductSpace& space, Factor which) {
  const SpinQuantum s = which == Factor::spin ? space.spin() : space.field();
  const SpinOperators ops = build_spin_operators(s);
  return LiftedSpin{space.lift(ops.x, which), space.lift(ops.y, which), space.lift(ops.z, which), s.value()};
}

void check_density(const Eigen::MatrixXcd& rho) {
  if (rho.rows() != rho.cols() || rho.rows() == 0) throw std::invalid_argument("density matrix must be square");
  const double trace = rho.trace().real();
  if (std::abs(trace - 1.0) > 1e-8) {
    throw std::invalid_argument("density matrix trace " + std::to_string(trace) + " differs from 1");
  }
}

}  // namespace

LiftedSpin LiftedSpin::atoms(const ProductSpace& space) { return lift_all(space, Factor::spin); }
LiftedSpin LiftedSpin::light(const ProductSpace& space) { return lift_all(space, Factor::field); }

SpinMoments spin_moments(const Vector& psi, const LiftedSpin& ops) {
  if (psi.size() != ops.x.rows()) throw std::invalid_argument("spin_moments: state dimension mismatch");
  const Vector sx = ops.x * psi;
  const Vector sy = ops.y * psi;
  const Vector sz = ops.z * psi;

  SpinMoments m;
  m.mean << psi.dot(sx).real(), psi.dot(sy).real(), psi.dot(sz).real();
  // <A B> = <A psi | B psi> for Hermitian A, so the symmetrized moment is Re<A psi|B psi>.
  const double yy = sy.squaredNorm() - m.mean.y() * m.mean.y();
  const double zz = sz.squaredNorm() - m.mean.z() * m.mean.z();
  const double yz = sy.dot(sz).real() - m.mean.y() * m.mean.z();
  m.covariance_yz << yy, yz, yz, zz;
  return m;
}

SpinMoments spin_moments(const QuantumState& state, const LiftedSpin& ops) {
  return spin_moments(state.amplitudes(), ops);
}

SqueezingDirection optimal_squeezing_direction(const SpinMoments& m) {
  const double a = m.covariance_yz(0, 0);
  const double c = m.covariance_yz(1, 1);
  const double b = 0.5 * (m.covariance_yz(0, 1) + m.covariance_yz(1, 0));

  // Var(theta) = (a+c)/2 + R cos(2 theta - phi), minimized at 2 theta = phi + pi.
  const double half_diff = 0.5 * (c - a);
  const double radius = std::hypot(half_diff, b);
  SqueezingDirection out;
  out.variance_min = std::max(0.0, 0.5 * (a + c) - radius);
  out.degenerate = 2.0 * radius <= 1e-10 * std::max(1.0, std::abs(a) + std::abs(c));
  if (out.degenerate) {
    out.theta_z = 0.0;
    return out;
  }
  double theta = 0.5 * (std::atan2(b, half_diff) + std::numbers::pi);
  if (theta >= std::numbers::pi) theta -= std::numbers::pi;
  out.theta_z = theta;
  return out;
}

std::optional<double> squeezing_ratio(const SpinMoments& m) {
  const double length = m.mean.norm();
  if (length < kVanishingSpin) return std::nullopt;
  const SqueezingDirection dir = optimal_squeezing_direction(m);
  return std::sqrt(dir.variance_min) / std::sqrt(0.5 * length);
}

std::optional<double> xi_squared(const SpinMoments& m, double spin) {
  const SqueezingDirection dir = optimal_squeezing_direction(m);
  // y-bar is y rotated by theta_z about x, orthogonal to z-bar in the (y, z) plane.
  const double s_ybar = std::cos(dir.theta_z) * m.mean.y() - std::sin(dir.theta_z) * m.mean.z();
  const double denominator = m.mean.x() * m.mean.x() + s_ybar * s_ybar;
  if (denominator < kVanishingSpin * kVanishingSpin) return std::nullopt;
  return 2.0 * spin * dir.variance_min / denominator;
}

std::optional<double> squeezing_ratio(const QuantumState& state, const LiftedSpin& ops) {
  return squeezing_ratio(spin_moments(state, ops));
}

std::optional<double> xi_squared(const QuantumState& state, const LiftedSpin& ops) {
  return xi_squared(spin_moments(state, ops), ops.spin);
}

Eigen::MatrixXcd reduced_field_density(const QuantumState& state) {
  const Eigen::MatrixXcd amps = state.amplitude_matrix();
  return amps.transpose() * amps.conjugate();
}

Eigen::MatrixXcd reduced_spin_density(const QuantumState& state) {
  const Eigen::MatrixXcd amps = state.amplitude_matrix();
  return amps * amps.adjoint();
}

double von_neumann_entropy(const Eigen::MatrixXcd& rho) {
  check_density(rho);
  const Eigen::MatrixXcd hermitian = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(hermitian, Eigen::EigenvaluesOnly);
  double entropy = 0.0;
  for (double lambda : eig.eigenvalues()) {
    if (lambda >= 1e-14) entropy -= lambda * std::log(lambda);
  }
  return std::max(0.0, entropy);
}

double schmidt_number(const Eigen::MatrixXcd& rho) {
  check_density(rho);
  return 1.0 / rho.squaredNorm();
}

SqueezingReport squeezing_report(const QuantumState& state, const SpinMoments& moments, double spin) {
  const SqueezingDirection dir = optimal_squeezing_direction(moments);
  SqueezingReport report;
  report.theta_z = dir.theta_z;
  report.theta_degenerate = dir.degenerate;
  report.delta_s_zbar = std::sqrt(dir.variance_min);
  report.r = squeezing_ratio(moments);
  report.xi2 = xi_squared(moments, spin);
  report.s_x = moments.mean.x();
  // Both reduced matrices share their nonzero spectrum; diagonalize the smaller one.
  const bool spin_smaller = state.space().spin().dimension() < state.space().field().dimension();
  const Eigen::MatrixXcd rho = spin_smaller ? reduced_spin_density(state) : reduced_field_density(state);
  report.entropy_field = von_neumann_entropy(rho);
  report.schmidt_k = schmidt_number(rho);
  return report;
}

}  // namespace spinswap
