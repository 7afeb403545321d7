#pragma once

#include <optional>

#include "spinswap/algebra.hpp"

namespace spinswap {

/// Spin operators lifted into the product space, ready for expectation values.
struct LiftedSpin {
  SparseMatrix x;
  SparseMatrix y;
  SparseMatrix z;
  double spin = 0.0;  // S, needed by the xi^2 normalization

  static LiftedSpin atoms(const ProductSpace& space);
  static LiftedSpin light(const ProductSpace& space);
};

struct SpinMoments {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  /// Symmetrized covariance of (Sy, Sz); row/column 0 is y, 1 is z.
  Eigen::Matrix2d covariance_yz = Eigen::Matrix2d::Zero();
};

SpinMoments spin_moments(const Vector& psi, const LiftedSpin& ops);
SpinMoments spin_moments(const QuantumState& state, const LiftedSpin& ops);

struct SqueezingDirection {
  double theta_z = 0.0;  // angle of z-bar measured from z toward y, in [0, pi)
  double variance_min = 0.0;
  bool degenerate = false;  // isotropic covariance; theta_z is then 0 by convention
};

/// Minimizes Var(cos(t) Sz + sin(t) Sy) in closed form.
SqueezingDirection optimal_squeezing_direction(const SpinMoments& m);

/// Mean spin below this length leaves r and xi^2 undefined.
inline constexpr double kVanishingSpin = 1e-9;

std::optional<double> squeezing_ratio(const SpinMoments& m);
std::optional<double> xi_squared(const SpinMoments& m, double spin);

std::optional<double> squeezing_ratio(const QuantumState& state, const LiftedSpin& ops);
std::optional<double> xi_squared(const QuantumState& state, const LiftedSpin& ops);

/// rho_J = Tr_S |psi><psi|.
Eigen::MatrixXcd reduced_field_density(const QuantumState& state);
/// rho_S = Tr_J |psi><psi|.
Eigen::MatrixXcd reduced_spin_density(const QuantumState& state);

/// -sum lambda ln lambda in nats; eigenvalues below 1e-14 contribute nothing.
/// Throws std::invalid_argument if the trace differs from 1 by more than 1e-8.
double von_neumann_entropy(const Eigen::MatrixXcd& rho);

/// K = 1 / Tr(rho^2). Same trace check as von_neumann_entropy.
double schmidt_number(const Eigen::MatrixXcd& rho);

struct SqueezingReport {
  double theta_z = 0.0;
  bool theta_degenerate = false;
  double delta_s_zbar = 0.0;
  std::optional<double> r;
  std::optional<double> xi2;
  double s_x = 0.0;
  double entropy_field = 0.0;
  double schmidt_k = 1.0;
};

SqueezingReport squeezing_report(const QuantumState& state, const SpinMoments& moments, double spin);

}  // namespace spinswap
