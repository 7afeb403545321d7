#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "spinswap/algebra.hpp"

namespace spinswap {

enum class PropagationMethod { automatic, dense_eig, krylov };

struct PropagatorConfig {
  PropagationMethod method = PropagationMethod::automatic;
  Eigen::Index dense_threshold = 2048;
  int krylov_max_dim = 30;
  double step_tolerance = 1e-10;  // per-step 2-norm error bound
  double dt = 0.01;               // sampling interval, units of 1/alpha

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
};

class PropagationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Snapshot times k*dt for k = 0 .. floor(t_final/dt). A relative slack of
/// 1e-9 absorbs decimal round-off such as 0.3/0.001 = 299.99999999999994.
std::vector<double> sample_times(double t_final, double dt);

/// Throws std::invalid_argument unless max|H - H^dagger| <= tol.
void check_hermitian(const SparseMatrix& h, double tol = 1e-10);

/// Upper bound on the spectral norm: the maximum absolute row sum.
double norm_bound(const SparseMatrix& h);

/// Applies exp(-i H tau) to a state.
class Propagator {
public:
  virtual ~Propagator() = default;
  virtual Vector apply(const Vector& psi, double tau) const = 0;
};

/// Full Hermitian eigendecomposition H = V diag(w) V^dagger. Real symmetric
/// input (the usual case for the m-basis Hamiltonians) is diagonalized in real arithmetic.
class DensePropagator final : public Propagator {
public:
  explicit DensePropagator(const SparseMatrix& h);

  Vector apply(const Vector& psi, double tau) const override;

  /// V^dagger psi; pair with from_eigenbasis for repeated evaluation from one state.
  Vector to_eigenbasis(const Vector& psi) const;
  Vector from_eigenbasis(const Vector& coefficients, double tau) const;

  const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }

private:
  bool real_ = false;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd real_vectors_;
  Eigen::MatrixXcd complex_vectors_;
};

/// Lanczos approximation of exp(-i H tau) psi with adaptive sub-stepping.
/// Each accepted sub-step satisfies beta * h_{m+1,m} * |e_m^T exp(-i tau T) e_1| <= tolerance.
class KrylovPropagator final : public Propagator {
public:
  KrylovPropagator(const SparseMatrix& h, int max_dim, double tolerance);

  Vector apply(const Vector& psi, double tau) const override;

  struct Stats {
    std::size_t substeps = 0;
    std::size_t matvecs = 0;
    double max_error_estimate = 0.0;
  };
  const Stats& stats() const noexcept { return stats_; }

private:
  const SparseMatrix& h_;
  int max_dim_;
  double tolerance_;
  double norm_bound_;
  mutable Stats stats_;
};

std::unique_ptr<Propagator> make_propagator(const SparseMatrix& h, const PropagatorConfig& cfg);

struct Trajectory {
  std::vector<double> times;
  std::vector<QuantumState> states;
  std::vector<double> norm_drift;  // |norm - 1| before each snapshot was renormalized
};

/// Called once per sample with the renormalized state and the drift observed before renormalizing.
using SnapshotObserver =
    std::function<void(std::size_t index, double time, const Vector& state, double norm_drift)>;

/// Samples exp(-i H t) psi0 at each time using an already constructed propagator.
/// Dense propagators evaluate every snapshot directly from psi0; others step
/// sequentially. The running state is never renormalized, so reported drift is cumulative.
void evolve_with(const Propagator& propagator, const Vector& psi0, std::span<const double> times,
                 const SnapshotObserver& observe);

/// Checks the Hamiltonian, picks a propagator per cfg and runs evolve_with.
/// times must start at 0 or later and be strictly increasing.
void evolve_observed(const Vector& psi0, const SparseMatrix& h, std::span<const double> times,
                     const PropagatorConfig& cfg, const SnapshotObserver& observe);

Trajectory evolve(const QuantumState& state0, const SparseMatrix& h, double t_final, const PropagatorConfig& cfg);
Trajectory evolve_dense(const QuantumState& state0, const SparseMatrix& h, std::span<const double> times);
Trajectory evolve_krylov(const QuantumState& state0, const SparseMatrix& h, std::span<const double> times,
                         const PropagatorConfig& cfg);

}  // namespace spinswap
