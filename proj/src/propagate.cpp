#include "spinswap/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

namespace spinswap {

void PropagatorConfig::validate() const {
  if (dense_threshold < 2) throw std::invalid_argument("dense_threshold must be >= 2");
  if (krylov_max_dim < 2) throw std::invalid_argument("krylov_max_dim must be >= 2");
  if (!(step_tolerance > 0.0)) throw std::invalid_argument("step_tolerance must be > 0");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
}

std::vector<double> sample_times(double t_final, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (!(t_final >= 0.0)) throw std::invalid_argument("t_final must be >= 0");
  const auto steps = static_cast<std::size_t>(std::floor(t_final / dt * (1.0 + 1e-9)));
  std::vector<double> times(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) times[k] = static_cast<double>(k) * dt;
  return times;
}

void check_hermitian(const SparseMatrix& h, double tol) {
  if (h.rows() != h.cols()) throw std::invalid_argument("Hamiltonian is not square");
  const SparseMatrix diff = h - SparseMatrix(h.adjoint());
  double worst = 0.0;
  for (Eigen::Index k = 0; k < diff.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  if (worst > tol) {
    throw std::invalid_argument("Hamiltonian is not Hermitian (max |H - H^dagger| = " + std::to_string(worst) + ")");
  }
}

double norm_bound(const SparseMatrix& h) {
  double bound = 0.0;
  for (Eigen::Index row = 0; row < h.outerSize(); ++row) {
    double sum = 0.0;
    for (SparseMatrix::InnerIterator it(h, row); it; ++it) sum += std::abs(it.value());
    bound = std::max(bound, sum);
  }
  return bound;
}

// --- dense ---------------------------------------------------------------

DensePropagator::DensePropagator(const SparseMatrix& h) {
  const Eigen::MatrixXcd dense = Eigen::MatrixXcd(h);
  real_ = dense.imag().cwiseAbs().maxCoeff() == 0.0;
  if (real_) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense.real());
    if (solver.info() != Eigen::Success) throw PropagationError("dense eigensolver failed");
    eigenvalues_ = solver.eigenvalues();
    real_vectors_ = solver.eigenvectors();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(dense);
    if (solver.info() != Eigen::Success) throw PropagationError("dense eigensolver failed");
    eigenvalues_ = solver.eigenvalues();
    complex_vectors_ = solver.eigenvectors();
  }
}

Vector DensePropagator::to_eigenbasis(const Vector& psi) const {
  if (real_) {
    return real_vectors_.transpose().cast<Complex>() * psi;
  }
  return complex_vectors_.adjoint() * psi;
}

Vector DensePropagator::from_eigenbasis(const Vector& coefficients, double tau) const {
  Vector phased(coefficients.size());
  for (Eigen::Index k = 0; k < coefficients.size(); ++k) {
    phased[k] = std::polar(1.0, -eigenvalues_[k] * tau) * coefficients[k];
  }
  if (real_) {
    // Split into real and imaginary parts to stay in real BLAS-style kernels.
    Eigen::VectorXd re = real_vectors_ * phased.real();
    Eigen::VectorXd im = real_vectors_ * phased.imag();
    Vector out(re.size());
    out.real() = re;
    out.imag() = im;
    return out;
  }
  return complex_vectors_ * phased;
}

Vector DensePropagator::apply(const Vector& psi, double tau) const {
  if (real_) {
    Eigen::VectorXd re = real_vectors_.transpose() * psi.real();
    Eigen::VectorXd im = real_vectors_.transpose() * psi.imag();
    Vector c(re.size());
    c.real() = re;
    c.imag() = im;
    return from_eigenbasis(c, tau);
  }
  return from_eigenbasis(to_eigenbasis(psi), tau);
}

// --- krylov --------------------------------------------------------------

KrylovPropagator::KrylovPropagator(const SparseMatrix& h, int max_dim, double tolerance)
    : h_(h), max_dim_(max_dim), tolerance_(tolerance), norm_bound_(norm_bound(h)) {
  if (max_dim < 2) throw std::invalid_argument("krylov_max_dim must be >= 2");
  if (!(tolerance > 0.0)) throw std::invalid_argument("step_tolerance must be > 0");
}

Vector KrylovPropagator::apply(const Vector& psi_in, double tau) const {
  const Eigen::Index n = psi_in.size();
  if (n != h_.rows()) throw std::invalid_argument("Krylov: state dimension does not match Hamiltonian");

  Vector psi = psi_in;
  const Eigen::Index m_max = std::min<Eigen::Index>(max_dim_, n);
  const double breakdown = 1e-13 * std::max(1.0, norm_bound_);
  const double min_step = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(tau));

  Eigen::MatrixXcd basis(n, m_max);
  Eigen::VectorXd diag(m_max);
  Eigen::VectorXd offdiag(m_max);

  double remaining = tau;
  while (remaining != 0.0) {
    const double beta = psi.norm();
    if (beta == 0.0) return psi;

    // Lanczos with one full re-orthogonalization pass per vector.
    basis.col(0) = psi / beta;
    Eigen::Index m = 0;
    double h_next = 0.0;
    for (Eigen::Index j = 0; j < m_max; ++j) {
      Vector w = h_ * basis.col(j);
      ++stats_.matvecs;
      diag[j] = basis.col(j).dot(w).real();
      w -= diag[j] * basis.col(j);
      if (j > 0) w -= offdiag[j - 1] * basis.col(j - 1);
      w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).adjoint() * w);
      const double norm = w.norm();
      m = j + 1;
      if (norm <= breakdown || m == n) {
        h_next = 0.0;  // invariant subspace: the projection is exact
        break;
      }
      h_next = norm;
      if (m == m_max) break;
      offdiag[j] = norm;
      basis.col(j + 1) = w / norm;
    }

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      t(j, j) = diag[j];
      if (j + 1 < m) t(j, j + 1) = t(j + 1, j) = offdiag[j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t);
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const Eigen::VectorXd first_row = eig.eigenvectors().row(0).transpose();

    auto small_exp = [&](double step) {
      Vector phased(m);
      for (Eigen::Index k = 0; k < m; ++k) phased[k] = first_row[k] * std::polar(1.0, -lambda[k] * step);
      return Vector(eig.eigenvectors().cast<Complex>() * phased);
    };

    double step = remaining;
    Vector y = small_exp(step);
    double error = beta * h_next * std::abs(y[m - 1]);
    while (error > tolerance_) {
      const double shrink = std::clamp(0.9 * std::pow(tolerance_ / error, 1.0 / static_cast<double>(m)), 0.1, 0.9);
      step *= shrink;
      if (std::abs(step) < min_step) {
        throw PropagationError("Krylov step size underflow at krylov_max_dim=" + std::to_string(max_dim_) +
                               " (error estimate " + std::to_string(error) + ")");
      }
      y = small_exp(step);
      error = beta * h_next * std::abs(y[m - 1]);
    }

    psi = beta * (basis.leftCols(m) * y);
    stats_.max_error_estimate = std::max(stats_.max_error_estimate, error);
    ++stats_.substeps;
    remaining = (std::abs(step) >= std::abs(remaining)) ? 0.0 : remaining - step;
  }
  return psi;
}

std::unique_ptr<Propagator> make_propagator(const SparseMatrix& h, const PropagatorConfig& cfg) {
  cfg.validate();
  const bool dense = cfg.method == PropagationMethod::dense_eig ||
                     (cfg.method == PropagationMethod::automatic && h.rows() <= cfg.dense_threshold);
  if (dense) return std::make_unique<DensePropagator>(h);
  return std::make_unique<KrylovPropagator>(h, cfg.krylov_max_dim, cfg.step_tolerance);
}

// --- trajectories --------------------------------------------------------

namespace {

void check_times(std::span<const double> times) {
  if (times.empty()) throw std::invalid_argument("no sample times");
  if (times.front() < 0.0) throw std::invalid_argument("sample times must be nonnegative");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) throw std::invalid_argument("sample times must be strictly increasing");
  }
}

void emit(const SnapshotObserver& observe, std::size_t k, double t, Vector& psi) {
  const double norm = psi.norm();
  const double drift = std::abs(norm - 1.0);
  Vector snapshot = psi / norm;
  observe(k, t, snapshot, drift);
}

}  // namespace

void evolve_with(const Propagator& propagator, const Vector& psi0, std::span<const double> times,
                 const SnapshotObserver& observe) {
  check_times(times);
  if (const auto* dense = dynamic_cast<const DensePropagator*>(&propagator)) {
    // Every snapshot is computed directly from psi0, so errors do not accumulate.
    const Vector coefficients = dense->to_eigenbasis(psi0);
    for (std::size_t k = 0; k < times.size(); ++k) {
      Vector psi = times[k] == 0.0 ? psi0 : dense->from_eigenbasis(coefficients, times[k]);
      emit(observe, k, times[k], psi);
    }
    return;
  }

  Vector psi = psi0;
  double now = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] > now) {
      psi = propagator.apply(psi, times[k] - now);
      now = times[k];
    }
    emit(observe, k, times[k], psi);
  }
}

void evolve_observed(const Vector& psi0, const SparseMatrix& h, std::span<const double> times,
                     const PropagatorConfig& cfg, const SnapshotObserver& observe) {
  cfg.validate();
  check_times(times);
  if (psi0.size() != h.rows()) throw std::invalid_argument("state dimension does not match Hamiltonian");
  check_hermitian(h);
  const std::unique_ptr<Propagator> propagator = make_propagator(h, cfg);
  evolve_with(*propagator, psi0, times, observe);
}

namespace {

Trajectory collect(const QuantumState& state0, const SparseMatrix& h, std::span<const double> times,
                   const PropagatorConfig& cfg) {
  Trajectory out;
  out.times.reserve(times.size());
  out.states.reserve(times.size());
  out.norm_drift.reserve(times.size());
  evolve_observed(state0.amplitudes(), h, times, cfg, [&](std::size_t, double t, const Vector& psi, double drift) {
    out.times.push_back(t);
    out.states.emplace_back(state0.space(), psi);
    out.norm_drift.push_back(drift);
  });
  return out;
}

}  // namespace

Trajectory evolve(const QuantumState& state0, const SparseMatrix& h, double t_final, const PropagatorConfig& cfg) {
  const std::vector<double> times = sample_times(t_final, cfg.dt);
  return collect(state0, h, times, cfg);
}

Trajectory evolve_dense(const QuantumState& state0, const SparseMatrix& h, std::span<const double> times) {
  PropagatorConfig cfg;
  cfg.method = PropagationMethod::dense_eig;
  return collect(state0, h, times, cfg);
}

Trajectory evolve_krylov(const QuantumState& state0, const SparseMatrix& h, std::span<const double> times,
                         const PropagatorConfig& cfg) {
  PropagatorConfig krylov = cfg;
  krylov.method = PropagationMethod::krylov;
  return collect(state0, h, times, krylov);
}

}  // namespace spinswap
