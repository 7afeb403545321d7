#pragma once

// Angular-momentum operators, the atom (x) light product space, and
// coherent initial states.
//
// Basis convention used everywhere in the library: descending magnetic
// quantum number, index i <-> m = S - i. In the product space the spin
// factor is the slow index: flat = i_S * (2J+1) + i_J.

#include <complex>
#include <cstddef>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace spinswap {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;
using Vector = Eigen::VectorXcd;

/// A spin quantum number stored as twice its value, so half-integers are exact.
class SpinQuantum {
public:
  explicit SpinQuantum(int two_s);

  static SpinQuantum from_integer(int s) { return SpinQuantum(2 * s); }

  int two_s() const noexcept { return two_s_; }
  double value() const noexcept { return 0.5 * two_s_; }
  Eigen::Index dimension() const noexcept { return two_s_ + 1; }

  /// Magnetic quantum number of basis index i (descending order).
  double magnetic(Eigen::Index i) const noexcept { return value() - static_cast<double>(i); }

  friend bool operator==(SpinQuantum a, SpinQuantum b) noexcept { return a.two_s_ == b.two_s_; }

private:
  int two_s_;
};

struct SpinOperators {
  SpinQuantum s;
  SparseMatrix plus;
  SparseMatrix minus;
  SparseMatrix x;
  SparseMatrix y;
  SparseMatrix z;
  SparseMatrix casimir;
};

SpinOperators build_spin_operators(SpinQuantum s);

/// Eigenvector of Sx with eigenvalue +S, real and nonnegative in the m basis.
Vector coherent_state_x(SpinQuantum s);

enum class Factor { spin, field };

/// Hilbert space of the atomic spin S tensored with the Schwinger spin J.
class ProductSpace {
public:
  ProductSpace(SpinQuantum spin, SpinQuantum field);

  SpinQuantum spin() const noexcept { return spin_; }
  SpinQuantum field() const noexcept { return field_; }
  Eigen::Index dim() const noexcept { return spin_.dimension() * field_.dimension(); }

  Eigen::Index index(Eigen::Index i_spin, Eigen::Index i_field) const noexcept {
    return i_spin * field_.dimension() + i_field;
  }

  /// op (x) I for Factor::spin, I (x) op for Factor::field.
  SparseMatrix lift(const SparseMatrix& op, Factor which) const;

  friend bool operator==(const ProductSpace& a, const ProductSpace& b) noexcept {
    return a.spin_ == b.spin_ && a.field_ == b.field_;
  }

private:
  SpinQuantum spin_;
  SpinQuantum field_;
};

/// Normalized pure state of the joint atom-field system.
class QuantumState {
public:
  static constexpr double kNormTolerance = 1e-9;

  QuantumState(ProductSpace space, Vector amplitudes);

  const ProductSpace& space() const noexcept { return space_; }
  const Vector& amplitudes() const noexcept { return amplitudes_; }

  /// Amplitudes reshaped to a (2S+1) x (2J+1) matrix, rows indexed by the spin.
  Eigen::MatrixXcd amplitude_matrix() const;

private:
  ProductSpace space_;
  Vector amplitudes_;
};

QuantumState product_state(const ProductSpace& space, const Vector& spin_part, const Vector& field_part);

}  // namespace spinswap
