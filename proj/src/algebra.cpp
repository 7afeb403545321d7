#include "spinswap/algebra.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinswap {

namespace {

using Triplet = Eigen::Triplet<Complex>;

SparseMatrix from_triplets(Eigen::Index dim, const std::vector<Triplet>& entries) {
  SparseMatrix m(dim, dim);
  m.setFromTriplets(entries.begin(), entries.end());
  m.makeCompressed();
  return m;
}

SparseMatrix identity(Eigen::Index dim) {
  SparseMatrix id(dim, dim);
  id.setIdentity();
  return id;
}

// sqrt(C(n, k) / 2^n). Binomials up to n = 50 fit exactly in 64 bits.
std::vector<double> binomial_amplitudes(int n) {
  std::vector<double> out(static_cast<std::size_t>(n) + 1);
  if (n <= 50) {
    std::uint64_t c = 1;
    for (int k = 0; k <= n; ++k) {
      out[k] = std::sqrt(std::ldexp(static_cast<double>(c), -n));
      c = c * static_cast<std::uint64_t>(n - k) / static_cast<std::uint64_t>(k + 1);
    }
    return out;
  }
  const double log_half = -0.5 * n * std::log(2.0);
  for (int k = 0; k <= n; ++k) {
    const double log_c = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    out[k] = std::exp(0.5 * log_c + log_half);
  }
  return out;
}

}  // namespace

SpinQuantum::SpinQuantum(int two_s) : two_s_(two_s) {
  if (two_s < 0) {
    throw std::invalid_argument("spin quantum number must be nonnegative, got two_s=" + std::to_string(two_s));
  }
}

SpinOperators build_spin_operators(SpinQuantum s) {
  const Eigen::Index dim = s.dimension();
  const double spin = s.value();

  // <m+1|S+|m> = sqrt(S(S+1) - m(m+1)); m+1 sits one index above m.
  std::vector<Triplet> plus_entries;
  std::vector<Triplet> z_entries;
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double m = s.magnetic(i);
    z_entries.emplace_back(i, i, Complex(m, 0.0));
    if (i > 0) {
      plus_entries.emplace_back(i - 1, i, Complex(std::sqrt(spin * (spin + 1.0) - m * (m + 1.0)), 0.0));
    }
  }

  SparseMatrix plus = from_triplets(dim, plus_entries);
  SparseMatrix minus = SparseMatrix(plus.adjoint());
  SparseMatrix x = SparseMatrix((plus + minus) * Complex(0.5, 0.0));
  SparseMatrix y = SparseMatrix((plus - minus) * Complex(0.0, -0.5));
  SparseMatrix z = from_triplets(dim, z_entries);

  // S(S+1) = two_s (two_s + 2) / 4 is exact in double for any practical two_s.
  const double casimir_value = static_cast<double>(s.two_s()) * (s.two_s() + 2) / 4.0;
  SparseMatrix casimir = identity(dim) * Complex(casimir_value, 0.0);

  return SpinOperators{s, std::move(plus), std::move(minus), std::move(x), std::move(y), std::move(z),
                       std::move(casimir)};
}

Vector coherent_state_x(SpinQuantum s) {
  const std::vector<double> amps = binomial_amplitudes(s.two_s());
  Vector v(s.dimension());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = Complex(amps[static_cast<std::size_t>(i)], 0.0);
  v /= v.norm();
  return v;
}

ProductSpace::ProductSpace(SpinQuantum spin, SpinQuantum field) : spin_(spin), field_(field) {}

SparseMatrix ProductSpace::lift(const SparseMatrix& op, Factor which) const {
  const Eigen::Index ds = spin_.dimension();
  const Eigen::Index dj = field_.dimension();
  const Eigen::Index expected = which == Factor::spin ? ds : dj;
  if (op.rows() != expected || op.cols() != expected) {
    throw std::invalid_argument("lift: operator dimension " + std::to_string(op.rows()) + "x" +
                                std::to_string(op.cols()) + " does not match factor dimension " +
                                std::to_string(expected));
  }

  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(op.nonZeros() * (which == Factor::spin ? dj : ds)));
  for (Eigen::Index row = 0; row < op.outerSize(); ++row) {
    for (SparseMatrix::InnerIterator it(op, row); it; ++it) {
      if (which == Factor::spin) {
        for (Eigen::Index j = 0; j < dj; ++j) entries.emplace_back(index(it.row(), j), index(it.col(), j), it.value());
      } else {
        for (Eigen::Index i = 0; i < ds; ++i) entries.emplace_back(index(i, it.row()), index(i, it.col()), it.value());
      }
    }
  }
  return from_triplets(dim(), entries);
}

QuantumState::QuantumState(ProductSpace space, Vector amplitudes)
    : space_(space), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != space_.dim()) {
    throw std::invalid_argument("state has " + std::to_string(amplitudes_.size()) + " amplitudes, space needs " +
                                std::to_string(space_.dim()));
  }
  if (std::abs(amplitudes_.norm() - 1.0) > kNormTolerance) {
    throw std::invalid_argument("state is not normalized (norm " + std::to_string(amplitudes_.norm()) + ")");
  }
}

Eigen::MatrixXcd QuantumState::amplitude_matrix() const {
  using RowMajorMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  return Eigen::Map<const RowMajorMatrix>(amplitudes_.data(), space_.spin().dimension(), space_.field().dimension());
}

QuantumState product_state(const ProductSpace& space, const Vector& spin_part, const Vector& field_part) {
  if (spin_part.size() != space.spin().dimension() || field_part.size() != space.field().dimension()) {
    throw std::invalid_argument("product_state: factor dimensions do not match the product space");
  }
  if (std::abs(spin_part.norm() - 1.0) > QuantumState::kNormTolerance ||
      std::abs(field_part.norm() - 1.0) > QuantumState::kNormTolerance) {
    throw std::invalid_argument("product_state: factor states must be normalized");
  }
  Vector amplitudes(space.dim());
  for (Eigen::Index i = 0; i < spin_part.size(); ++i) {
    amplitudes.segment(space.index(i, 0), field_part.size()) = spin_part[i] * field_part;
  }
  return QuantumState(space, std::move(amplitudes));
}

}  // namespace spinswap
