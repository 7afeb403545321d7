#include "spinswap/hamiltonian.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace spinswap {

SparseMatrix build_swap_hamiltonian(const ProductSpace& space, const ModelParams& params) {
  const SpinOperators s = build_spin_operators(space.spin());
  const SpinOperators j = build_spin_operators(space.field());

  const SparseMatrix s_plus = space.lift(s.plus, Factor::spin);
  const SparseMatrix s_minus = space.lift(s.minus, Factor::spin);
  const SparseMatrix j_plus = space.lift(j.plus, Factor::field);
  const SparseMatrix j_minus = space.lift(j.minus, Factor::field);

  SparseMatrix h = SparseMatrix(j_plus * s_plus + j_minus * s_minus) * Complex(params.alpha, 0.0);
  if (params.beta != 0.0) {
    const SparseMatrix s_z = space.lift(s.z, Factor::spin);
    const SparseMatrix j_z = space.lift(j.z, Factor::field);
    h += SparseMatrix(j_z * s_z) * Complex(params.beta, 0.0);
  }
  h.prune(Complex(0.0, 0.0));
  h.makeCompressed();
  return h;
}

SparseMatrix build_ku_hamiltonian(SpinQuantum s, double alpha) {
  std::vector<Eigen::Triplet<Complex>> entries;
  for (Eigen::Index i = 0; i < s.dimension(); ++i) {
    const double m = s.magnetic(i);
    entries.emplace_back(i, i, Complex(alpha * m * m, 0.0));
  }
  SparseMatrix h(s.dimension(), s.dimension());
  h.setFromTriplets(entries.begin(), entries.end());
  h.makeCompressed();
  return h;
}

double DipoleCoupling::value() const { return sign * std::sqrt(strength.to_double()); }

LevelScheme LevelScheme::rubidium87(Rational delta, Rational Delta) {
  const Rational to_e1(1, 6);
  const Rational to_e2(5, 24);
  return LevelScheme{
      .g_minus_e1 = {to_e1, +1},
      .g_minus_e2 = {to_e2, +1},
      .g_plus_e1 = {to_e1, +1},
      .g_plus_e2 = {to_e2, -1},
      .delta = delta,
      .Delta = Delta,
  };
}

namespace {

void check_detunings(const LevelScheme& ls) {
  if (ls.delta.is_zero() || ls.Delta.is_zero()) throw std::invalid_argument("level scheme: zero detuning");
  if (ls.delta < Rational(0) || ls.Delta < Rational(0)) {
    throw std::invalid_argument("level scheme: detunings must be positive");
  }
}

}  // namespace

EffectiveCouplings effective_couplings(const LevelScheme& ls) {
  check_detunings(ls);
  EffectiveCouplings out;
  out.diag_minus = ls.g_minus_e1.strength / ls.delta - ls.g_minus_e2.strength / ls.Delta;
  out.diag_plus = ls.g_plus_e1.strength / ls.delta - ls.g_plus_e2.strength / ls.Delta;

  // g*_{-,e} g_{+,e} = s_- s_+ sqrt(q_- q_+); exact when both strengths agree.
  auto product = [](const DipoleCoupling& a, const DipoleCoupling& b) {
    const double magnitude =
        a.strength == b.strength ? a.strength.to_double() : std::sqrt((a.strength * b.strength).to_double());
    return a.sign * b.sign * magnitude;
  };
  out.offdiag = product(ls.g_minus_e1, ls.g_plus_e1) / ls.delta.to_double() -
                product(ls.g_minus_e2, ls.g_plus_e2) / ls.Delta.to_double();
  return out;
}

Rational detuning_ratio_for_cancellation(const LevelScheme& ls) {
  if (ls.g_minus_e2.strength.is_zero() || ls.g_plus_e2.strength.is_zero()) {
    throw std::invalid_argument("level scheme: g_e2 couplings must be nonzero");
  }
  const Rational plus = ls.g_plus_e1.strength / ls.g_plus_e2.strength;
  const Rational minus = ls.g_minus_e1.strength / ls.g_minus_e2.strength;
  if (!(plus == minus)) {
    throw std::invalid_argument("level scheme: |g_e1|^2/|g_e2|^2 differs between branches (" + minus.to_string() +
                                " vs " + plus.to_string() + "); the diagonal terms cannot cancel together");
  }
  return plus;
}

}  // namespace spinswap
