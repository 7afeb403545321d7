#pragma once

#include "spinswap/algebra.hpp"
#include "spinswap/rational.hpp"

namespace spinswap {

/// Coupling constants of the swap model. alpha sets the inverse time unit.
struct ModelParams {
  double alpha = 1.0;
  double beta = 0.0;  // strength of the diagonal Jz Sz perturbation
};

/// alpha (J+ S+ + J- S-) + beta Jz Sz on the atom (x) light space.
SparseMatrix build_swap_hamiltonian(const ProductSpace& space, const ModelParams& params);

/// One-axis twisting baseline alpha Sz^2 on the spin factor alone.
SparseMatrix build_ku_hamiltonian(SpinQuantum s, double alpha);

/// Dipole coupling of the form sign * sqrt(strength), strength an exact fraction.
struct DipoleCoupling {
  Rational strength;
  int sign = 1;

  double value() const;
};

/// Two-ground-state / two-excited-state level scheme driven by sigma+ and sigma- light.
/// Detunings are positive and share a frequency unit.
struct LevelScheme {
  DipoleCoupling g_minus_e1;
  DipoleCoupling g_minus_e2;
  DipoleCoupling g_plus_e1;
  DipoleCoupling g_plus_e2;
  Rational delta;        // detuning of the F'=0 manifold
  Rational Delta;        // detuning of the F'=1 manifold

  /// F=1, m_F=+-1 of the 87Rb D2 line coupled to F'=0 and F'=1, m_F'=0.
  static LevelScheme rubidium87(Rational delta, Rational Delta);
};

/// Coefficients of the three terms of the adiabatically eliminated coupling.
/// The diagonal pair is exact; the off-diagonal term involves products of
/// square roots and is reported in floating point.
struct EffectiveCouplings {
  Rational diag_minus;
  Rational diag_plus;
  double offdiag = 0.0;
};

EffectiveCouplings effective_couplings(const LevelScheme& ls);

/// delta/Delta at which both diagonal coefficients vanish.
/// Throws if the two branches need different ratios or a g_e2 coupling is zero.
Rational detuning_ratio_for_cancellation(const LevelScheme& ls);

}  // namespace spinswap
