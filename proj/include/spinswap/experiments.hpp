#pragma once

// Figure-level studies of the swap model: dynamics traces, time of maximum
// squeezing, power-law sweeps, perturbation robustness and the one-axis
// twisting comparison. All times are dimensionless (alpha t).

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinswap/hamiltonian.hpp"
#include "spinswap/observables.hpp"
#include "spinswap/propagate.hpp"
#include "spinswap/rational.hpp"

namespace spinswap {

struct TimeGrid {
  double t_max = 1.0;
  double dt = 0.01;
};

struct DynamicsSample {
  double time = 0.0;
  SpinMoments moments;
  SqueezingReport report;
  double norm_drift = 0.0;  // before renormalization
  double energy = 0.0;      // <H> of the time-scaled Hamiltonian
  double imbalance = 0.0;   // <Jz - Sz>
};

struct DynamicsSeries {
  std::vector<DynamicsSample> samples;

  std::vector<double> times() const;
  /// r(t) with NaN where the ratio is undefined.
  std::vector<double> r_values() const;
};

/// The swap Hamiltonian rescaled so that time is measured in units of 1/alpha,
/// together with the x-polarized product initial state and the operators the
/// observers need. With alpha = 0 the bare perturbation is used unscaled.
class SwapModel {
public:
  SwapModel(SpinQuantum spin, SpinQuantum field, const ModelParams& params);

  const ProductSpace& space() const noexcept { return space_; }
  const SparseMatrix& hamiltonian() const noexcept { return hamiltonian_; }
  const Vector& initial_state() const noexcept { return initial_; }
  const LiftedSpin& atoms() const noexcept { return atoms_; }

  DynamicsSample observe(double time, const Vector& psi, double norm_drift) const;

private:
  ProductSpace space_;
  SparseMatrix hamiltonian_;
  Vector initial_;
  LiftedSpin atoms_;
  SparseMatrix imbalance_;
};

DynamicsSeries run_dynamics(SpinQuantum spin, SpinQuantum field, const ModelParams& params, const TimeGrid& grid,
                            const PropagatorConfig& cfg);

/// Evaluates r(t) at arbitrary times by propagating from a cached anchor state.
/// Evaluations at t >= anchor start from the anchor; earlier times restart from t = 0.
class SqueezingProbe {
public:
  SqueezingProbe(const SwapModel& model, const Propagator& propagator);

  void anchor_at(double t);
  Vector state_at(double t) const;
  double r_at(double t) const;

private:
  const SwapModel& model_;
  const Propagator& propagator_;
  double anchor_time_ = 0.0;
  Vector anchor_state_;
};

/// Index of a grid minimum and the bracket [lo, hi] of grid indices around it.
struct GridMinimum {
  std::size_t index = 0;
  std::size_t lo = 0;
  std::size_t hi = 0;
};

/// First interior local minimum with r < 1. A grid point qualifies when it is
/// strictly below both neighbours; a flat run of equal values qualifies at its
/// earliest point when both outer neighbours are higher. NaN never qualifies.
std::optional<GridMinimum> first_squeezing_minimum_on_grid(std::span<const double> r);

/// Smallest finite r on the grid, bracketed by its neighbours.
std::optional<GridMinimum> window_minimum_on_grid(std::span<const double> r);

struct SqueezingMinimum {
  double t_star = 0.0;
  double r_min = 0.0;
  std::size_t grid_index = 0;
};

using ScalarFunction = std::function<double(double)>;

/// Golden-section minimization of f on [a, b] down to (b - a) <= rel_tol * (a + b) / 2.
std::pair<double, double> golden_section_minimize(const ScalarFunction& f, double a, double b, double rel_tol);

/// Time of maximum squeezing: the grid minimum from first_squeezing_minimum_on_grid,
/// refined by golden section on its bracket when r_at is given (never worse than
/// the grid value). Returns nullopt when no squeezing minimum exists.
std::optional<SqueezingMinimum> find_t_star(std::span<const double> times, std::span<const double> r,
                                            const ScalarFunction& r_at = {}, double rel_tol = 1e-4);

/// Smallest r over the whole sampled window, refined like find_t_star when interior.
std::optional<SqueezingMinimum> find_window_minimum(std::span<const double> times, std::span<const double> r,
                                                    const ScalarFunction& r_at = {}, double rel_tol = 1e-4);

struct LogLogFit {
  double slope = 0.0;
  double slope_stderr = 0.0;
  double intercept = 0.0;
  std::vector<double> residuals;  // ln y - (intercept + slope ln x)
};

/// Ordinary least squares of ln y against ln x. Needs at least two points.
LogLogFit fit_log_log(std::span<const double> x, std::span<const double> y);

enum class SweepVariable { field, spin };

/// Which minimum of r(t) a sweep reports as r_min.
enum class RminMode {
  first_minimum,   // r at t*, the first squeezing minimum
  window_minimum,  // smallest r over the whole time window
};

struct SweepSpec {
  SweepVariable variable = SweepVariable::field;
  std::vector<SpinQuantum> values;
  std::optional<SpinQuantum> fixed;     // the other quantum number, or
  std::optional<Rational> ratio_locked;  // J/S held fixed
  ModelParams params;
  double t_max = 1.0;
  double dt = 0.01;
  bool time_in_field_units = false;  // t_max and dt given in units of J alpha t
  RminMode rmin_mode = RminMode::first_minimum;
  PropagatorConfig propagator;
  unsigned threads = 0;  // 0 picks the hardware concurrency

  void validate() const;
  /// (S, J) of sweep point i.
  std::pair<SpinQuantum, SpinQuantum> point(std::size_t i) const;
  TimeGrid grid_for(SpinQuantum field) const;
};

struct SweepRow {
  double param = 0.0;
  int two_s = 0;
  int two_j = 0;
  double t_star = 0.0;
  double r_at_t_star = 0.0;
  double r_min = 0.0;
  double t_r_min = 0.0;  // where r_min was found; equals t_star in first_minimum mode
};

struct SweepResult {
  std::vector<SweepRow> rows;
  LogLogFit fit;
};

class NoSqueezingError : public std::runtime_error {
public:
  NoSqueezingError(SpinQuantum spin, SpinQuantum field);
  int two_s;
  int two_j;
};

/// Per-point t* and r_min for every sweep point, in parameter order.
std::vector<SweepRow> run_sweep_points(const SweepSpec& spec);

SweepResult sweep_t_star_vs_J(const SweepSpec& spec);
SweepResult sweep_rmin_vs_S(const SweepSpec& spec);

struct PerturbationOutcome {
  double beta = 0.0;
  DynamicsSeries series;
  std::optional<SqueezingMinimum> t_star;
  std::optional<SqueezingMinimum> window_minimum;
  double max_r_before_t_star = 0.0;  // over samples strictly before t*
};

std::vector<PerturbationOutcome> perturbation_study(SpinQuantum spin, SpinQuantum field, double alpha,
                                                    std::span<const double> betas, const TimeGrid& grid,
                                                    const PropagatorConfig& cfg);

struct KuComparison {
  std::vector<double> times;
  std::vector<Eigen::Vector3d> swap_mean;
  std::vector<Eigen::Vector3d> ku_mean;
  std::vector<double> ku_analytic_sx;  // S cos^(2S-1)(alpha t)
  double max_analytic_deviation = 0.0;
};

/// The one-axis twisting <Sx>(t) = S cos^(2S-1)(alpha t).
double ku_analytic_sx(SpinQuantum spin, double alpha_t);

KuComparison ku_comparison(SpinQuantum spin, SpinQuantum field, double alpha, const TimeGrid& grid,
                           const PropagatorConfig& cfg);

/// Frequency (cycles per unit time) of the largest non-DC Fourier component of
/// a uniformly sampled trace, or nullopt when the trace never exceeds noise_floor.
std::optional<double> dominant_frequency(std::span<const double> trace, double dt, double noise_floor);

}  // namespace spinswap
