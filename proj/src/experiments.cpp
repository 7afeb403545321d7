#include "spinswap/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <thread>

namespace spinswap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ModelParams time_scaled(const ModelParams& params) {
  if (params.alpha == 0.0) return params;
  return ModelParams{1.0, params.beta / params.alpha};
}

double expectation(const SparseMatrix& op, const Vector& psi) { return psi.dot(op * psi).real(); }

double r_or_nan(const SpinMoments& m) { return squeezing_ratio(m).value_or(kNaN); }

/// r(t) only; skips the entanglement measures that sweeps do not need.
std::vector<double> r_series(const SwapModel& model, const Propagator& propagator, std::span<const double> times) {
  std::vector<double> r(times.size(), kNaN);
  evolve_with(propagator, model.initial_state(), times, [&](std::size_t k, double, const Vector& psi, double) {
    r[k] = r_or_nan(spin_moments(psi, model.atoms()));
  });
  return r;
}

DynamicsSeries observe_series(const SwapModel& model, const Propagator& propagator, std::span<const double> times) {
  DynamicsSeries series;
  series.samples.reserve(times.size());
  evolve_with(propagator, model.initial_state(), times, [&](std::size_t, double t, const Vector& psi, double drift) {
    series.samples.push_back(model.observe(t, psi, drift));
  });
  return series;
}

std::unique_ptr<Propagator> propagator_for(const SwapModel& model, const PropagatorConfig& cfg) {
  check_hermitian(model.hamiltonian());
  return make_propagator(model.hamiltonian(), cfg);
}

std::optional<SqueezingMinimum> refine(std::span<const double> times, std::span<const double> r,
                                       const GridMinimum& grid, const ScalarFunction& r_at, double rel_tol) {
  SqueezingMinimum best{times[grid.index], r[grid.index], grid.index};
  if (!r_at || grid.lo == grid.hi) return best;
  const auto [t, value] = golden_section_minimize(r_at, times[grid.lo], times[grid.hi], rel_tol);
  if (value < best.r_min) {
    best.t_star = t;
    best.r_min = value;
  }
  return best;
}

/// Minimum search with the probe anchored at the bracket start so refinement
/// never restarts from t = 0.
template <typename Locate>
std::optional<SqueezingMinimum> locate_and_refine(std::span<const double> times, std::span<const double> r,
                                                  SqueezingProbe& probe, Locate locate) {
  const std::optional<GridMinimum> grid = locate(r);
  if (!grid) return std::nullopt;
  probe.anchor_at(times[grid->lo]);
  return refine(times, r, *grid, [&](double t) { return probe.r_at(t); }, 1e-4);
}

}  // namespace

// --- dynamics ------------------------------------------------------------

std::vector<double> DynamicsSeries::times() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.time);
  return out;
}

std::vector<double> DynamicsSeries::r_values() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.report.r.value_or(kNaN));
  return out;
}

SwapModel::SwapModel(SpinQuantum spin, SpinQuantum field, const ModelParams& params)
    : space_(spin, field),
      hamiltonian_(build_swap_hamiltonian(space_, time_scaled(params))),
      initial_(product_state(space_, coherent_state_x(spin), coherent_state_x(field)).amplitudes()),
      atoms_(LiftedSpin::atoms(space_)) {
  const SpinOperators j = build_spin_operators(field);
  const SpinOperators s = build_spin_operators(spin);
  imbalance_ = space_.lift(j.z, Factor::field) - space_.lift(s.z, Factor::spin);
}

DynamicsSample SwapModel::observe(double time, const Vector& psi, double norm_drift) const {
  DynamicsSample sample;
  sample.time = time;
  sample.moments = spin_moments(psi, atoms_);
  sample.report = squeezing_report(QuantumState(space_, psi), sample.moments, atoms_.spin);
  sample.norm_drift = norm_drift;
  sample.energy = expectation(hamiltonian_, psi);
  sample.imbalance = expectation(imbalance_, psi);
  return sample;
}

DynamicsSeries run_dynamics(SpinQuantum spin, SpinQuantum field, const ModelParams& params, const TimeGrid& grid,
                            const PropagatorConfig& cfg) {
  cfg.validate();
  const SwapModel model(spin, field, params);
  const std::vector<double> times = sample_times(grid.t_max, grid.dt);
  const auto propagator = propagator_for(model, cfg);
  return observe_series(model, *propagator, times);
}

SqueezingProbe::SqueezingProbe(const SwapModel& model, const Propagator& propagator)
    : model_(model), propagator_(propagator), anchor_state_(model.initial_state()) {}

void SqueezingProbe::anchor_at(double t) {
  if (t < anchor_time_) {
    anchor_time_ = 0.0;
    anchor_state_ = model_.initial_state();
  }
  if (t > anchor_time_) {
    anchor_state_ = propagator_.apply(anchor_state_, t - anchor_time_);
    anchor_time_ = t;
  }
}

Vector SqueezingProbe::state_at(double t) const {
  Vector psi = t >= anchor_time_ ? propagator_.apply(anchor_state_, t - anchor_time_)
                                 : propagator_.apply(model_.initial_state(), t);
  return psi / psi.norm();
}

double SqueezingProbe::r_at(double t) const { return r_or_nan(spin_moments(state_at(t), model_.atoms())); }

// --- minimum search ------------------------------------------------------

std::pair<double, double> golden_section_minimize(const ScalarFunction& f, double a, double b, double rel_tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > rel_tol * 0.5 * std::abs(a + b) && b - a > std::numeric_limits<double>::min()) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? std::pair{c, fc} : std::pair{d, fd};
}

std::optional<GridMinimum> first_squeezing_minimum_on_grid(std::span<const double> r) {
  const std::size_t n = r.size();
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (!std::isfinite(r[k]) || !(r[k] < 1.0) || !(r[k] < r[k - 1])) continue;
    std::size_t end = k;
    while (end + 1 < n && r[end + 1] == r[k]) ++end;
    if (end + 1 < n && r[end + 1] > r[k]) return GridMinimum{k, k - 1, end + 1};
    k = end;
  }
  return std::nullopt;
}

std::optional<GridMinimum> window_minimum_on_grid(std::span<const double> r) {
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (std::isfinite(r[k]) && (!best || r[k] < r[*best])) best = k;
  }
  if (!best) return std::nullopt;
  const std::size_t k = *best;
  return GridMinimum{k, k == 0 ? 0 : k - 1, std::min(k + 1, r.size() - 1)};
}

std::optional<SqueezingMinimum> find_t_star(std::span<const double> times, std::span<const double> r,
                                            const ScalarFunction& r_at, double rel_tol) {
  if (times.size() != r.size()) throw std::invalid_argument("find_t_star: times and r differ in length");
  const auto grid = first_squeezing_minimum_on_grid(r);
  if (!grid) return std::nullopt;
  return refine(times, r, *grid, r_at, rel_tol);
}

std::optional<SqueezingMinimum> find_window_minimum(std::span<const double> times, std::span<const double> r,
                                                    const ScalarFunction& r_at, double rel_tol) {
  if (times.size() != r.size()) throw std::invalid_argument("find_window_minimum: times and r differ in length");
  const auto grid = window_minimum_on_grid(r);
  if (!grid) return std::nullopt;
  const bool interior = grid->index > 0 && grid->index + 1 < r.size();
  return refine(times, r, *grid, interior ? r_at : ScalarFunction{}, rel_tol);
}

// --- fits ----------------------------------------------------------------

LogLogFit fit_log_log(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_log_log: x and y differ in length");
  if (x.size() < 2) throw std::invalid_argument("fit_log_log: need at least two points");
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("fit_log_log: values must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_log_log: x values are all equal");

  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  fit.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    fit.residuals[i] = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ssr += fit.residuals[i] * fit.residuals[i];
  }
  fit.slope_stderr = n > 2 ? std::sqrt(ssr / static_cast<double>(n - 2) / sxx) : 0.0;
  return fit;
}

// --- sweeps --------------------------------------------------------------

void SweepSpec::validate() const {
  if (values.empty()) throw std::invalid_argument("sweep: no values");
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i].two_s() <= values[i - 1].two_s()) throw std::invalid_argument("sweep: values must be strictly increasing");
  }
  if (fixed.has_value() == ratio_locked.has_value()) {
    throw std::invalid_argument("sweep: give exactly one of a fixed quantum number or a locked J/S ratio");
  }
  if (ratio_locked && !(*ratio_locked > Rational(0))) throw std::invalid_argument("sweep: J/S ratio must be positive");
  if (!(t_max > 0.0)) throw std::invalid_argument("sweep: t_max must be > 0");
  if (!(dt > 0.0)) throw std::invalid_argument("sweep: dt must be > 0");
  propagator.validate();
  for (std::size_t i = 0; i < values.size(); ++i) point(i);
}

std::pair<SpinQuantum, SpinQuantum> SweepSpec::point(std::size_t i) const {
  const SpinQuantum swept = values.at(i);
  if (fixed) return variable == SweepVariable::field ? std::pair{*fixed, swept} : std::pair{swept, *fixed};

  // two_j = ratio * two_s must be an integer, and conversely.
  const Rational ratio = variable == SweepVariable::field ? Rational(1) / *ratio_locked : *ratio_locked;
  const Rational other = ratio * Rational(swept.two_s());
  if (other.den() != 1) {
    throw std::invalid_argument("sweep: J/S ratio " + ratio_locked->to_string() +
                                " gives a non-integer 2S or 2J for value two_s=" + std::to_string(swept.two_s()));
  }
  const SpinQuantum partner(static_cast<int>(other.num()));
  return variable == SweepVariable::field ? std::pair{partner, swept} : std::pair{swept, partner};
}

TimeGrid SweepSpec::grid_for(SpinQuantum field) const {
  if (!time_in_field_units) return TimeGrid{t_max, dt};
  if (field.two_s() == 0) throw std::invalid_argument("sweep: time in units of J needs J > 0");
  return TimeGrid{t_max / field.value(), dt / field.value()};
}

NoSqueezingError::NoSqueezingError(SpinQuantum spin, SpinQuantum field)
    : std::runtime_error("no squeezing minimum found for two_s=" + std::to_string(spin.two_s()) +
                         ", two_j=" + std::to_string(field.two_s()) + " within the time window"),
      two_s(spin.two_s()),
      two_j(field.two_s()) {}

namespace {

SweepRow compute_point(const SweepSpec& spec, std::size_t i) {
  const auto [spin, field] = spec.point(i);
  const SwapModel model(spin, field, spec.params);
  const auto propagator = propagator_for(model, spec.propagator);
  const TimeGrid grid = spec.grid_for(field);
  const std::vector<double> times = sample_times(grid.t_max, grid.dt);
  const std::vector<double> r = r_series(model, *propagator, times);

  SqueezingProbe probe(model, *propagator);
  const auto first = locate_and_refine(times, r, probe, first_squeezing_minimum_on_grid);
  if (!first) throw NoSqueezingError(spin, field);

  SweepRow row;
  row.param = (spec.variable == SweepVariable::field ? field : spin).value();
  row.two_s = spin.two_s();
  row.two_j = field.two_s();
  row.t_star = first->t_star;
  row.r_at_t_star = first->r_min;
  row.r_min = first->r_min;
  row.t_r_min = first->t_star;
  if (spec.rmin_mode == RminMode::window_minimum) {
    const auto window = locate_and_refine(times, r, probe, window_minimum_on_grid);
    if (window && window->r_min < row.r_min) {
      row.r_min = window->r_min;
      row.t_r_min = window->t_star;
    }
  }
  return row;
}

}  // namespace

std::vector<SweepRow> run_sweep_points(const SweepSpec& spec) {
  spec.validate();
  const std::size_t n = spec.values.size();
  std::vector<SweepRow> rows(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        rows[i] = compute_point(spec, i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t pool = std::min<std::size_t>(n, spec.threads == 0 ? hw : spec.threads);
  if (pool <= 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(pool);
    for (std::size_t t = 0; t < pool; ++t) threads.emplace_back(worker);
  }
  // Report the first failure in parameter order, independent of scheduling.
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

namespace {

SweepResult fit_rows(std::vector<SweepRow> rows, bool use_t_star) {
  std::vector<double> x, y;
  for (const auto& row : rows) {
    x.push_back(row.param);
    y.push_back(use_t_star ? row.t_star : row.r_min);
  }
  SweepResult result;
  result.fit = fit_log_log(x, y);
  result.rows = std::move(rows);
  return result;
}

}  // namespace

SweepResult sweep_t_star_vs_J(const SweepSpec& spec) {
  if (spec.variable != SweepVariable::field) throw std::invalid_argument("t* sweep must vary J");
  return fit_rows(run_sweep_points(spec), true);
}

SweepResult sweep_rmin_vs_S(const SweepSpec& spec) {
  if (spec.variable != SweepVariable::spin) throw std::invalid_argument("r_min sweep must vary S");
  return fit_rows(run_sweep_points(spec), false);
}

// --- perturbation --------------------------------------------------------

std::vector<PerturbationOutcome> perturbation_study(SpinQuantum spin, SpinQuantum field, double alpha,
                                                    std::span<const double> betas, const TimeGrid& grid,
                                                    const PropagatorConfig& cfg) {
  cfg.validate();
  const std::vector<double> times = sample_times(grid.t_max, grid.dt);
  std::vector<PerturbationOutcome> out;
  out.reserve(betas.size());
  for (double beta : betas) {
    const SwapModel model(spin, field, ModelParams{alpha, beta});
    const auto propagator = propagator_for(model, cfg);
    PerturbationOutcome outcome;
    outcome.beta = beta;
    outcome.series = observe_series(model, *propagator, times);

    const std::vector<double> r = outcome.series.r_values();
    SqueezingProbe probe(model, *propagator);
    outcome.t_star = locate_and_refine(times, r, probe, first_squeezing_minimum_on_grid);
    outcome.window_minimum = locate_and_refine(times, r, probe, window_minimum_on_grid);

    double peak = kNaN;
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (outcome.t_star && !(times[k] < outcome.t_star->t_star)) break;
      if (std::isfinite(r[k]) && !(r[k] <= peak)) peak = r[k];
    }
    outcome.max_r_before_t_star = peak;
    out.push_back(std::move(outcome));
  }
  return out;
}

// --- one-axis twisting ---------------------------------------------------

double ku_analytic_sx(SpinQuantum spin, double alpha_t) {
  if (spin.two_s() == 0) return 0.0;
  return spin.value() * std::pow(std::cos(alpha_t), spin.two_s() - 1);
}

KuComparison ku_comparison(SpinQuantum spin, SpinQuantum field, double alpha, const TimeGrid& grid,
                           const PropagatorConfig& cfg) {
  if (!(alpha > 0.0)) throw std::invalid_argument("ku_comparison: alpha must be > 0");
  cfg.validate();
  KuComparison out;
  out.times = sample_times(grid.t_max, grid.dt);

  const SwapModel swap(spin, field, ModelParams{alpha, 0.0});
  evolve_observed(swap.initial_state(), swap.hamiltonian(), out.times, cfg,
                  [&](std::size_t, double, const Vector& psi, double) {
                    out.swap_mean.push_back(spin_moments(psi, swap.atoms()).mean);
                  });

  // The baseline acts on the spin alone: a product space with a trivial J = 0 factor.
  const ProductSpace spin_only(spin, SpinQuantum(0));
  const LiftedSpin ops = LiftedSpin::atoms(spin_only);
  const SparseMatrix h_ku = build_ku_hamiltonian(spin, 1.0);
  evolve_observed(coherent_state_x(spin), h_ku, out.times, cfg, [&](std::size_t, double, const Vector& psi, double) {
    out.ku_mean.push_back(spin_moments(psi, ops).mean);
  });

  for (std::size_t k = 0; k < out.times.size(); ++k) {
    out.ku_analytic_sx.push_back(ku_analytic_sx(spin, out.times[k]));
    out.max_analytic_deviation =
        std::max(out.max_analytic_deviation, std::abs(out.ku_mean[k].x() - out.ku_analytic_sx.back()));
  }
  return out;
}

std::optional<double> dominant_frequency(std::span<const double> trace, double dt, double noise_floor) {
  if (trace.size() < 4) return std::nullopt;
  double peak = 0.0;
  for (double v : trace) peak = std::max(peak, std::abs(v));
  if (!(peak > noise_floor)) return std::nullopt;

  const std::size_t n = trace.size();
  double mean = 0.0;
  for (double v : trace) mean += v;
  mean /= static_cast<double>(n);

  std::size_t best_k = 0;
  double best_power = -1.0;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      const double phase = -2.0 * std::numbers::pi * static_cast<double>(k * i) / static_cast<double>(n);
      acc += (trace[i] - mean) * std::polar(1.0, phase);
    }
    if (std::norm(acc) > best_power) {
      best_power = std::norm(acc);
      best_k = k;
    }
  }
  return static_cast<double>(best_k) / (static_cast<double>(n) * dt);
}

}  // namespace spinswap
