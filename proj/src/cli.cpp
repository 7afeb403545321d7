#include "spinswap/cli.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>

#include "CLI11.hpp"

#include "spinswap/experiments.hpp"
#include "spinswap/hamiltonian.hpp"
#include "spinswap/output.hpp"

namespace spinswap {

namespace {

const std::map<std::string, Command> kCommands = {
    {"dynamics", Command::dynamics},       {"sweep-tstar", Command::sweep_tstar},
    {"sweep-rmin", Command::sweep_rmin},   {"perturb", Command::perturb},
    {"ku-compare", Command::ku_compare},   {"levelscheme", Command::levelscheme},
};

const std::map<std::string, PropagationMethod> kMethods = {
    {"auto", PropagationMethod::automatic},
    {"dense", PropagationMethod::dense_eig},
    {"krylov", PropagationMethod::krylov},
};

std::string method_name(PropagationMethod m) {
  for (const auto& [name, value] : kMethods) {
    if (value == m) return name;
  }
  return "auto";
}

const std::set<std::string> kPropagatorOptions = {"--method", "--dense-threshold", "--krylov-max-dim",
                                                  "--step-tolerance", "--dt", "--t-max", "--alpha", "--output"};

// Options each command accepts beyond the propagator/time/output group.
std::set<std::string> allowed_options(Command c) {
  std::set<std::string> base = kPropagatorOptions;
  auto with = [&](std::initializer_list<const char*> extra) {
    for (const char* e : extra) base.insert(e);
    return base;
  };
  switch (c) {
    case Command::dynamics:
      return with({"--two-s", "--two-j", "--beta"});
    case Command::ku_compare:
      return with({"--two-s", "--two-j"});
    case Command::perturb:
      return with({"--two-s", "--two-j", "--betas"});
    case Command::sweep_tstar:
      return with({"--beta", "--values", "--ratio", "--fixed-two-s", "--time-in-j-units", "--threads"});
    case Command::sweep_rmin:
      return with({"--beta", "--values", "--ratio", "--fixed-two-j", "--time-in-j-units", "--threads", "--rmin-mode"});
    case Command::levelscheme:
      return {"--delta", "--Delta", "--output"};
  }
  return {};
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void validate(const RunConfig& cfg, const CLI::App& app) {
  const Command c = cfg.command;
  const std::string name = to_string(c);
  const std::set<std::string> allowed = allowed_options(c);
  for (const CLI::Option* opt : app.get_options()) {
    if (opt->get_positional() || opt->count() == 0) continue;
    const std::string flag = "--" + opt->get_single_name();
    if (flag == "--config" || flag == "--help") continue;
    require(allowed.count(flag) == 1, "option " + flag + " is not valid for command '" + name + "'");
  }
  auto given = [&](const char* flag) { return app.get_option(flag)->count() > 0; };

  if (c == Command::levelscheme) {
    try {
      const Rational d = Rational::parse(cfg.delta);
      const Rational D = Rational::parse(cfg.Delta);
      require(d > Rational(0) && D > Rational(0), "--delta and --Delta must be positive");
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("levelscheme: ") + e.what());
    }
    return;
  }

  require(given("--output"), "command '" + name + "' requires --output");
  require(given("--t-max"), "command '" + name + "' requires --t-max");
  require(cfg.t_max > 0.0, "--t-max must be > 0");
  require(cfg.dt > 0.0, "--dt must be > 0");
  require(cfg.dt <= cfg.t_max, "--dt must not exceed --t-max");
  require(cfg.alpha >= 0.0, "--alpha must be >= 0");
  try {
    cfg.propagator.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  switch (c) {
    case Command::dynamics:
      require(cfg.alpha > 0.0 || cfg.beta != 0.0, "--alpha = 0 needs a nonzero --beta (pure-perturbation run)");
      [[fallthrough]];
    case Command::ku_compare:
    case Command::perturb:
      require(given("--two-s") && given("--two-j"), "command '" + name + "' requires --two-s and --two-j");
      require(cfg.two_s >= 0 && cfg.two_j >= 0, "--two-s and --two-j must be >= 0");
      if (c != Command::dynamics) require(cfg.alpha > 0.0, "--alpha must be > 0");
      if (c == Command::perturb) require(!cfg.betas.empty(), "command 'perturb' requires --betas");
      break;
    case Command::sweep_tstar:
    case Command::sweep_rmin: {
      require(cfg.alpha > 0.0, "--alpha must be > 0");
      require(!cfg.values.empty(), "command '" + name + "' requires --values");
      const bool fixed = c == Command::sweep_tstar ? cfg.fixed_two_s.has_value() : cfg.fixed_two_j.has_value();
      require(fixed != cfg.ratio.has_value(), "command '" + name + "' needs exactly one of --ratio or " +
                                                  (c == Command::sweep_tstar ? "--fixed-two-s" : "--fixed-two-j"));
      require(std::all_of(cfg.values.begin(), cfg.values.end(), [](int v) { return v > 0; }),
              "--values must be positive");
      require(std::is_sorted(cfg.values.begin(), cfg.values.end()) &&
                  std::adjacent_find(cfg.values.begin(), cfg.values.end()) == cfg.values.end(),
              "--values must be strictly increasing");
      require(cfg.rmin_mode == "window" || cfg.rmin_mode == "first", "--rmin-mode must be 'window' or 'first'");
      if (cfg.ratio) {
        try {
          require(Rational::parse(*cfg.ratio) > Rational(0), "--ratio must be positive");
        } catch (const std::invalid_argument& e) {
          throw ConfigError(std::string("--ratio: ") + e.what());
        }
      }
      break;
    }
    case Command::levelscheme:
      break;
  }
}

SweepSpec sweep_spec(const RunConfig& cfg) {
  SweepSpec spec;
  spec.variable = cfg.command == Command::sweep_tstar ? SweepVariable::field : SweepVariable::spin;
  for (int v : cfg.values) spec.values.emplace_back(v);
  if (cfg.fixed_two_s) spec.fixed = SpinQuantum(*cfg.fixed_two_s);
  if (cfg.fixed_two_j) spec.fixed = SpinQuantum(*cfg.fixed_two_j);
  if (cfg.ratio) spec.ratio_locked = Rational::parse(*cfg.ratio);
  spec.params = ModelParams{cfg.alpha, cfg.beta};
  spec.t_max = cfg.t_max;
  spec.dt = cfg.dt;
  spec.time_in_field_units = cfg.time_in_j_units;
  spec.rmin_mode = cfg.rmin_mode == "first" ? RminMode::first_minimum : RminMode::window_minimum;
  spec.propagator = cfg.propagator;
  spec.threads = cfg.threads;
  return spec;
}

void run_levelscheme(const RunConfig& cfg, std::ostream& out) {
  const LevelScheme ls = LevelScheme::rubidium87(Rational::parse(cfg.delta), Rational::parse(cfg.Delta));
  const EffectiveCouplings k = effective_couplings(ls);
  const Rational ratio = detuning_ratio_for_cancellation(ls);
  const Rational given = ls.delta / ls.Delta;

  out << "delta/Delta = " << given << " (" << format_double(given.to_double()) << ")\n"
      << "cancellation delta/Delta = " << ratio << " (" << format_double(ratio.to_double()) << ")\n"
      << "diag_minus = " << k.diag_minus << " (" << format_double(k.diag_minus.to_double()) << ")\n"
      << "diag_plus = " << k.diag_plus << " (" << format_double(k.diag_plus.to_double()) << ")\n"
      << "offdiag = " << format_double(k.offdiag) << "\n";

  if (!cfg.output_path.empty()) {
    const nlohmann::json doc = {{"delta", ls.delta.to_string()},
                                {"Delta", ls.Delta.to_string()},
                                {"cancellation_ratio", ratio.to_string()},
                                {"diag_minus", k.diag_minus.to_string()},
                                {"diag_plus", k.diag_plus.to_string()},
                                {"offdiag", k.offdiag}};
    write_atomically(cfg.output_path, doc.dump(2) + "\n");
    write_atomically(sibling_path(cfg.output_path, ".meta.jsonl"), metadata_jsonl(cfg.to_json()));
  }
}

void run_perturb(const RunConfig& cfg, std::ostream& out) {
  const std::filesystem::path path = cfg.output_path;
  const auto outcomes = perturbation_study(SpinQuantum(cfg.two_s), SpinQuantum(cfg.two_j), cfg.alpha, cfg.betas,
                                           TimeGrid{cfg.t_max, cfg.dt}, cfg.propagator);
  std::string summary = "beta,t_star,r_min,r_min_window,max_r_before_t_star\n";
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    const double nan = std::nan("");
    summary += format_double(o.beta) + ',' + format_double(o.t_star ? o.t_star->t_star : nan) + ',' +
               format_double(o.t_star ? o.t_star->r_min : nan) + ',' +
               format_double(o.window_minimum ? o.window_minimum->r_min : nan) + ',' +
               format_double(o.max_r_before_t_star) + '\n';
    write_atomically(sibling_path(path, ".beta" + std::to_string(i) + ".csv"), timeseries_csv(o.series));
  }
  write_atomically(path, summary);
  write_atomically(sibling_path(path, ".meta.jsonl"), metadata_jsonl(cfg.to_json()));
  out << summary;
}

void run_ku_compare(const RunConfig& cfg, std::ostream& out) {
  const KuComparison ku = ku_comparison(SpinQuantum(cfg.two_s), SpinQuantum(cfg.two_j), cfg.alpha,
                                        TimeGrid{cfg.t_max, cfg.dt}, cfg.propagator);
  std::string csv = "alpha_t,Sx,Sy,Sz,Sx_ku,Sy_ku,Sz_ku,Sx_ku_analytic\n";
  for (std::size_t k = 0; k < ku.times.size(); ++k) {
    const double fields[] = {ku.times[k],       ku.swap_mean[k].x(), ku.swap_mean[k].y(), ku.swap_mean[k].z(),
                             ku.ku_mean[k].x(), ku.ku_mean[k].y(),   ku.ku_mean[k].z(),   ku.ku_analytic_sx[k]};
    for (std::size_t f = 0; f < std::size(fields); ++f) {
      if (f > 0) csv += ',';
      csv += format_double(fields[f]);
    }
    csv += '\n';
  }
  write_atomically(cfg.output_path, csv);
  write_atomically(sibling_path(cfg.output_path, ".meta.jsonl"), metadata_jsonl(cfg.to_json()));
  out << "max |<Sx>_ku - S cos^(2S-1)(alpha t)| = " << format_double(ku.max_analytic_deviation) << "\n";
}

}  // namespace

std::string to_string(Command command) {
  for (const auto& [name, value] : kCommands) {
    if (value == command) return name;
  }
  return "unknown";
}

nlohmann::json RunConfig::to_json() const {
  auto opt = [](const auto& o) { return o ? nlohmann::json(*o) : nlohmann::json(nullptr); };
  return {
      {"command", to_string(command)},
      {"two_s", two_s},
      {"two_j", two_j},
      {"alpha", alpha},
      {"beta", beta},
      {"t_max", t_max},
      {"dt", dt},
      {"method", method_name(propagator.method)},
      {"dense_threshold", propagator.dense_threshold},
      {"krylov_max_dim", propagator.krylov_max_dim},
      {"step_tolerance", propagator.step_tolerance},
      {"output", output_path},
      {"values", values},
      {"fixed_two_s", opt(fixed_two_s)},
      {"fixed_two_j", opt(fixed_two_j)},
      {"ratio", opt(ratio)},
      {"time_in_j_units", time_in_j_units},
      {"rmin_mode", rmin_mode},
      {"threads", threads},
      {"betas", betas},
      {"delta", delta},
      {"Delta", Delta},
  };
}

RunConfig parse_config(int argc, const char* const* argv) {
  RunConfig cfg;
  std::string command;
  std::string method = "auto";
  int dense_threshold = static_cast<int>(cfg.propagator.dense_threshold);
  int fixed_two_s = 0;
  int fixed_two_j = 0;
  std::string ratio;

  CLI::App app{"Spin squeezing by continuous entanglement swapping: dynamics, sweeps and diagnostics.", "spinswap"};
  app.set_config("--config", "", "Read `key = value` lines; command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);

  app.add_option("command", command, "dynamics | sweep-tstar | sweep-rmin | perturb | ku-compare | levelscheme")
      ->required()
      ->check(CLI::IsMember(kCommands));
  app.add_option("--two-s", cfg.two_s, "Twice the atomic spin S");
  app.add_option("--two-j", cfg.two_j, "Twice the Schwinger spin J of the light");
  app.add_option("--alpha", cfg.alpha, "Swap coupling; sets the time unit")->capture_default_str();
  app.add_option("--beta", cfg.beta, "Diagonal Jz Sz perturbation strength")->capture_default_str();
  app.add_option("--t-max", cfg.t_max, "Length of the time window (units of 1/alpha)");
  app.add_option("--dt", cfg.dt, "Sampling interval (units of 1/alpha)")->capture_default_str();
  app.add_option("--method", method, "Propagator: auto | dense | krylov")
      ->check(CLI::IsMember(kMethods))
      ->capture_default_str();
  app.add_option("--dense-threshold", dense_threshold, "Largest dimension handled densely by 'auto'")
      ->capture_default_str();
  app.add_option("--krylov-max-dim", cfg.propagator.krylov_max_dim, "Lanczos subspace size")->capture_default_str();
  app.add_option("--step-tolerance", cfg.propagator.step_tolerance, "Per-step 2-norm error bound")
      ->capture_default_str();
  app.add_option("--output,-o", cfg.output_path, "Output file");
  app.add_option("--values", cfg.values, "Swept 2J (sweep-tstar) or 2S (sweep-rmin) values")->delimiter(',');
  app.add_option("--ratio", ratio, "Lock J/S to this fraction");
  app.add_option("--fixed-two-s", fixed_two_s, "Hold 2S fixed (sweep-tstar)");
  app.add_option("--fixed-two-j", fixed_two_j, "Hold 2J fixed (sweep-rmin)");
  app.add_flag("--time-in-j-units", cfg.time_in_j_units, "Interpret --t-max and --dt in units of J alpha t");
  app.add_option("--rmin-mode", cfg.rmin_mode, "window: smallest r in the window; first: r at t*")
      ->check(CLI::IsMember({"window", "first"}))
      ->capture_default_str();
  app.add_option("--threads", cfg.threads, "Sweep worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--betas", cfg.betas, "Perturbation strengths to compare")->delimiter(',');
  app.add_option("--delta", cfg.delta, "Detuning of F'=0 (exact fraction or decimal)")->capture_default_str();
  app.add_option("--Delta", cfg.Delta, "Detuning of F'=1 (exact fraction or decimal)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  cfg.command = kCommands.at(command);
  cfg.propagator.method = kMethods.at(method);
  cfg.propagator.dense_threshold = dense_threshold;
  cfg.propagator.dt = cfg.dt;
  if (app.get_option("--fixed-two-s")->count() > 0) cfg.fixed_two_s = fixed_two_s;
  if (app.get_option("--fixed-two-j")->count() > 0) cfg.fixed_two_j = fixed_two_j;
  if (app.get_option("--ratio")->count() > 0) cfg.ratio = ratio;
  validate(cfg, app);
  return cfg;
}

void run_command(const RunConfig& cfg, std::ostream& out) {
  const nlohmann::json config = cfg.to_json();
  switch (cfg.command) {
    case Command::dynamics: {
      const DynamicsSeries series = run_dynamics(SpinQuantum(cfg.two_s), SpinQuantum(cfg.two_j),
                                                 ModelParams{cfg.alpha, cfg.beta}, TimeGrid{cfg.t_max, cfg.dt},
                                                 cfg.propagator);
      emit_timeseries(series, cfg.output_path, config);
      out << "wrote " << series.samples.size() << " samples to " << cfg.output_path << "\n";
      return;
    }
    case Command::sweep_tstar:
    case Command::sweep_rmin: {
      const SweepSpec spec = sweep_spec(cfg);
      const SweepResult result =
          cfg.command == Command::sweep_tstar ? sweep_t_star_vs_J(spec) : sweep_rmin_vs_S(spec);
      emit_sweep(result, cfg.output_path, config);
      out << "slope = " << format_double(result.fit.slope) << " +- " << format_double(result.fit.slope_stderr)
          << "\n";
      return;
    }
    case Command::perturb:
      run_perturb(cfg, out);
      return;
    case Command::ku_compare:
      run_ku_compare(cfg, out);
      return;
    case Command::levelscheme:
      run_levelscheme(cfg, out);
      return;
  }
}

}  // namespace spinswap
