#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "spinswap/propagate.hpp"

namespace spinswap {

enum class Command { dynamics, sweep_tstar, sweep_rmin, perturb, ku_compare, levelscheme };

std::string to_string(Command command);

struct RunConfig {
  Command command = Command::dynamics;
  int two_s = 0;
  int two_j = 0;
  double alpha = 1.0;
  double beta = 0.0;
  double t_max = 0.0;
  double dt = 0.01;
  PropagatorConfig propagator;
  std::string output_path;

  // sweeps
  std::vector<int> values;           // swept 2J (sweep-tstar) or 2S (sweep-rmin)
  std::optional<int> fixed_two_s;    // sweep-tstar alternative to ratio
  std::optional<int> fixed_two_j;    // sweep-rmin alternative to ratio
  std::optional<std::string> ratio;  // J/S, e.g. "2" or "3/2"
  bool time_in_j_units = false;
  std::string rmin_mode = "window";
  unsigned threads = 0;

  // perturb
  std::vector<double> betas;

  // levelscheme
  std::string delta = "20";
  std::string Delta = "1";

  nlohmann::json to_json() const;
};

/// Invalid flags, keys, values or combinations. The message is a single line.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// --help was requested; what() holds the usage text.
class HelpRequested : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Resolves flags over `--config FILE` (key = value lines) over defaults.
RunConfig parse_config(int argc, const char* const* argv);

/// Runs the configured command, writing files and a short summary to out.
void run_command(const RunConfig& cfg, std::ostream& out);

}  // namespace spinswap
