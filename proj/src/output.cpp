#include "spinswap/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace spinswap {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  if (ec != std::errc{}) throw std::runtime_error("failed to format a double");
  return std::string(buf, end);
}

void write_atomically(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw std::runtime_error("failed while writing " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw std::runtime_error("cannot move output into place at " + path.string() + ": " + ec.message());
  }
}

std::filesystem::path sibling_path(const std::filesystem::path& path, std::string_view suffix) {
  std::filesystem::path out = path;
  out.replace_extension();
  out += suffix;
  return out;
}

std::string metadata_jsonl(const nlohmann::json& config) {
  const nlohmann::json library = {{"library", kLibraryName}, {"version", kLibraryVersion}};
  return nlohmann::json{{"config", config}}.dump() + "\n" + library.dump() + "\n";
}

std::string timeseries_csv(const DynamicsSeries& series) {
  if (series.samples.empty()) throw std::invalid_argument("no samples to write");
  std::string out(kTimeseriesHeader);
  out += '\n';
  for (const auto& s : series.samples) {
    const double fields[] = {s.time,
                             s.moments.mean.x(),
                             s.moments.mean.y(),
                             s.moments.mean.z(),
                             s.report.theta_z,
                             s.report.delta_s_zbar,
                             s.report.r.value_or(std::nan("")),
                             s.report.xi2.value_or(std::nan("")),
                             s.report.entropy_field,
                             s.report.schmidt_k};
    bool first = true;
    for (double v : fields) {
      if (!first) out += ',';
      out += format_double(v);
      first = false;
    }
    out += '\n';
  }
  return out;
}

std::string sweep_csv(const SweepResult& result) {
  if (result.rows.empty()) throw std::invalid_argument("no sweep rows to write");
  std::string out(kSweepHeader);
  out += '\n';
  for (const auto& row : result.rows) {
    out += format_double(row.param) + ',' + format_double(row.t_star) + ',' + format_double(row.r_min) + '\n';
  }
  return out;
}

nlohmann::json sweep_summary(const SweepResult& result) {
  nlohmann::json points = nlohmann::json::array();
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const auto& row = result.rows[i];
    points.push_back({{"param", row.param},
                      {"two_s", row.two_s},
                      {"two_j", row.two_j},
                      {"t_star", row.t_star},
                      {"r_at_t_star", row.r_at_t_star},
                      {"r_min", row.r_min},
                      {"t_r_min", row.t_r_min},
                      {"residual", result.fit.residuals.at(i)}});
  }
  return {{"slope", result.fit.slope},
          {"slope_stderr", result.fit.slope_stderr},
          {"intercept", result.fit.intercept},
          {"points", points}};
}

void emit_timeseries(const DynamicsSeries& series, const std::filesystem::path& path, const nlohmann::json& config) {
  const std::string csv = timeseries_csv(series);
  write_atomically(path, csv);
  write_atomically(sibling_path(path, ".meta.jsonl"), metadata_jsonl(config));
}

void emit_sweep(const SweepResult& result, const std::filesystem::path& path, const nlohmann::json& config) {
  const std::string csv = sweep_csv(result);
  const std::string summary = sweep_summary(result).dump(2) + "\n";
  write_atomically(path, csv);
  write_atomically(sibling_path(path, ".summary.json"), summary);
  write_atomically(sibling_path(path, ".meta.jsonl"), metadata_jsonl(config));
}

}  // namespace spinswap
