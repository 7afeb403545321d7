#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

#include "spinswap/experiments.hpp"

namespace spinswap {

inline constexpr std::string_view kLibraryName = "spinswap";
inline constexpr std::string_view kLibraryVersion = "0.1.0";

inline constexpr std::string_view kTimeseriesHeader = "alpha_t,Sx,Sy,Sz,theta_z,dSzbar,r,xi2,entropy_J,schmidt_K";
inline constexpr std::string_view kSweepHeader = "param,t_star,r_min";

/// Shortest-form general notation with 17 significant digits, independent of
/// the C locale. -0 prints as 0 and NaN as "nan".
std::string format_double(double value);

/// Writes to a temporary sibling and renames it over path, so a failed run
/// never leaves a partial file behind. Throws std::runtime_error on I/O failure.
void write_atomically(const std::filesystem::path& path, std::string_view content);

/// path with its extension replaced, e.g. run.csv -> run.meta.jsonl.
std::filesystem::path sibling_path(const std::filesystem::path& path, std::string_view suffix);

/// One JSON object per line: the resolved configuration, then the library name and version.
std::string metadata_jsonl(const nlohmann::json& config);

std::string timeseries_csv(const DynamicsSeries& series);
std::string sweep_csv(const SweepResult& result);
nlohmann::json sweep_summary(const SweepResult& result);

/// CSV at path plus path.meta.jsonl.
void emit_timeseries(const DynamicsSeries& series, const std::filesystem::path& path, const nlohmann::json& config);

/// CSV at path, the fit in path.summary.json, and path.meta.jsonl.
void emit_sweep(const SweepResult& result, const std::filesystem::path& path, const nlohmann::json& config);

}  // namespace spinswap
