#pragma once

// JSON-driven experiment runner behind the CLI and the C API. See README.md
// for the spec schema.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace rotdiv {

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides spec "seed"
  std::optional<unsigned> workers;    // overrides spec "workers"; 0 = all cores
  std::optional<double> tolerance;    // overrides spec "rank_scale"
};

struct RunResult {
  nlohmann::json report;
  std::vector<std::filesystem::path> artifacts;
};

/// Validates `spec`, runs the command and writes results.csv, report.json
/// and (for curve commands) plot.svg into opts.out_dir. Schema problems
/// raise SchemaError naming the JSON path of the field.
RunResult run_experiment(const nlohmann::json& spec, const RunOptions& opts);

std::vector<std::string> list_presets();
/// Throws Error(input) for unknown names.
nlohmann::json preset_spec(const std::string& name);

/// {"error": {"kind", "message", "field"?}} for any exception.
nlohmann::json error_to_json(const std::exception& e);

}  // namespace rotdiv
