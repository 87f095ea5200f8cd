#pragma once

#include "melnikov/model.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace melnikov {

inline constexpr const char* kToolVersion = "0.3.1";
inline constexpr int kSchemaVersion = 1;

struct SeedGridSettings {
  double lo = 0.0;
  double hi = 1.0;
  int points = 8;
};

/// Command parameters; absent entries fall back to command defaults.
struct RunSettings {
  std::optional<std::vector<double>> tau;
  std::optional<std::vector<double>> action;
  std::optional<std::vector<double>> angle;
  std::optional<std::vector<double>> eta;
  std::optional<std::vector<double>> eps_list;
  std::optional<double> tol;
  std::optional<double> newton_tol;
  std::optional<double> horizon_c;
  std::optional<SeedGridSettings> grid;
  std::optional<std::string> format;  // "json" or "csv"
  std::optional<std::string> output;  // path; stdout when absent
};

/// Parsed configuration file. system is kept exactly as written (defaults
/// are filled by finalized()), so serialization reproduces the input.
struct RunConfig {
  SystemConfig system;
  RunSettings run;

  /// Copy of the system with validated parts and filled defaults.
  SystemConfig finalized() const;
};

/// Throws ConfigError; syntax errors carry "line L, column C" and schema
/// errors the JSON path of the offending field.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

nlohmann::ordered_json to_json(const RunConfig& cfg);
std::string serialize_config(const RunConfig& cfg);

/// FNV-1a of the canonical serialization, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace melnikov
