#pragma once

#include <optional>
#include <string>

#include "entrynav/scenario.hpp"

namespace entrynav {

// Loads a flat scenario preset from a YAML file. Keys carry unit suffixes;
// lengths arrive in km or m as suffixed, angles in degrees, and everything is
// converted to SI radians/meters on the way in. Unknown keys, missing keys,
// type mismatches and physically inconsistent values all raise ConfigError
// with the offending key path.
ScenarioConfig load_config(const std::string& path);

// Same parser on an in-memory document, for tests.
ScenarioConfig parse_config_text(const std::string& text);

// Command line overrides applied on top of a loaded preset.
struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::optional<double> dt;
  std::optional<double> horizon;
  std::optional<Eigen::Vector2d> weights;
};

ScenarioConfig apply_overrides(ScenarioConfig cfg, const CliOverrides& ov);

}  // namespace entrynav
