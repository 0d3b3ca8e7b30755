#pragma once

#include <array>
#include <string>
#include <vector>

#include "qrf/attack.hpp"

namespace qrf {

// Thrown on schema violations; message names the offending key path.
class ConfigError : public ValidationError {
 public:
  explicit ConfigError(const std::string& what) : ValidationError(what) {}
};

// Full tool configuration: the scenario plus sweep and Bell-test settings.
struct ToolConfig {
  ScenarioConfig scenario;

  SweepParameter sweep_parameter = SweepParameter::kJammerSigma;
  std::vector<double> sweep_values;
  int sweep_trials = 10;
  bool sweep_intercept = false;

  std::array<double, 4> bell_settings_deg{0.0, 90.0, 45.0, -45.0};
  long bell_pairs = 100000;
};

// Line-oriented `key = value` schema with dotted key paths. Unknown keys are
// rejected; absent keys keep their defaults. '#' starts a comment.
ToolConfig load_config(const std::string& path);
ToolConfig parse_config(const std::string& text);

// Effective-config emission; reloading the result reproduces the config.
std::string config_to_string(const ToolConfig& cfg);
void save_config(const ToolConfig& cfg, const std::string& path);

}  // namespace qrf
