#pragma once

// Run configuration: a small TOML subset ([section], key = value, '#' comments;
// values are numbers, booleans, "strings" or [number, ...] arrays).
// Physical quantities carry their unit in the key name.

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "raman/dynamics.hpp"
#include "raman/measurement.hpp"
#include "raman/model.hpp"

namespace raman {

using ConfigValue = std::variant<double, bool, std::string, std::vector<double>>;

/// "section.key" -> value, in file order of keys irrelevant.
struct ConfigTable {
  std::map<std::string, ConfigValue> values;
  std::map<std::string, int> lines;  ///< source line of each key
};

ConfigTable parse_config_table(const std::string& text, const std::string& source = "<string>");

struct HeraldWindow {
  double start_ps = 0.0;
  double stop_ps = 10.0;
  double step_ps = 0.05;
};

struct OutputOptions {
  std::filesystem::path dir = "out";
  bool svg = true;
};

struct RunConfig {
  SystemParams system = SystemParams::cs2_defaults();
  DetectorModel detectors{};
  std::vector<double> delays_ps = default_delays();
  HeraldWindow herald{};
  IntegratorConfig integrator{};
  std::array<int, 4> dims{3, 3, 3, 3};
  OutputOptions output{};

  /// Throws ConfigError naming the first invalid field.
  void validate() const;

  static std::vector<double> default_delays();
};

/// Applies the keys of `text` on top of the defaults. Unknown keys are errors.
RunConfig parse_run_config(const std::string& text, const std::string& source = "<string>");
RunConfig load_run_config(const std::filesystem::path& path);

/// Writes every key with its current value; parsing the output reproduces `config`.
std::string format_run_config(const RunConfig& config);

}  // namespace raman
