#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cfid/evaluation.hpp"
#include "cfid/identification.hpp"
#include "cfid/simulator.hpp"
#include "cfid/training.hpp"

namespace cfid {

struct ConfigKey {
  std::string name;
  std::string default_value;  // "" = no default (optional or required by use)
  std::string help;
};

/// Every accepted key with its default, in documentation order.
const std::vector<ConfigKey>& config_schema();

/// Flat `section.key = value` settings. `#` starts a comment. Unknown keys
/// are rejected on insertion, so a typo fails loudly and names the key.
class Config {
 public:
  Config() = default;

  static Config parse(const std::string& text, const std::string& origin = "<string>");
  static Config load(const std::filesystem::path& path);

  /// "key=value" as given on the command line.
  void apply_override(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const;
  /// Explicit value, else the schema default; throws ConfigError if neither.
  std::string get(const std::string& key) const;
  double get_double(const std::string& key) const;
  long long get_int(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;

  /// Explicitly set keys only, sorted.
  const std::map<std::string, std::string>& values() const { return values_; }
  /// Every key with its effective value, as config text.
  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
};

DriftSpec drift_spec(const Config& c);
SimulationConfig simulation_config(const Config& c);
LossConfig loss_config(const Config& c, int dim);
TrainConfig train_config(const Config& c, int dim);

/// Ground-truth coefficients for the configured drift at (train.J, grid.L).
FourierDrift truth_coefficients(const Config& c);

struct ScanSettings {
  double lo = 0.0;
  double hi = 1.0;
  int points = 101;
  std::vector<double> values() const;
};
ScanSettings scan_settings(const Config& c);

struct PortraitSettings {
  std::array<double, 2> lo{};
  std::array<double, 2> hi{};
  int resolution = 0;
};
PortraitSettings portrait_settings(const Config& c);

}  // namespace cfid
