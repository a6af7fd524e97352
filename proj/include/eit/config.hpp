#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "eit/phantom.hpp"
#include "eit/reconstruct.hpp"
#include "eit/types.hpp"

namespace eit {

/// Flat key/value view of a sectioned config file: `[section]` plus
/// `key = value` lines become "section.key" entries. Values stay strings
/// until a typed getter parses them; getters throw ConfigError naming the
/// full field path.
class ConfigFile {
 public:
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse(std::istream& in, const std::string& name);

  void set(const std::string& dotted_key, const std::string& value);
  bool has(const std::string& key) const;

  double get_double(const std::string& key, std::optional<double> fallback = {}) const;
  long get_int(const std::string& key, std::optional<long> fallback = {}) const;
  bool get_bool(const std::string& key, std::optional<bool> fallback = {}) const;
  std::string get_string(const std::string& key,
                         std::optional<std::string> fallback = {}) const;
  Eigen::Vector3d get_vector(const std::string& key) const;

  /// Sorted "key = value" lines; the config hash is computed over this.
  std::string canonical() const;
  std::uint64_t hash() const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

enum class PatternFamilyKind { Full, UpperHalf, LowerHalf };

struct ExperimentConfig {
  int dim = 3;
  int coarse_refinement = 12;
  int fine_refinement = 18;
  std::string coarse_mesh_path;  // overrides the built-in generator when set
  std::string fine_mesh_path;

  PatternFamilyKind family = PatternFamilyKind::Full;
  int n_max = 5;

  double epsilon = 0.01;
  std::uint64_t seed = 0;
  double inverse_crime_ratio = 3.0;
  bool allow_inverse_crime = false;

  PhantomSpec phantom;

  bool prior_enabled = false;
  double prior_dilation = 1.1;
  double prior_mu_in = 0.01;

  double alpha = 2e-4;
  double sigma0 = 1.0;
  SolverConfig solver;

  std::string output_dir = "out";
  std::uint64_t config_hash = 0;
};

/// Builds and validates the experiment description from a parsed file;
/// throws ConfigError with field paths on invalid entries.
ExperimentConfig make_experiment_config(const ConfigFile& file);

/// The default configuration rendered as a config file, used by `eit
/// init-config` and as documentation of every key.
std::string default_config_text();

}  // namespace eit
