#include "eit/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace eit {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (!quoted && (s[i] == '#' || s[i] == ';')) return s.substr(0, i);
  }
  return s;
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse(in, path);
}

ConfigFile ConfigFile::parse(std::istream& in, const std::string& name) {
  ConfigFile config;
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(name + ":" + std::to_string(line_no) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError(name + ":" + std::to_string(line_no) + ": empty section name");
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(name + ":" + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(name + ":" + std::to_string(line_no) + ": empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    config.values_[section.empty() ? key : section + "." + key] = value;
  }
  return config;
}

void ConfigFile::set(const std::string& dotted_key, const std::string& value) {
  values_[dotted_key] = value;
}

bool ConfigFile::has(const std::string& key) const { return values_.count(key) > 0; }

double ConfigFile::get_double(const std::string& key,
                              std::optional<double> fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    if (fallback) return *fallback;
    throw ConfigError(key + ": missing required value");
  }
  size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(it->second, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + it->second + "'");
  }
  if (used != it->second.size())
    throw ConfigError(key + ": expected a number, got '" + it->second + "'");
  return value;
}

long ConfigFile::get_int(const std::string& key, std::optional<long> fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    if (fallback) return *fallback;
    throw ConfigError(key + ": missing required value");
  }
  size_t used = 0;
  long value = 0;
  try {
    value = std::stol(it->second, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + it->second + "'");
  }
  if (used != it->second.size())
    throw ConfigError(key + ": expected an integer, got '" + it->second + "'");
  return value;
}

bool ConfigFile::get_bool(const std::string& key, std::optional<bool> fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    if (fallback) return *fallback;
    throw ConfigError(key + ": missing required value");
  }
  if (it->second == "true") return true;
  if (it->second == "false") return false;
  throw ConfigError(key + ": expected true or false, got '" + it->second + "'");
}

std::string ConfigFile::get_string(const std::string& key,
                                   std::optional<std::string> fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    if (fallback) return *fallback;
    throw ConfigError(key + ": missing required value");
  }
  return it->second;
}

Eigen::Vector3d ConfigFile::get_vector(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(key + ": missing required value");
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  std::stringstream parts(it->second);
  std::string part;
  int n = 0;
  while (std::getline(parts, part, ',')) {
    if (n >= 3) throw ConfigError(key + ": too many components in '" + it->second + "'");
    try {
      v[n++] = std::stod(trim(part));
    } catch (const std::exception&) {
      throw ConfigError(key + ": expected comma-separated numbers, got '" + it->second + "'");
    }
  }
  if (n < 2) throw ConfigError(key + ": expected at least two components");
  return v;
}

std::string ConfigFile::canonical() const {
  std::string out;
  for (const auto& [key, value] : values_) out += key + " = " + value + "\n";
  return out;
}

std::uint64_t ConfigFile::hash() const {
  const std::string text = canonical();
  std::uint64_t h = 1469598103934665603ull;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

Inclusion parse_inclusion(const ConfigFile& file, const std::string& prefix) {
  Inclusion inc;
  const std::string shape = file.get_string(prefix + ".shape");
  if (shape == "ball")
    inc.shape = Inclusion::Shape::Ball;
  else if (shape == "ellipsoid")
    inc.shape = Inclusion::Shape::Ellipsoid;
  else
    throw ConfigError(prefix + ".shape: expected 'ball' or 'ellipsoid', got '" + shape + "'");

  inc.center = file.get_vector(prefix + ".center");
  if (inc.shape == Inclusion::Shape::Ball) {
    const double radius = file.get_double(prefix + ".radius");
    if (!(radius > 0)) throw ConfigError(prefix + ".radius: must be > 0");
    inc.semi_axes = Eigen::Vector3d::Constant(radius);
  } else {
    inc.semi_axes = file.get_vector(prefix + ".semi_axes");
    if (inc.semi_axes.head(2).minCoeff() <= 0)
      throw ConfigError(prefix + ".semi_axes: must be > 0");
    if (inc.semi_axes.z() == 0.0) inc.semi_axes.z() = 1.0;  // unused in 2D
  }
  inc.rotation = file.get_double(prefix + ".rotation", 0.0);
  inc.value = file.get_double(prefix + ".value");
  if (!(inc.value > 0)) throw ConfigError(prefix + ".value: must be > 0");
  return inc;
}

}  // namespace

ExperimentConfig make_experiment_config(const ConfigFile& file) {
  ExperimentConfig config;
  config.config_hash = file.hash();

  config.dim = static_cast<int>(file.get_int("mesh.dim", 3));
  if (config.dim != 2 && config.dim != 3)
    throw ConfigError("mesh.dim: must be 2 or 3");
  config.coarse_refinement = static_cast<int>(file.get_int("mesh.coarse_refinement", 12));
  config.fine_refinement = static_cast<int>(file.get_int("mesh.fine_refinement", 18));
  if (config.coarse_refinement < 1 || config.fine_refinement < 1)
    throw ConfigError("mesh.coarse_refinement / mesh.fine_refinement: must be >= 1");
  config.coarse_mesh_path = file.get_string("mesh.coarse_path", std::string());
  config.fine_mesh_path = file.get_string("mesh.fine_path", std::string());

  const std::string family = file.get_string("patterns.family", "full");
  if (family == "full")
    config.family = PatternFamilyKind::Full;
  else if (family == "upper-half")
    config.family = PatternFamilyKind::UpperHalf;
  else if (family == "lower-half")
    config.family = PatternFamilyKind::LowerHalf;
  else
    throw ConfigError("patterns.family: expected full, upper-half or lower-half, got '" +
                      family + "'");
  config.n_max = static_cast<int>(file.get_int("patterns.n_max", 5));
  if (config.n_max < 1) throw ConfigError("patterns.n_max: must be >= 1");

  config.epsilon = file.get_double("data.epsilon", 0.01);
  if (config.epsilon < 0) throw ConfigError("data.epsilon: must be >= 0");
  config.seed = static_cast<std::uint64_t>(file.get_int("data.seed", 0));
  config.inverse_crime_ratio = file.get_double("data.inverse_crime_ratio", 3.0);
  config.allow_inverse_crime = file.get_bool("data.allow_inverse_crime", false);

  config.phantom.background = file.get_double("phantom.background", 1.0);
  config.phantom.allow_overlap = file.get_bool("phantom.allow_overlap", false);
  bool any_inclusion = false;
  for (int i = 1;; ++i) {
    const std::string prefix = "inclusion." + std::to_string(i);
    if (!file.has(prefix + ".shape")) break;
    config.phantom.inclusions.push_back(parse_inclusion(file, prefix));
    any_inclusion = true;
  }
  if (!any_inclusion) {
    const PhantomSpec defaults = default_phantom();
    config.phantom.inclusions = defaults.inclusions;
  }
  if (!(config.phantom.background > 0))
    throw ConfigError("phantom.background: must be > 0");

  config.prior_enabled = file.get_bool("prior.enabled", false);
  config.prior_dilation = file.get_double("prior.dilation", 1.1);
  config.prior_mu_in = file.get_double("prior.mu_in", 0.01);
  if (config.prior_enabled) {
    if (config.prior_dilation < 1.0) throw ConfigError("prior.dilation: must be >= 1");
    if (!(config.prior_mu_in > 0.0 && config.prior_mu_in <= 1.0))
      throw ConfigError("prior.mu_in: must lie in (0, 1]");
  }

  config.alpha = file.get_double("regularization.alpha", 2e-4);
  if (!(config.alpha > 0)) throw ConfigError("regularization.alpha: must be > 0");

  config.sigma0 = file.get_double("solver.sigma0", 1.0);
  config.solver.c = file.get_double("solver.c", 0.25);
  if (!(config.solver.c > 0 && config.solver.c < 1))
    throw ConfigError("solver.c: must lie in (0, 1)");
  if (config.sigma0 < config.solver.c || config.sigma0 > 1.0 / config.solver.c)
    throw ConfigError("solver.sigma0: must lie in [c, 1/c]");
  config.solver.history = static_cast<int>(file.get_int("solver.M", 5));
  if (config.solver.history < 1) throw ConfigError("solver.M: must be >= 1");
  config.solver.tau = file.get_double("solver.tau", 1e-5);
  if (!(config.solver.tau > 0 && config.solver.tau < 1))
    throw ConfigError("solver.tau: must lie in (0, 1)");
  config.solver.s_min = file.get_double("solver.s_min", 1.0);
  config.solver.s_max = file.get_double("solver.s_max", 1000.0);
  if (!(config.solver.s_min > 0 && config.solver.s_min <= config.solver.s_max))
    throw ConfigError("solver.s_min / solver.s_max: need 0 < s_min <= s_max");
  config.solver.s_stop = file.get_double("solver.s_stop", 1e-3);
  if (!(config.solver.s_stop > 0)) throw ConfigError("solver.s_stop: must be > 0");
  config.solver.shrink = file.get_double("solver.shrink", 0.5);
  if (!(config.solver.shrink > 0 && config.solver.shrink < 1))
    throw ConfigError("solver.shrink: must lie in (0, 1)");
  config.solver.max_iterations =
      static_cast<int>(file.get_int("solver.max_iterations", 200));
  if (config.solver.max_iterations < 1)
    throw ConfigError("solver.max_iterations: must be >= 1");
  config.solver.linear.tolerance = file.get_double("solver.linear_tol", 1e-10);
  if (!(config.solver.linear.tolerance > 0))
    throw ConfigError("solver.linear_tol: must be > 0");
  config.solver.linear.max_iterations =
      static_cast<int>(file.get_int("solver.linear_max_iterations", 0));
  config.solver.threads = static_cast<int>(file.get_int("solver.threads", 0));

  config.output_dir = file.get_string("output.directory", "out");
  return config;
}

std::string default_config_text() {
  return R"(# eitsparse experiment configuration

[mesh]
dim = 3
# built-in unit ball meshes; vertex count is (2 r + 1)^dim
coarse_refinement = 12
fine_refinement = 18
# coarse_path = "coarse.msh"   # Gmsh ASCII v2.2 overrides the generator
# fine_path = "fine.msh"

[patterns]
family = "full"                # full | upper-half | lower-half
n_max = 5                      # 35 spherical-harmonic patterns in 3D

[data]
epsilon = 0.01                 # noise level (1%)
seed = 42
inverse_crime_ratio = 3.0      # required fine/coarse vertex ratio
allow_inverse_crime = false

[phantom]
background = 1.0
allow_overlap = false
# Without [inclusion.N] sections the built-in three-inclusion phantom is
# used: ball (value 2) at (-0.09, -0.55, 0) radius 0.35 and two ellipsoids
# (value 0.5) rotated +-5pi/12 about z-parallel axes (counterclockwise
# positive seen from +z).
# [inclusion.1]
# shape = "ball"               # ball | ellipsoid
# center = -0.09, -0.55, 0
# radius = 0.35
# value = 2.0

[prior]
enabled = false
dilation = 1.1                 # support overestimate factor
mu_in = 0.01                   # penalty weight on the assumed support

[regularization]
alpha = 2e-4

[solver]
sigma0 = 1.0
c = 0.25
M = 5
tau = 1e-5
s_min = 1.0
s_max = 1000.0
s_stop = 1e-3
shrink = 0.5
max_iterations = 200
linear_tol = 1e-10
threads = 0                    # 0: all cores

[output]
directory = "out"
)";
}

}  // namespace eit
