#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "eit/config.hpp"
#include "eit/dataset_io.hpp"
#include "eit/forward.hpp"
#include "eit/mesh_io.hpp"
#include "eit/phantom.hpp"
#include "eit/reconstruct.hpp"
#include "eit/rng.hpp"
#include "eit/vtk_io.hpp"

namespace {

using namespace eit;
namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "1.0.0";

enum ExitCode { kOk = 0, kCheckFailed = 1, kConfigError = 2, kSolverError = 3, kIterationCap = 4 };

int log_level() {
  const char* env = std::getenv("EIT_LOG");
  if (!env) return 1;
  const std::string value = env;
  if (value == "quiet") return 0;
  if (value == "debug") return 2;
  return 1;
}

void info(const std::string& message) {
  if (log_level() >= 1) std::cerr << message << "\n";
}

void debug(const std::string& message) {
  if (log_level() >= 2) std::cerr << message << "\n";
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

ConfigFile load_config(const std::string& path,
                       const std::vector<std::string>& overrides) {
  ConfigFile file = path.empty() ? ConfigFile() : ConfigFile::parse_file(path);
  for (const std::string& entry : overrides) {
    const size_t eq = entry.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--override expects key=value, got '" + entry + "'");
    file.set(entry.substr(0, eq), entry.substr(eq + 1));
  }
  return file;
}

SimplicialMesh build_mesh(const ExperimentConfig& config, bool fine) {
  const std::string& path = fine ? config.fine_mesh_path : config.coarse_mesh_path;
  if (!path.empty()) {
    info("importing " + std::string(fine ? "fine" : "coarse") + " mesh from " + path);
    return import_gmsh(path);
  }
  const int refinement = fine ? config.fine_refinement : config.coarse_refinement;
  return generate_ball_mesh(config.dim, refinement);
}

BoundarySubset measured_subset(const SimplicialMesh& mesh, PatternFamilyKind family) {
  switch (family) {
    case PatternFamilyKind::UpperHalf:
      return hemisphere_subset(mesh, Hemisphere::Upper);
    case PatternFamilyKind::LowerHalf:
      return hemisphere_subset(mesh, Hemisphere::Lower);
    default:
      return mark_boundary_subset(mesh, [](const Eigen::Vector3d&) { return true; });
  }
}

PatternFamily build_patterns(const SimplicialMesh& mesh, const ExperimentConfig& config) {
  switch (config.family) {
    case PatternFamilyKind::UpperHalf:
      return partial_data_patterns(mesh, Hemisphere::Upper, config.n_max);
    case PatternFamilyKind::LowerHalf:
      return partial_data_patterns(mesh, Hemisphere::Lower, config.n_max);
    default:
      return full_data_patterns(mesh, config.n_max);
  }
}

const char* family_name(PatternFamilyKind family) {
  switch (family) {
    case PatternFamilyKind::UpperHalf:
      return "upper";
    case PatternFamilyKind::LowerHalf:
      return "lower";
    default:
      return "full";
  }
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const ExperimentConfig& config, const json& timings,
                    const std::vector<std::string>& outputs) {
  json manifest;
  manifest["tool"] = "eitsparse";
  manifest["version"] = kVersion;
  manifest["command"] = command;
  manifest["config_hash"] = hex64(config.config_hash);
  manifest["seed"] = config.seed;
  manifest["timings"] = timings;
  manifest["outputs"] = outputs;
  for (const std::string& name : outputs)
    if (!fs::exists(dir / name))
      throw std::runtime_error("manifest lists missing file: " + name);
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << "\n";
}

int cmd_simulate(const ExperimentConfig& config) {
  Timer total;
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);

  Timer meshes;
  const SimplicialMesh fine = build_mesh(config, true);
  const SimplicialMesh coarse = build_mesh(config, false);
  const double mesh_seconds = meshes.seconds();
  info("meshes: fine " + std::to_string(fine.num_vertices()) + " vertices, coarse " +
       std::to_string(coarse.num_vertices()) + " vertices");

  const auto fine_gamma_d = measured_subset(fine, config.family);
  const auto coarse_gamma_d = measured_subset(coarse, config.family);
  const auto phantom = build_phantom(config.phantom, fine);

  Timer solve;
  SimulationOptions options;
  options.gamma_d_name = family_name(config.family);
  options.epsilon = config.epsilon;
  options.seed = config.seed;
  options.min_vertex_ratio = config.inverse_crime_ratio;
  options.allow_inverse_crime = config.allow_inverse_crime;
  options.threads = config.solver.threads;
  options.solver = config.solver.linear;
  const CauchyDataSet data =
      simulate_cauchy_data(fine, phantom.sigma, build_patterns(fine, config),
                           fine_gamma_d, coarse, build_patterns(coarse, config),
                           coarse_gamma_d, options);

  save_dataset(data, (dir / "cauchy_data.txt").string());
  info("wrote " + (dir / "cauchy_data.txt").string() + " (K = " +
       std::to_string(data.size()) + ")");

  write_manifest(dir, "simulate", config,
                 {{"total_s", total.seconds()},
                  {"mesh_s", mesh_seconds},
                  {"solve_s", solve.seconds()}},
                 {"cauchy_data.txt"});
  return kOk;
}

int cmd_reconstruct(const ExperimentConfig& config, const std::string& data_path) {
  Timer total;
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);

  const SimplicialMesh mesh = build_mesh(config, false);
  const CauchyDataSet data = load_dataset(data_path);
  if (data.mesh_id != mesh_hash(mesh))
    throw ConfigError("dataset mesh hash " + hex64(data.mesh_id) +
                      " does not match the configured coarse mesh " +
                      hex64(mesh_hash(mesh)));

  const auto gamma_d = measured_subset(mesh, config.family);
  const NodalField sigma0 = NodalField::Constant(mesh.num_vertices(), config.sigma0);

  NodalField mu = NodalField::Ones(mesh.num_vertices());
  if (config.prior_enabled)
    mu = prior_field(config.phantom, mesh, config.prior_dilation, config.prior_mu_in);
  const RegularizationPlan plan = make_plan(mesh, config.alpha, mu);

  info("reconstructing on " + std::to_string(mesh.num_vertices()) + " vertices, K = " +
       std::to_string(data.size()) + ", alpha = " + std::to_string(config.alpha));
  Timer solve;
  const ReconstructionResult result =
      reconstruct(mesh, data, gamma_d, sigma0, plan, config.solver);

  // iteration log
  {
    std::ofstream csv(dir / "iterations.csv");
    csv << "iteration,psi,discrepancy,penalty,step,trials\n";
    char buf[160];
    for (const auto& row : result.log) {
      std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%d\n", row.iteration,
                    row.objective, row.discrepancy, row.penalty, row.step, row.trials);
      csv << buf;
    }
  }

  std::vector<std::pair<std::string, Vector>> fields = {
      {"sigma", sigma0 + result.delta_gamma}, {"delta_gamma", result.delta_gamma}};
  if (config.prior_enabled) fields.emplace_back("mu", mu);
  write_vtk(mesh, fields, (dir / "reconstruction.vtk").string());

  info("objective " + std::to_string(result.initial_objective) + " -> " +
       std::to_string(result.objective) + " in " + std::to_string(result.log.size()) +
       " iterations");

  std::vector<std::string> outputs = {"iterations.csv", "reconstruction.vtk"};
  write_manifest(dir, "reconstruct", config,
                 {{"total_s", total.seconds()}, {"solve_s", solve.seconds()}}, outputs);

  if (result.reason == StopReason::IterationCap) {
    info("stopped at the iteration cap before the step-size rule");
    return kIterationCap;
  }
  return kOk;
}

int cmd_ndmap_check(const ExperimentConfig& config, int n_max, double bound,
                    double gamma_const) {
  const SimplicialMesh mesh = build_mesh(config, false);
  const auto whole =
      mark_boundary_subset(mesh, [](const Eigen::Vector3d&) { return true; });
  const SparseMatrix B = assemble_boundary_mass(mesh, whole);
  const auto system = make_neumann_system(
      mesh, Vector::Constant(mesh.num_vertices(), gamma_const), config.solver.linear);
  const auto family = full_data_patterns(mesh, n_max);

  bool ok = true;
  for (const auto& g : family.patterns) {
    const Vector trace = nd_apply(system, g.values, whole);
    Vector expected = g.values / (gamma_const * g.degree);
    expected.array() -= whole.vertex_weights.dot(expected) / whole.area;
    for (Index v = 0; v < mesh.num_vertices(); ++v)
      if (whole.vertex_weights[v] == 0.0) expected[v] = 0.0;
    const Vector diff = trace - expected;
    const double err = std::sqrt(diff.dot(B * diff) / expected.dot(B * expected));
    std::printf("n=%d m=%+d relative L2 boundary error %.5f%%%s\n", g.degree, g.order,
                100.0 * err, err <= bound ? "" : "  (exceeds bound)");
    ok = ok && err <= bound;
  }
  std::printf("%s (bound %.3g)\n", ok ? "PASS" : "FAIL", bound);
  return ok ? kOk : kCheckFailed;
}

int cmd_gradient_check(const ExperimentConfig& config, int directions, double h,
                       double bound) {
  // a desk-size analogue of the configured experiment
  const int dim = config.dim;
  const int coarse_r = dim == 2 ? 11 : 6;
  const int fine_r = dim == 2 ? 20 : 11;
  const int n_max = dim == 2 ? 2 : 1;

  const SimplicialMesh mesh = generate_ball_mesh(dim, coarse_r);
  const SimplicialMesh fine = generate_ball_mesh(dim, fine_r);
  const auto gamma_d = measured_subset(mesh, config.family);
  const auto fine_gamma_d = measured_subset(fine, config.family);
  const SparseMatrix B = assemble_boundary_mass(mesh, gamma_d);
  const auto phantom = build_phantom(config.phantom, fine);

  ExperimentConfig local = config;
  local.n_max = n_max;
  SimulationOptions options;
  options.gamma_d_name = family_name(config.family);
  options.epsilon = 0.0;
  options.threads = config.solver.threads;
  const CauchyDataSet data = simulate_cauchy_data(
      fine, phantom.sigma, build_patterns(fine, local), fine_gamma_d, mesh,
      build_patterns(mesh, local), gamma_d, options);

  const NodalField sigma0 = NodalField::Constant(mesh.num_vertices(), config.sigma0);
  const auto system = make_neumann_system(mesh, sigma0, config.solver.linear);
  const auto eval = discrepancy(system, B, gamma_d, data, config.solver.threads);
  const Vector load = gradient_load(mesh, system, gamma_d, B, eval.solutions,
                                    eval.residuals, config.solver.threads);

  const auto value_at = [&](const NodalField& dg) {
    const auto sys = make_neumann_system(mesh, sigma0 + dg, config.solver.linear);
    return discrepancy(sys, B, gamma_d, data, config.solver.threads).value;
  };

  const auto on_boundary = boundary_vertex_mask(mesh);
  std::uint64_t draw = 0;
  double worst = 0.0;
  for (int trial = 0; trial < directions; ++trial) {
    NodalField eta = NodalField::Zero(mesh.num_vertices());
    for (Index v = 0; v < mesh.num_vertices(); ++v)
      if (!on_boundary[static_cast<size_t>(v)])
        eta[v] = 2.0 * uniform_from_bits(splitmix64(config.seed ^ ++draw)) - 1.0;
    const double fd = (value_at(h * eta) - value_at(-h * eta)) / (2.0 * h);
    const double predicted = load.dot(eta);
    const double rel = std::abs(fd - predicted) / std::max(std::abs(predicted), 1e-300);
    std::printf("direction %d: finite difference %.10e adjoint %.10e relative %.3e\n",
                trial, fd, predicted, rel);
    worst = std::max(worst, rel);
  }
  std::printf("max relative error %.3e, %s (bound %.1e)\n", worst,
              worst <= bound ? "PASS" : "FAIL", bound);
  return worst <= bound ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conductivity reconstruction from partial-boundary Cauchy data"};
  app.require_subcommand(1);

  std::string config_path, output_dir, data_path, init_path = "eit.cfg";
  std::vector<std::string> overrides;
  long long seed = -1;
  int threads = -1;

  const auto add_common = [&](CLI::App* cmd, bool need_config) {
    auto* opt = cmd->add_option("--config", config_path, "configuration file");
    if (need_config) opt->required();
    cmd->add_option("--output-dir", output_dir, "overrides output.directory");
    cmd->add_option("--seed", seed, "overrides data.seed");
    cmd->add_option("--threads", threads, "overrides solver.threads");
    cmd->add_option("--override", overrides, "set a config value, e.g. data.epsilon=0.02")
        ->take_all();
  };

  auto* simulate = app.add_subcommand("simulate", "synthesize a Cauchy dataset");
  add_common(simulate, true);

  auto* reconstruct_cmd =
      app.add_subcommand("reconstruct", "run the sparsity reconstruction");
  add_common(reconstruct_cmd, true);
  reconstruct_cmd->add_option("--data", data_path, "Cauchy dataset file")->required();

  auto* ndmap = app.add_subcommand("ndmap-check",
                                   "compare the ND map against the analytic spectrum");
  add_common(ndmap, false);
  int nd_n_max = 0;
  double nd_bound = 0.0, nd_gamma = 1.0;
  ndmap->add_option("--n-max", nd_n_max, "harmonic degrees to test (default 5 in 2D, 3 in 3D)");
  ndmap->add_option("--bound", nd_bound, "relative error bound (default 0.01 / 0.03)");
  ndmap->add_option("--gamma", nd_gamma, "constant conductivity")->capture_default_str();

  auto* gradient = app.add_subcommand("gradient-check",
                                      "finite-difference check of the adjoint gradient");
  add_common(gradient, false);
  int gc_directions = 5;
  double gc_h = 1e-4, gc_bound = 1e-3;
  gradient->add_option("--directions", gc_directions, "random directions")->capture_default_str();
  gradient->add_option("--step", gc_h, "finite-difference step")->capture_default_str();
  gradient->add_option("--bound", gc_bound, "relative error bound")->capture_default_str();

  auto* init = app.add_subcommand("init-config", "write the default configuration");
  init->add_option("path", init_path, "destination file")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (init->parsed()) {
      std::ofstream out(init_path);
      if (!out) throw ConfigError("cannot write " + init_path);
      out << default_config_text();
      info("wrote " + init_path);
      return kOk;
    }

    ConfigFile file = load_config(config_path, overrides);
    if (seed >= 0) file.set("data.seed", std::to_string(seed));
    if (threads >= 0) file.set("solver.threads", std::to_string(threads));
    if (!output_dir.empty()) file.set("output.directory", output_dir);
    ExperimentConfig config = make_experiment_config(file);
    debug("config hash " + hex64(config.config_hash));

    if (simulate->parsed()) return cmd_simulate(config);
    if (reconstruct_cmd->parsed()) return cmd_reconstruct(config, data_path);
    if (ndmap->parsed()) {
      if (nd_n_max == 0) nd_n_max = config.dim == 2 ? 5 : 3;
      if (nd_bound == 0.0 && !ndmap->count("--bound"))
        nd_bound = config.dim == 2 ? 0.01 : 0.03;
      return cmd_ndmap_check(config, nd_n_max, nd_bound, nd_gamma);
    }
    if (gradient->parsed())
      return cmd_gradient_check(config, gc_directions, gc_h, gc_bound);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kConfigError;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolverError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverError;
  }
  return kOk;
}
