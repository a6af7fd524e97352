#include "eit/forward.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "eit/parallel.hpp"
#include "eit/rng.hpp"

namespace eit {

void parallel_for(int n, const std::function<void(int)>& fn, int threads) {
  int workers = threads > 0 ? threads
                            : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

Vector nd_apply(const NeumannSystem& system, const Vector& g,
                const BoundarySubset& gamma_d) {
  const Vector u = solve_neumann(system, g, gamma_d);
  Vector trace = Vector::Zero(u.size());
  for (const Index v : gamma_d.vertices) trace[v] = u[v];
  // solve_neumann grounded u over gamma_d, so the restriction is mean-zero
  return trace;
}

namespace {

double auto_snap_tolerance(const SimplicialMesh& fine) {
  // Cover the sagitta between the polyhedral fine boundary and the curved
  // boundary the coarse vertices lie on (~ edge^2 / 8).
  double max_edge = 0.0;
  for (Index f = 0; f < fine.num_boundary_facets(); ++f)
    for (int i = 0; i < fine.dim; ++i)
      for (int j = i + 1; j < fine.dim; ++j) {
        const double len = (fine.vertices.row(fine.boundary_facets(f, i)) -
                            fine.vertices.row(fine.boundary_facets(f, j)))
                               .norm();
        max_edge = std::max(max_edge, len);
      }
  return std::max(0.25 * max_edge * max_edge, 1e-8 * mesh_diameter(fine));
}

}  // namespace

CauchyDataSet simulate_cauchy_data(const SimplicialMesh& fine_mesh,
                                   const NodalField& sigma_fine,
                                   const PatternFamily& fine_patterns,
                                   const BoundarySubset& fine_gamma_d,
                                   const SimplicialMesh& coarse_mesh,
                                   const PatternFamily& coarse_patterns,
                                   const BoundarySubset& coarse_gamma_d,
                                   const SimulationOptions& options) {
  if (fine_mesh.dim != coarse_mesh.dim)
    throw ConfigError("simulation meshes have different dimensions");
  if (options.epsilon < 0.0) throw ConfigError("noise level must be >= 0");
  const double ratio = static_cast<double>(fine_mesh.num_vertices()) /
                       static_cast<double>(coarse_mesh.num_vertices());
  if (ratio < options.min_vertex_ratio && !options.allow_inverse_crime)
    throw ConfigError(
        "inverse-crime guard: fine mesh has only " + std::to_string(ratio) +
        "x the coarse vertex count (need >= " +
        std::to_string(options.min_vertex_ratio) + "; pass the override to force)");
  if (fine_patterns.size() != coarse_patterns.size())
    throw ConfigError("pattern families of fine and coarse mesh differ in size");
  for (int k = 0; k < fine_patterns.size(); ++k)
    if (fine_patterns.patterns[k].degree != coarse_patterns.patterns[k].degree ||
        fine_patterns.patterns[k].order != coarse_patterns.patterns[k].order)
      throw ConfigError("pattern families of fine and coarse mesh do not match");

  const int K = fine_patterns.size();
  const auto system = make_neumann_system(fine_mesh, sigma_fine, options.solver);

  // Locate the measured coarse vertices in the fine mesh once.
  const double snap = options.snap_tolerance >= 0.0 ? options.snap_tolerance
                                                    : auto_snap_tolerance(fine_mesh);
  const PointLocator locator(fine_mesh);
  const auto& measured = coarse_gamma_d.vertices;
  std::vector<PointLocator::Location> locations(measured.size());
  for (size_t p = 0; p < measured.size(); ++p) {
    Eigen::Vector3d x = Eigen::Vector3d::Zero();
    for (int a = 0; a < coarse_mesh.dim; ++a)
      x[a] = coarse_mesh.vertices(measured[p], a);
    locations[p] = locator.locate(x, snap);
  }

  CauchyDataSet data;
  data.dim = coarse_mesh.dim;
  data.n_vertices = coarse_mesh.num_vertices();
  data.mesh_id = mesh_hash(coarse_mesh);
  data.gamma_d_name = options.gamma_d_name;
  data.epsilon = options.epsilon;
  data.seed = options.seed;
  data.gamma_d_vertices = measured;
  data.patterns = coarse_patterns.patterns;
  data.traces.assign(static_cast<size_t>(K), Vector());

  parallel_for(
      K,
      [&](int k) {
        const Vector u = solve_neumann(system, fine_patterns.patterns[k].values,
                                       fine_gamma_d);
        Vector f = Vector::Zero(coarse_mesh.num_vertices());
        for (size_t p = 0; p < measured.size(); ++p) {
          const auto& loc = locations[p];
          double value = 0.0;
          for (int i = 0; i <= fine_mesh.dim; ++i)
            value += loc.barycentric[i] * u[fine_mesh.cells(loc.cell, i)];
          f[measured[p]] = value;
        }
        const double mean = coarse_gamma_d.vertex_weights.dot(f) / coarse_gamma_d.area;
        for (const Index v : measured) f[v] -= mean;
        data.traces[static_cast<size_t>(k)] = std::move(f);
      },
      options.threads);

  // One noise amplitude for the whole set, from the grounded clean traces.
  double max_abs = 0.0;
  for (const Vector& f : data.traces)
    for (const Index v : measured) max_abs = std::max(max_abs, std::abs(f[v]));
  const double noise_std = options.epsilon * max_abs;

  if (noise_std > 0.0)
    for (int k = 0; k < K; ++k) {
      Vector& f = data.traces[static_cast<size_t>(k)];
      for (const Index v : measured)
        f[v] += noise_std * counter_gaussian(options.seed, static_cast<std::uint64_t>(k),
                                             static_cast<std::uint64_t>(v));
      // re-project the noise onto the grounded subspace
      const double mean = coarse_gamma_d.vertex_weights.dot(f) / coarse_gamma_d.area;
      for (const Index v : measured) f[v] -= mean;
    }

  return data;
}

DiscrepancyResult discrepancy(const NeumannSystem& system,
                              const SparseMatrix& boundary_mass_gamma_d,
                              const BoundarySubset& gamma_d,
                              const CauchyDataSet& data, int threads) {
  const int K = data.size();
  DiscrepancyResult result;
  result.solutions.assign(static_cast<size_t>(K), Vector());
  result.residuals.assign(static_cast<size_t>(K), Vector());

  parallel_for(
      K,
      [&](int k) {
        const Vector u =
            solve_neumann(system, data.patterns[static_cast<size_t>(k)].values, gamma_d);
        Vector r = Vector::Zero(u.size());
        for (const Index v : gamma_d.vertices)
          r[v] = u[v] - data.traces[static_cast<size_t>(k)][v];
        // both terms are grounded, so this only removes grounding roundoff;
        // it keeps the residual exactly admissible as adjoint Neumann data
        const double mean = gamma_d.vertex_weights.dot(r) / gamma_d.area;
        for (const Index v : gamma_d.vertices) r[v] -= mean;
        result.solutions[static_cast<size_t>(k)] = u;
        result.residuals[static_cast<size_t>(k)] = std::move(r);
      },
      threads);

  double value = 0.0;
  for (int k = 0; k < K; ++k) {
    const Vector& r = result.residuals[static_cast<size_t>(k)];
    value += 0.5 * r.dot(boundary_mass_gamma_d * r);
  }
  result.value = value;
  return result;
}

}  // namespace eit
