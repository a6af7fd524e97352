#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eit/fem.hpp"
#include "eit/mesh.hpp"
#include "eit/patterns.hpp"
#include "eit/types.hpp"

namespace eit {

/// K pairs of Cauchy data: current patterns on the reconstruction mesh and
/// (noisy) Dirichlet traces on the measured subset. Traces are full-length
/// nodal vectors, zero off the subset and ds-mean-zero on it.
struct CauchyDataSet {
  int dim = 0;
  Index n_vertices = 0;
  std::uint64_t mesh_id = 0;      // mesh_hash of the reconstruction mesh
  std::string gamma_d_name;       // "full", "upper" or "lower"
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  std::vector<Index> gamma_d_vertices;
  std::vector<BoundaryPattern> patterns;
  std::vector<Vector> traces;

  int size() const { return static_cast<int>(patterns.size()); }
};

/// Neumann-to-Dirichlet application: solves the weighted Neumann problem and
/// returns the trace restricted to the measured subset (zero elsewhere),
/// grounded to ds-mean-zero on that subset.
Vector nd_apply(const NeumannSystem& system, const Vector& g,
                const BoundarySubset& gamma_d);

struct SimulationOptions {
  std::string gamma_d_name = "full";
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  double min_vertex_ratio = 3.0;   // inverse-crime guard: fine/coarse vertices
  bool allow_inverse_crime = false;
  double snap_tolerance = -1.0;    // < 0: derived from the fine boundary facets
  int threads = 0;
  PcgOptions solver;
};

/// Synthetic-data pipeline: solve every pattern on the fine mesh, interpolate
/// the traces onto the coarse measured vertices, add white Gaussian noise
/// with standard deviation epsilon * max_k max_j |f_k(x_j)| at the measured
/// nodes, then re-project each trace to ds-mean-zero. Bit-reproducible for a
/// fixed seed; the noise stream is addressed by (pattern, vertex id).
CauchyDataSet simulate_cauchy_data(const SimplicialMesh& fine_mesh,
                                   const NodalField& sigma_fine,
                                   const PatternFamily& fine_patterns,
                                   const BoundarySubset& fine_gamma_d,
                                   const SimplicialMesh& coarse_mesh,
                                   const PatternFamily& coarse_patterns,
                                   const BoundarySubset& coarse_gamma_d,
                                   const SimulationOptions& options);

struct DiscrepancyResult {
  double value = 0.0;
  std::vector<Vector> solutions;  // full Neumann solutions, one per pattern
  std::vector<Vector> residuals;  // nd_apply(g_k) - f_k on the subset
};

/// Sum over patterns of 0.5 || Lambda g_k - f_k ||^2 in the discrete L2 norm
/// of the measured subset; keeps solutions and residuals for gradient reuse.
DiscrepancyResult discrepancy(const NeumannSystem& system,
                              const SparseMatrix& boundary_mass_gamma_d,
                              const BoundarySubset& gamma_d,
                              const CauchyDataSet& data, int threads = 0);

}  // namespace eit
