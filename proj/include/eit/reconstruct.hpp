#pragma once

#include <functional>
#include <vector>

#include "eit/fem.hpp"
#include "eit/forward.hpp"
#include "eit/mesh.hpp"
#include "eit/types.hpp"

namespace eit {

/// Soft shrinkage S_beta(x) = sign(x) max(|x| - beta, 0); the proximal map of
/// beta |.|.
inline double soft_threshold(double x, double beta) {
  const double shrunk = std::abs(x) - beta;
  return shrunk > 0.0 ? (x > 0.0 ? shrunk : -shrunk) : 0.0;
}

/// Distributed l1 weights alpha_j = alpha * beta_j * mu_j: `alpha` the base
/// regularization parameter, `mu` the spatial prior in (0, 1] and `beta` the
/// node volumes, which make alpha nearly mesh-independent.
struct RegularizationPlan {
  double alpha = 0.0;
  Vector mu;
  Vector beta;

  Vector node_weights() const { return alpha * beta.cwiseProduct(mu); }
};

RegularizationPlan make_plan(const SimplicialMesh& mesh, double alpha,
                             const Vector& mu);
RegularizationPlan make_plan(const SimplicialMesh& mesh, double alpha);

/// Nodewise gradient-descent-plus-shrinkage step: threshold at node j is
/// step * alpha_j / ||psi_j||_L1 = step * alpha * mu_j. Boundary nodes are
/// forced to zero.
NodalField proximal_update(const NodalField& delta_gamma,
                           const NodalField& sobolev_gradient, double step,
                           const RegularizationPlan& plan,
                           const std::vector<bool>& on_boundary);

/// Projection onto the admissible set: clamp sigma0 + zeta into [c, 1/c]
/// nodewise and subtract sigma0 again. Idempotent and nonexpansive.
NodalField project_admissible(const NodalField& zeta, const NodalField& sigma0,
                              double c);

/// Weighted l1 penalty sum_j alpha beta_j mu_j |delta_gamma_j|.
double penalty(const RegularizationPlan& plan, const NodalField& delta_gamma);

/// Discrete load of the discrepancy derivative: for each pattern an adjoint
/// Neumann solve driven by the measured residual (right-hand side
/// B_Gamma r, the boundary mass of the measured subset), then
/// load_j = sum_k sum_{cells owning j} -grad(u_k).grad(w_k) |cell| / (d+1),
/// the evaluation of eta -> integral G eta dx on the nodal basis.
Vector gradient_load(const SimplicialMesh& mesh, const NeumannSystem& system,
                     const BoundarySubset& gamma_d,
                     const SparseMatrix& boundary_mass_gamma_d,
                     const std::vector<Vector>& solutions,
                     const std::vector<Vector>& residuals, int threads = 0);

struct IterationRecord;

struct SolverConfig {
  double c = 0.25;          // admissible bounds [c, 1/c]
  int history = 5;          // M, objectives compared by the weak-monotonicity test
  double tau = 1e-5;
  double s_min = 1.0;
  double s_max = 1000.0;
  double s_stop = 1e-3;
  double shrink = 0.5;      // step reduction when weak monotonicity fails
  int max_iterations = 200;
  PcgOptions linear;
  int threads = 0;
  // called with every accepted iterate; for logging and invariant checks
  std::function<void(const IterationRecord&, const NodalField&)> observer;
};

/// Barzilai-Borwein step from the last iterate and Sobolev-gradient moves,
/// measured in the H1 inner product and clamped to [s_min, s_max]. A tiny or
/// negative curvature denominator yields s_max.
double bb_step(const H1Matrices& h1, const Vector& iterate_change,
               const Vector& gradient_change, const SolverConfig& config);

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  double discrepancy = 0.0;
  double penalty = 0.0;
  double step = 0.0;
  int trials = 0;             // step-size reductions before acceptance
  double h1_change = 0.0;     // || dg_{i+1} - dg_i ||_{H1}
};

enum class StopReason { StepSize, IterationCap, Stationary };

struct ReconstructionResult {
  NodalField delta_gamma;
  std::vector<IterationRecord> log;
  StopReason reason = StopReason::StepSize;
  double objective = 0.0;
  double initial_objective = 0.0;
};

/// The reconstruction loop: Sobolev gradient of the discrepancy, BB step
/// clamped to [s_min, s_max] and reduced until the weak-monotonicity test
/// against the last `history` objectives holds, soft-thresholded update,
/// projection onto the admissible set, stop when the accepted step falls
/// below s_stop.
ReconstructionResult reconstruct(const SimplicialMesh& mesh,
                                 const CauchyDataSet& data,
                                 const BoundarySubset& gamma_d,
                                 const NodalField& sigma0,
                                 const RegularizationPlan& plan,
                                 const SolverConfig& config);

}  // namespace eit
