#include "eit/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "eit/parallel.hpp"

namespace eit {

RegularizationPlan make_plan(const SimplicialMesh& mesh, double alpha,
                             const Vector& mu) {
  if (!(alpha > 0.0)) throw ConfigError("regularization alpha must be > 0");
  if (mu.size() != mesh.num_vertices())
    throw ConfigError("prior field size does not match vertex count");
  if (mu.minCoeff() <= 0.0 || mu.maxCoeff() > 1.0)
    throw ConfigError("prior weights must lie in (0, 1]");
  RegularizationPlan plan;
  plan.alpha = alpha;
  plan.mu = mu;
  plan.beta = node_volumes(mesh);
  return plan;
}

RegularizationPlan make_plan(const SimplicialMesh& mesh, double alpha) {
  return make_plan(mesh, alpha, Vector::Ones(mesh.num_vertices()));
}

NodalField proximal_update(const NodalField& delta_gamma,
                           const NodalField& sobolev_gradient, double step,
                           const RegularizationPlan& plan,
                           const std::vector<bool>& on_boundary) {
  NodalField next(delta_gamma.size());
  for (Index j = 0; j < delta_gamma.size(); ++j) {
    if (on_boundary[static_cast<size_t>(j)]) {
      next[j] = 0.0;
      continue;
    }
    // threshold s alpha_j / ||psi_j||_L1 with alpha_j = alpha beta_j mu_j
    const double descent = delta_gamma[j] - step * sobolev_gradient[j];
    next[j] = soft_threshold(descent, step * plan.alpha * plan.mu[j]);
  }
  return next;
}

NodalField project_admissible(const NodalField& zeta, const NodalField& sigma0,
                              double c) {
  if (!(c > 0.0 && c < 1.0)) throw ConfigError("admissible bound c must be in (0, 1)");
  if (sigma0.minCoeff() < c || sigma0.maxCoeff() > 1.0 / c)
    throw ConfigError("background conductivity violates the admissible bounds");
  NodalField projected(zeta.size());
  for (Index j = 0; j < zeta.size(); ++j)
    projected[j] = std::clamp(zeta[j], c - sigma0[j], 1.0 / c - sigma0[j]);
  return projected;
}

double penalty(const RegularizationPlan& plan, const NodalField& delta_gamma) {
  return plan.node_weights().dot(delta_gamma.cwiseAbs());
}

namespace {

template <int D>
void accumulate_load(const SimplicialMesh& mesh, const Vector& u, const Vector& w,
                     Vector& load) {
  Eigen::Matrix<double, D, D> edges;
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    for (int i = 0; i < D; ++i)
      for (int a = 0; a < D; ++a)
        edges(a, i) = mesh.vertices(mesh.cells(c, i + 1), a) -
                      mesh.vertices(mesh.cells(c, 0), a);
    const double det = edges.determinant();
    const double volume = det / (D == 2 ? 2.0 : 6.0);
    const Eigen::Matrix<double, D, D> inv_t = edges.inverse().transpose();

    Eigen::Matrix<double, D, 1> grad_u = Eigen::Matrix<double, D, 1>::Zero();
    Eigen::Matrix<double, D, 1> grad_w = Eigen::Matrix<double, D, 1>::Zero();
    const double u0 = u[mesh.cells(c, 0)], w0 = w[mesh.cells(c, 0)];
    for (int i = 0; i < D; ++i) {
      grad_u += (u[mesh.cells(c, i + 1)] - u0) * inv_t.col(i);
      grad_w += (w[mesh.cells(c, i + 1)] - w0) * inv_t.col(i);
    }

    const double cell_term = -grad_u.dot(grad_w) * volume / (D + 1);
    for (int i = 0; i <= D; ++i) load[mesh.cells(c, i)] += cell_term;
  }
}

}  // namespace

Vector gradient_load(const SimplicialMesh& mesh, const NeumannSystem& system,
                     const BoundarySubset& gamma_d,
                     const SparseMatrix& boundary_mass_gamma_d,
                     const std::vector<Vector>& solutions,
                     const std::vector<Vector>& residuals, int threads) {
  const int K = static_cast<int>(solutions.size());
  std::vector<Vector> adjoints(static_cast<size_t>(K));
  parallel_for(
      K,
      [&](int k) {
        adjoints[static_cast<size_t>(k)] = solve_neumann_load(
            system, boundary_mass_gamma_d * residuals[static_cast<size_t>(k)], gamma_d);
      },
      threads);

  Vector load = Vector::Zero(mesh.num_vertices());
  for (int k = 0; k < K; ++k) {
    if (mesh.dim == 2)
      accumulate_load<2>(mesh, solutions[static_cast<size_t>(k)],
                         adjoints[static_cast<size_t>(k)], load);
    else
      accumulate_load<3>(mesh, solutions[static_cast<size_t>(k)],
                         adjoints[static_cast<size_t>(k)], load);
  }
  return load;
}

double bb_step(const H1Matrices& h1, const Vector& iterate_change,
               const Vector& gradient_change, const SolverConfig& config) {
  const double numerator = h1_dot(h1, iterate_change, iterate_change);
  const double denominator = h1_dot(h1, iterate_change, gradient_change);
  const double raw =
      denominator > 1e-14 * numerator ? numerator / denominator : config.s_max;
  return std::clamp(raw, config.s_min, config.s_max);
}

ReconstructionResult reconstruct(const SimplicialMesh& mesh,
                                 const CauchyDataSet& data,
                                 const BoundarySubset& gamma_d,
                                 const NodalField& sigma0,
                                 const RegularizationPlan& plan,
                                 const SolverConfig& config) {
  if (data.n_vertices != mesh.num_vertices())
    throw ConfigError("dataset does not match the reconstruction mesh");
  if (sigma0.size() != mesh.num_vertices())
    throw ConfigError("background size does not match vertex count");
  if (!(config.tau > 0.0 && config.tau < 1.0))
    throw ConfigError("tau must lie in (0, 1)");
  if (!(config.s_min > 0.0 && config.s_min <= config.s_max))
    throw ConfigError("need 0 < s_min <= s_max");
  if (!(config.shrink > 0.0 && config.shrink < 1.0))
    throw ConfigError("step shrink factor must lie in (0, 1)");

  const auto on_boundary = boundary_vertex_mask(mesh);
  const H1Matrices h1 = assemble_h1_matrices(mesh);
  const RieszSolver riesz(mesh, h1, config.linear);
  const SparseMatrix B_gamma_d = assemble_boundary_mass(mesh, gamma_d);

  const auto evaluate = [&](const NodalField& delta_gamma) {
    const NeumannSystem system =
        make_neumann_system(mesh, sigma0 + delta_gamma, config.linear);
    DiscrepancyResult disc =
        discrepancy(system, B_gamma_d, gamma_d, data, config.threads);
    return disc;
  };

  ReconstructionResult result;
  NodalField current = NodalField::Zero(mesh.num_vertices());
  NodalField previous;
  Vector gradient_current, gradient_previous;

  DiscrepancyResult eval = evaluate(current);
  double objective = eval.value + penalty(plan, current);
  result.initial_objective = objective;

  std::deque<double> history{objective};
  NodalField best = current;
  double best_objective = objective;
  result.reason = StopReason::IterationCap;

  for (int i = 0; i < config.max_iterations; ++i) {
    const NeumannSystem system =
        make_neumann_system(mesh, sigma0 + current, config.linear);
    const Vector load = gradient_load(mesh, system, gamma_d, B_gamma_d,
                                      eval.solutions, eval.residuals, config.threads);
    gradient_current = riesz.solve(load);

    // Barzilai-Borwein step from the previous accepted move; the first
    // iteration has no history and starts at s_min.
    double step = config.s_min;
    if (i > 0)
      step = bb_step(h1, current - previous, gradient_current - gradient_previous,
                     config);

    // Reduce the step until the weak-monotonicity test accepts the candidate.
    const double reference = *std::max_element(history.begin(), history.end());
    NodalField candidate;
    DiscrepancyResult candidate_eval;
    double candidate_objective = 0.0;
    double h1_change = 0.0;
    int trials = 0;
    bool accepted = false;
    while (true) {
      candidate = project_admissible(
          proximal_update(current, gradient_current, step, plan, on_boundary),
          sigma0, config.c);
      const Vector move = candidate - current;
      h1_change = std::sqrt(std::max(h1_dot(h1, move, move), 0.0));

      if (h1_change == 0.0) {
        candidate_eval = eval;  // same iterate, same solves
        candidate_objective = objective;
      } else {
        candidate_eval = evaluate(candidate);
        candidate_objective = candidate_eval.value + penalty(plan, candidate);
      }

      if (candidate_objective <=
          reference - 0.5 * config.tau / step * h1_change * h1_change) {
        accepted = true;
        break;
      }
      step *= config.shrink;
      ++trials;
      if (step < config.s_stop) break;  // stopping rule reached while shrinking
    }

    if (!accepted) {
      result.reason = StopReason::StepSize;
      break;
    }

    previous = current;
    gradient_previous = gradient_current;
    current = candidate;
    eval = std::move(candidate_eval);
    objective = candidate_objective;

    history.push_back(objective);
    if (static_cast<int>(history.size()) > config.history) history.pop_front();

    IterationRecord record;
    record.iteration = i;
    record.objective = objective;
    record.discrepancy = eval.value;
    record.penalty = objective - eval.value;
    record.step = step;
    record.trials = trials;
    record.h1_change = h1_change;
    result.log.push_back(record);
    if (config.observer) config.observer(record, current);

    if (objective < best_objective) {
      best_objective = objective;
      best = current;
    }

    if (h1_change == 0.0) {
      result.reason = StopReason::Stationary;
      break;
    }
  }

  if (result.reason == StopReason::IterationCap && best_objective < objective) {
    current = best;
    objective = best_objective;
  }
  result.delta_gamma = current;
  result.objective = objective;
  return result;
}

}  // namespace eit
