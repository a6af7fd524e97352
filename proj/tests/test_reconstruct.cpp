#include <doctest.h>

#include <cmath>
#include <random>

#include "eit/forward.hpp"
#include "eit/phantom.hpp"
#include "eit/reconstruct.hpp"

using namespace eit;

namespace {

// smallest of 1/2 (t - d)^2 + beta |t| on a fine grid around the candidates
double grid_search_prox(double d, double beta) {
  double best_t = 0.0, best_value = 0.5 * d * d;
  const double span = std::abs(d) + 1.0;
  for (int i = -200000; i <= 200000; ++i) {
    const double t = span * i / 200000.0;
    const double value = 0.5 * (t - d) * (t - d) + beta * std::abs(t);
    if (value < best_value) {
      best_value = value;
      best_t = t;
    }
  }
  return best_t;
}

struct Problem {
  SimplicialMesh mesh;
  BoundarySubset gamma_d;
  SparseMatrix B;
  CauchyDataSet data;
};

Problem make_problem(int dim, int coarse_r, int fine_r, int n_max, double epsilon,
                     std::uint64_t seed) {
  Problem p;
  p.mesh = generate_ball_mesh(dim, coarse_r);
  p.gamma_d = mark_boundary_subset(p.mesh, [](const Eigen::Vector3d&) { return true; });
  p.B = assemble_boundary_mass(p.mesh, p.gamma_d);

  const auto fine = generate_ball_mesh(dim, fine_r);
  const auto fine_gamma_d =
      mark_boundary_subset(fine, [](const Eigen::Vector3d&) { return true; });
  const auto phantom = build_phantom(default_phantom(), fine);

  SimulationOptions options;
  options.epsilon = epsilon;
  options.seed = seed;
  p.data = simulate_cauchy_data(fine, phantom.sigma, full_data_patterns(fine, n_max),
                                fine_gamma_d, p.mesh, full_data_patterns(p.mesh, n_max),
                                p.gamma_d, options);
  return p;
}

double discrepancy_at(const Problem& p, const NodalField& delta_gamma) {
  const auto system = make_neumann_system(
      p.mesh, NodalField::Constant(p.mesh.num_vertices(), 1.0) + delta_gamma);
  return discrepancy(system, p.B, p.gamma_d, p.data).value;
}

}  // namespace

TEST_CASE("soft threshold: values and the proximal property") {
  CHECK(soft_threshold(1.2, 0.5) == doctest::Approx(0.7));
  CHECK(soft_threshold(-3.0, 1.0) == doctest::Approx(-2.0));
  CHECK(soft_threshold(0.3, 0.5) == 0.0);
  CHECK(soft_threshold(0.0, 0.5) == 0.0);

  std::mt19937 rng(17);
  std::uniform_real_distribution<double> d_dist(-3.0, 3.0), b_dist(0.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    const double d = d_dist(rng), beta = b_dist(rng);
    CHECK(soft_threshold(d, beta) ==
          doctest::Approx(grid_search_prox(d, beta)).epsilon(1e-4));
    CHECK(soft_threshold(-d, beta) == -soft_threshold(d, beta));
    CHECK(std::abs(soft_threshold(d, beta)) <= std::abs(d));
  }
}

TEST_CASE("projection onto the admissible set") {
  const Index n = 12;
  const NodalField sigma0 = NodalField::Ones(n);
  NodalField zeta = NodalField::Zero(n);
  zeta[3] = 3.0;
  zeta[5] = -0.9;

  const NodalField projected = project_admissible(zeta, sigma0, 0.5);
  CHECK(projected[3] == doctest::Approx(1.0));   // clamped at 1/c = 2
  CHECK(projected[5] == doctest::Approx(-0.5));  // clamped at c = 0.5
  CHECK(projected[0] == 0.0);

  // identity on admissible fields, idempotent in general
  NodalField fine = 0.3 * NodalField::Random(n);
  CHECK((project_admissible(fine, sigma0, 0.5) - fine).cwiseAbs().maxCoeff() == 0.0);
  NodalField wild = 5.0 * NodalField::Random(n);
  const NodalField once = project_admissible(wild, sigma0, 0.5);
  CHECK((project_admissible(once, sigma0, 0.5) - once).cwiseAbs().maxCoeff() == 0.0);

  NodalField bad_sigma0 = NodalField::Constant(n, 3.0);
  CHECK_THROWS_AS(project_admissible(zeta, bad_sigma0, 0.5), ConfigError);
}

TEST_CASE("Barzilai-Borwein step: ratio and degenerate cases") {
  const auto mesh = generate_ball_mesh(2, 3);
  const auto h1 = assemble_h1_matrices(mesh);
  SolverConfig config;  // s_min = 1, s_max = 1000

  std::mt19937 rng(23);
  std::normal_distribution<double> gauss;
  Vector d(mesh.num_vertices());
  for (Index i = 0; i < d.size(); ++i) d[i] = gauss(rng);

  // gradient change = 2 x iterate change -> raw 0.5, clamped to s_min = 1
  CHECK(bb_step(h1, d, 2.0 * d, config) == doctest::Approx(1.0));
  CHECK(bb_step(h1, d, Vector(1.0 * d), config) == doctest::Approx(1.0));
  // raw value inside the interval is kept
  CHECK(bb_step(h1, d, 0.1 * d, config) == doctest::Approx(10.0));
  // vanishing or negative curvature falls back to s_max
  CHECK(bb_step(h1, d, Vector::Zero(d.size()), config) == doctest::Approx(1000.0));
  CHECK(bb_step(h1, d, -d, config) == doctest::Approx(1000.0));
}

TEST_CASE("proximal update: threshold is step * alpha * mu, boundary pinned") {
  for (const int r : {2, 4}) {
    const auto mesh = generate_ball_mesh(2, r);
    const auto plan = make_plan(mesh, 0.25);
    const auto on_boundary = boundary_vertex_mask(mesh);
    const Vector beta = node_volumes(mesh);

    // the node-volume weight cancels against ||psi_j||_L1 exactly
    for (Index j = 0; j < mesh.num_vertices(); ++j) {
      const double threshold = 2.0 * plan.alpha * plan.beta[j] * plan.mu[j] / beta[j];
      CHECK(threshold == doctest::Approx(2.0 * 0.25).epsilon(1e-14));
    }

    NodalField dg = NodalField::Zero(mesh.num_vertices());
    NodalField grad = NodalField::Constant(mesh.num_vertices(), -1.0);
    const NodalField next = proximal_update(dg, grad, 2.0, plan, on_boundary);
    for (Index j = 0; j < mesh.num_vertices(); ++j) {
      if (on_boundary[static_cast<size_t>(j)])
        CHECK(next[j] == 0.0);
      else
        CHECK(next[j] == doctest::Approx(2.0 - 2.0 * 0.25).epsilon(1e-14));
    }

    // alpha -> 0 limit: plain projected gradient step
    const auto plain = make_plan(mesh, 1e-300);
    const NodalField step = proximal_update(dg, grad, 2.0, plain, on_boundary);
    for (Index j = 0; j < mesh.num_vertices(); ++j)
      if (!on_boundary[static_cast<size_t>(j)])
        CHECK(step[j] == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("penalty of a single hat function is alpha mu_j beta_j") {
  const auto mesh = generate_ball_mesh(2, 3);
  Vector mu = Vector::Ones(mesh.num_vertices());
  mu[10] = 0.25;
  const auto plan = make_plan(mesh, 0.7, mu);
  NodalField hat = NodalField::Zero(mesh.num_vertices());
  hat[10] = 1.0;
  CHECK(penalty(plan, hat) ==
        doctest::Approx(0.7 * 0.25 * node_volumes(mesh)[10]).epsilon(1e-14));
  hat[10] = -2.0;
  CHECK(penalty(plan, hat) ==
        doctest::Approx(2.0 * 0.7 * 0.25 * node_volumes(mesh)[10]).epsilon(1e-14));
}

TEST_CASE("gradient load matches central finite differences (2D)") {
  const auto p = make_problem(2, 11, 20, 2, 0.0, 1);
  const Index n = p.mesh.num_vertices();
  const NodalField sigma0 = NodalField::Ones(n);
  const auto on_boundary = boundary_vertex_mask(p.mesh);

  const auto system = make_neumann_system(p.mesh, sigma0);
  const auto eval = discrepancy(system, p.B, p.gamma_d, p.data);
  const Vector load = gradient_load(p.mesh, system, p.gamma_d, p.B, eval.solutions,
                                    eval.residuals);

  std::mt19937 rng(31);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const double h = 1e-4;
  for (int trial = 0; trial < 5; ++trial) {
    NodalField eta = NodalField::Zero(n);
    for (Index i = 0; i < n; ++i)
      if (!on_boundary[static_cast<size_t>(i)]) eta[i] = unif(rng);

    const double forward = discrepancy_at(p, h * eta);
    const double backward = discrepancy_at(p, -h * eta);
    const double fd = (forward - backward) / (2.0 * h);
    const double predicted = load.dot(eta);
    MESSAGE("fd ", fd, " adjoint ", predicted, " rel ",
            std::abs(fd - predicted) / std::abs(predicted));
    CHECK(std::abs(fd - predicted) / std::abs(predicted) < 1e-3);
  }
}

TEST_CASE("gradient load matches finite differences for partial data") {
  // the measured subset is a half-circle; the adjoint load must use the
  // subset boundary mass, which this check is sensitive to
  const auto mesh = generate_ball_mesh(2, 9);
  const auto gamma_d = hemisphere_subset(mesh, Hemisphere::Lower);
  const SparseMatrix B = assemble_boundary_mass(mesh, gamma_d);

  const auto fine = generate_ball_mesh(2, 16);
  const auto fine_gamma_d = hemisphere_subset(fine, Hemisphere::Lower);
  const auto phantom = build_phantom(default_phantom(), fine);
  SimulationOptions options;
  const auto data = simulate_cauchy_data(
      fine, phantom.sigma, partial_data_patterns(fine, Hemisphere::Lower, 2),
      fine_gamma_d, mesh, partial_data_patterns(mesh, Hemisphere::Lower, 2), gamma_d,
      options);

  const NodalField sigma0 = NodalField::Ones(mesh.num_vertices());
  const auto system = make_neumann_system(mesh, sigma0);
  const auto eval = discrepancy(system, B, gamma_d, data);
  const Vector load =
      gradient_load(mesh, system, gamma_d, B, eval.solutions, eval.residuals);

  const auto value_at = [&](const NodalField& dg) {
    const auto sys = make_neumann_system(mesh, sigma0 + dg);
    return discrepancy(sys, B, gamma_d, data).value;
  };

  const auto on_boundary = boundary_vertex_mask(mesh);
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const double h = 1e-4;
  for (int trial = 0; trial < 3; ++trial) {
    NodalField eta = NodalField::Zero(mesh.num_vertices());
    for (Index i = 0; i < eta.size(); ++i)
      if (!on_boundary[static_cast<size_t>(i)]) eta[i] = unif(rng);
    const double fd = (value_at(h * eta) - value_at(-h * eta)) / (2.0 * h);
    const double predicted = load.dot(eta);
    CHECK(std::abs(fd - predicted) / std::abs(predicted) < 1e-3);
  }
}

TEST_CASE("gradient load is additive over patterns") {
  const auto p = make_problem(2, 6, 11, 2, 0.0, 2);
  const auto system = make_neumann_system(p.mesh, NodalField::Ones(p.mesh.num_vertices()));
  const auto eval = discrepancy(system, p.B, p.gamma_d, p.data);
  const Vector total = gradient_load(p.mesh, system, p.gamma_d, p.B, eval.solutions,
                                     eval.residuals);

  Vector sum = Vector::Zero(p.mesh.num_vertices());
  for (size_t k = 0; k < eval.solutions.size(); ++k)
    sum += gradient_load(p.mesh, system, p.gamma_d, p.B, {eval.solutions[k]},
                         {eval.residuals[k]});
  CHECK((total - sum).cwiseAbs().maxCoeff() < 1e-14 * total.cwiseAbs().maxCoeff());
}

TEST_CASE("zero-measurement fixed point: exact background data keeps dg = 0") {
  const auto mesh = generate_ball_mesh(2, 6);
  const auto gamma_d =
      mark_boundary_subset(mesh, [](const Eigen::Vector3d&) { return true; });
  const auto family = full_data_patterns(mesh, 2);

  SimulationOptions options;
  options.allow_inverse_crime = true;  // deliberate: the fixed-point identity
  const auto data = simulate_cauchy_data(mesh, Vector::Ones(mesh.num_vertices()), family,
                                         gamma_d, mesh, family, gamma_d, options);

  // the gradient load vanishes to solver tolerance
  const auto system = make_neumann_system(mesh, Vector::Ones(mesh.num_vertices()));
  const SparseMatrix B = assemble_boundary_mass(mesh, gamma_d);
  const auto eval = discrepancy(system, B, gamma_d, data);
  const Vector load =
      gradient_load(mesh, system, gamma_d, B, eval.solutions, eval.residuals);
  CHECK(load.cwiseAbs().maxCoeff() < 1e-10);

  SolverConfig config;
  config.max_iterations = 3;
  const auto result = reconstruct(mesh, data, gamma_d, NodalField::Ones(mesh.num_vertices()),
                                  make_plan(mesh, 1e-4), config);
  CHECK(result.delta_gamma.cwiseAbs().maxCoeff() == 0.0);
  CHECK(result.reason == StopReason::Stationary);
}

TEST_CASE("small reconstruction run: loop invariants hold") {
  const auto p = make_problem(2, 7, 13, 3, 1e-2, 5);
  const NodalField sigma0 = NodalField::Ones(p.mesh.num_vertices());

  SolverConfig config;
  config.c = 0.25;
  config.max_iterations = 60;
  const auto plan = make_plan(p.mesh, 5e-5);
  const auto result = reconstruct(p.mesh, p.data, p.gamma_d, sigma0, plan, config);

  REQUIRE(!result.log.empty());

  // weak monotonicity replayed from the log
  std::vector<double> objectives{result.initial_objective};
  for (const auto& row : result.log) {
    double reference = -1e300;
    const size_t first =
        objectives.size() > static_cast<size_t>(config.history)
            ? objectives.size() - static_cast<size_t>(config.history)
            : 0;
    for (size_t j = first; j < objectives.size(); ++j)
      reference = std::max(reference, objectives[j]);
    CHECK(row.objective <=
          reference - 0.5 * config.tau / row.step * row.h1_change * row.h1_change +
              1e-12 * std::abs(reference));
    CHECK(row.step >= config.s_stop);
    CHECK(row.step <= config.s_max);
    objectives.push_back(row.objective);
  }

  // iterates admissible and zero on the boundary
  const auto on_boundary = boundary_vertex_mask(p.mesh);
  for (Index v = 0; v < p.mesh.num_vertices(); ++v) {
    const double sigma = sigma0[v] + result.delta_gamma[v];
    CHECK(sigma >= config.c - 1e-15);
    CHECK(sigma <= 1.0 / config.c + 1e-15);
    if (on_boundary[static_cast<size_t>(v)]) CHECK(result.delta_gamma[v] == 0.0);
  }

  CHECK(result.objective < result.initial_objective);
}
