#include <doctest.h>

#include <cmath>
#include <random>

#include "eit/fem.hpp"
#include "eit/harmonics.hpp"
#include "eit/mesh.hpp"

using namespace eit;

namespace {

Vector mean_corrected_boundary_values(const SimplicialMesh& mesh,
                                      const Vector& weights,
                                      const std::function<double(const Eigen::Vector3d&)>& f) {
  Vector g = Vector::Zero(mesh.num_vertices());
  const auto on_boundary = boundary_vertex_mask(mesh);
  for (Index v = 0; v < mesh.num_vertices(); ++v)
    if (on_boundary[static_cast<size_t>(v)]) {
      Eigen::Vector3d p = Eigen::Vector3d::Zero();
      for (int a = 0; a < mesh.dim; ++a) p[a] = mesh.vertices(v, a);
      g[v] = f(p);
    }
  const double mean = weights.dot(g) / weights.sum();
  for (Index v = 0; v < mesh.num_vertices(); ++v)
    if (on_boundary[static_cast<size_t>(v)]) g[v] -= mean;
  return g;
}

double subset_l2_error(const SparseMatrix& B, const Vector& a, const Vector& b) {
  const Vector d = a - b;
  return std::sqrt(d.dot(B * d) / std::max(b.dot(B * b), 1e-300));
}

Vector grounded(const Vector& values, const BoundarySubset& subset) {
  Vector out = values;
  out.array() -= subset.vertex_weights.dot(values) / subset.area;
  return out;
}

}  // namespace

TEST_CASE("stiffness: kernel, symmetry and linear scaling") {
  const auto mesh = generate_ball_mesh(2, 3);
  const Vector ones = Vector::Ones(mesh.num_vertices());
  const SparseMatrix K1 = assemble_stiffness(mesh, ones);

  CHECK((K1 * ones).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((Matrix(K1) - Matrix(K1).transpose()).cwiseAbs().maxCoeff() < 1e-14);

  const SparseMatrix K2 = assemble_stiffness(mesh, 2.0 * ones);
  CHECK((Matrix(K2) - 2.0 * Matrix(K1)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("mass matrices: partition of unity and positive definiteness") {
  const auto mesh = generate_ball_mesh(3, 2);
  const auto h1 = assemble_h1_matrices(mesh);
  const Vector ones = Vector::Ones(mesh.num_vertices());

  CHECK(ones.dot(h1.mass * ones) == doctest::Approx(mesh_volume(mesh)).epsilon(1e-13));

  const auto whole = mark_boundary_subset(mesh, [](const Eigen::Vector3d&) { return true; });
  const SparseMatrix B = assemble_boundary_mass(mesh, whole);
  CHECK(ones.dot(B * ones) == doctest::Approx(whole.area).epsilon(1e-13));
  CHECK((B * ones - whole.vertex_weights).cwiseAbs().maxCoeff() < 1e-13);

  std::mt19937 rng(7);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 5; ++trial) {
    Vector v(mesh.num_vertices());
    for (Index i = 0; i < v.size(); ++i) v[i] = gauss(rng);
    CHECK(v.dot(h1.h1 * v) > 0.0);
  }
}

TEST_CASE("energy positivity for admissible gamma") {
  const auto mesh = generate_ball_mesh(2, 3);
  const double c = 0.5;
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> unif(c, 1.0 / c);
  Vector gamma(mesh.num_vertices());
  for (Index i = 0; i < gamma.size(); ++i) gamma[i] = unif(rng);
  const SparseMatrix K = assemble_stiffness(mesh, gamma);
  const SparseMatrix K1 = assemble_stiffness(mesh, Vector::Ones(mesh.num_vertices()));
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 5; ++trial) {
    Vector u(mesh.num_vertices());
    for (Index i = 0; i < u.size(); ++i) u[i] = gauss(rng);
    CHECK(u.dot(K * u) >= c * u.dot(K1 * u) - 1e-12);
  }
}

TEST_CASE("Neumann solve: zero data gives zero solution") {
  const auto mesh = generate_ball_mesh(2, 2);
  const auto system = make_neumann_system(mesh, Vector::Ones(mesh.num_vertices()));
  const auto whole = mark_boundary_subset(mesh, [](const Eigen::Vector3d&) { return true; });
  const Vector u = solve_neumann(system, Vector::Zero(mesh.num_vertices()), whole);
  CHECK(u.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Neumann solve rejects incompatible data") {
  const auto mesh = generate_ball_mesh(2, 2);
  const auto system = make_neumann_system(mesh, Vector::Ones(mesh.num_vertices()));
  const auto whole = mark_boundary_subset(mesh, [](const Eigen::Vector3d&) { return true; });
  Vector g = Vector::Zero(mesh.num_vertices());
  const auto on_boundary = boundary_vertex_mask(mesh);
  for (Index v = 0; v < mesh.num_vertices(); ++v)
    if (on_boundary[static_cast<size_t>(v)]) g[v] = 1.0;  // pure inflow
  CHECK_THROWS_AS(solve_neumann(system, g, whole), SolverError);
}

TEST_CASE("disk ND map matches the trigonometric oracle") {
  const auto mesh = generate_ball_mesh(2, 16);
  const auto whole = mark_boundary_subset(mesh, [](const Eigen::Vector3d&) { return true; });
  const SparseMatrix B = assemble_boundary_mass(mesh, whole);
  const auto system = make_neumann_system(mesh, Vector::Ones(mesh.num_vertices()));

  const double bounds[] = {5e-4, 5e-3, 1e-2, 2e-2, 3e-2};
  for (int n = 1; n <= 5; ++n) {
    const Vector g = mean_corrected_boundary_values(
        mesh, whole.vertex_weights,
        [n](const Eigen::Vector3d& p) { return std::cos(n * std::atan2(p.y(), p.x())); });
    const Vector u = solve_neumann(system, g, whole);
    const Vector expected = grounded(g / n, whole);
    const double err = subset_l2_error(B, u, expected);
    MESSAGE("disk n=", n, " relative trace error ", err);
    CHECK(err < bounds[n - 1]);
  }
}

TEST_CASE("ball ND map matches the spherical-harmonic oracle") {
  const auto mesh = generate_ball_mesh(3, 6);
  const auto whole = mark_boundary_subset(mesh, [](const Eigen::Vector3d&) { return true; });
  const SparseMatrix B = assemble_boundary_mass(mesh, whole);
  const auto system = make_neumann_system(mesh, Vector::Ones(mesh.num_vertices()));

  for (const auto [n, m] : {std::pair{1, 0}, std::pair{2, 1}, std::pair{3, -2}}) {
    const Vector g = mean_corrected_boundary_values(
        mesh, whole.vertex_weights,
        [n = n, m = m](const Eigen::Vector3d& p) { return real_spherical_harmonic(n, m, p); });
    const Vector u = solve_neumann(system, g, whole);
    const Vector expected = grounded(g / n, whole);
    const double err = subset_l2_error(B, u, expected);
    MESSAGE("ball (n,m)=(", n, ",", m, ") relative trace error ", err);
    CHECK(err < 0.06);
  }
}

TEST_CASE("constant conductivity scales the ND map") {
  const auto mesh = generate_ball_mesh(2, 8);
  const auto whole = mark_boundary_subset(mesh, [](const Eigen::Vector3d&) { return true; });
  const auto sys1 = make_neumann_system(mesh, Vector::Ones(mesh.num_vertices()));
  const auto sys2 = make_neumann_system(mesh, 2.0 * Vector::Ones(mesh.num_vertices()));
  const Vector g = mean_corrected_boundary_values(
      mesh, whole.vertex_weights,
      [](const Eigen::Vector3d& p) { return std::cos(2 * std::atan2(p.y(), p.x())); });
  const Vector u1 = solve_neumann(sys1, g, whole);
  const Vector u2 = solve_neumann(sys2, g, whole);
  CHECK((u2 - 0.5 * u1).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("ND map is self-adjoint") {
  const auto mesh = generate_ball_mesh(2, 6);
  const auto whole = mark_boundary_subset(mesh, [](const Eigen::Vector3d&) { return true; });
  const SparseMatrix B = assemble_boundary_mass(mesh, whole);

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> unif(0.5, 2.0);
  Vector gamma(mesh.num_vertices());
  for (Index i = 0; i < gamma.size(); ++i) gamma[i] = unif(rng);
  const auto system = make_neumann_system(mesh, gamma);

  std::normal_distribution<double> gauss;
  const auto random_pattern = [&] {
    Vector g = Vector::Zero(mesh.num_vertices());
    const auto on_boundary = boundary_vertex_mask(mesh);
    for (Index v = 0; v < mesh.num_vertices(); ++v)
      if (on_boundary[static_cast<size_t>(v)]) g[v] = gauss(rng);
    const double mean = whole.vertex_weights.dot(g) / whole.area;
    for (Index v = 0; v < mesh.num_vertices(); ++v)
      if (whole.vertex_weights[v] > 0) g[v] -= mean;
    return g;
  };

  const Vector g1 = random_pattern();
  const Vector g2 = random_pattern();
  const Vector u1 = solve_neumann(system, g1, whole);
  const Vector u2 = solve_neumann(system, g2, whole);
  const double lhs = g1.dot(B * u2);
  const double rhs = g2.dot(B * u1);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-7));
}

TEST_CASE("Riesz solve: identity, zero load and boundary values") {
  const auto mesh = generate_ball_mesh(2, 4);
  const auto h1 = assemble_h1_matrices(mesh);
  const RieszSolver riesz(mesh, h1);

  CHECK(riesz.solve(Vector::Zero(mesh.num_vertices())).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937 rng(5);
  std::normal_distribution<double> gauss;
  Vector load(mesh.num_vertices());
  for (Index i = 0; i < load.size(); ++i) load[i] = gauss(rng);
  const Vector v = riesz.solve(load);

  const auto on_boundary = boundary_vertex_mask(mesh);
  for (Index i = 0; i < v.size(); ++i)
    if (on_boundary[static_cast<size_t>(i)]) CHECK(v[i] == 0.0);

  for (int trial = 0; trial < 3; ++trial) {
    Vector eta = Vector::Zero(mesh.num_vertices());
    for (Index i = 0; i < eta.size(); ++i)
      if (!on_boundary[static_cast<size_t>(i)]) eta[i] = gauss(rng);
    const double lhs = eta.dot(h1.h1 * v);
    double rhs = 0.0;
    for (Index i = 0; i < eta.size(); ++i)
      if (!on_boundary[static_cast<size_t>(i)]) rhs += load[i] * eta[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
  }
}
