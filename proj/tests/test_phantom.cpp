#include <doctest.h>

#include <cmath>
#include <set>

#include "eit/fem.hpp"
#include "eit/phantom.hpp"
#include "eit/patterns.hpp"

using namespace eit;

TEST_CASE("phantom values at the reference points") {
  const PhantomSpec spec = default_phantom();
  const double a = 5.0 * M_PI / 12.0;

  CHECK(phantom_value(spec, {-0.09, -0.55, 0.0}, 3) == 2.0);
  CHECK(phantom_value(spec, {0.0, 0.0, 0.9}, 3) == 1.0);
  CHECK(phantom_value(spec, {-0.55 * std::sin(a), 0.55 * std::cos(a), 0.0}, 3) == 0.5);
  CHECK(phantom_value(spec, {0.45 * std::sin(a), 0.45 * std::cos(a), 0.0}, 3) == 0.5);

  // 2D slice keeps the same cross-section
  CHECK(phantom_value(spec, {-0.09, -0.55, 0.0}, 2) == 2.0);
  CHECK(phantom_value(spec, {0.9, 0.0, 0.0}, 2) == 1.0);
}

TEST_CASE("phantom field takes only the configured values") {
  const auto mesh = generate_ball_mesh(3, 4);
  const auto field = build_phantom(default_phantom(), mesh);
  std::set<double> values(field.sigma.data(), field.sigma.data() + field.sigma.size());
  CHECK(values == std::set<double>{0.5, 1.0, 2.0});
  CHECK(field.masks.size() == 3);

  for (Index v = 0; v < mesh.num_vertices(); ++v)
    if (field.masks[0][static_cast<size_t>(v)]) CHECK(field.sigma[v] == 2.0);
}

TEST_CASE("overlapping inclusions are rejected unless allowed") {
  PhantomSpec spec;
  Inclusion a, b;
  a.center = {0.0, 0.0, 0.0};
  a.semi_axes = Eigen::Vector3d::Constant(0.4);
  a.value = 2.0;
  b = a;
  b.center = {0.2, 0.0, 0.0};
  b.value = 3.0;
  spec.inclusions = {a, b};

  const auto mesh = generate_ball_mesh(2, 4);
  CHECK_THROWS_AS(build_phantom(spec, mesh), ConfigError);

  spec.allow_overlap = true;
  const auto field = build_phantom(spec, mesh);  // first-listed wins at overlaps
  bool saw_overlap = false;
  for (Index v = 0; v < mesh.num_vertices(); ++v)
    if (field.masks[0][static_cast<size_t>(v)] && field.masks[1][static_cast<size_t>(v)]) {
      saw_overlap = true;
      CHECK(field.sigma[v] == 2.0);
    }
  CHECK(saw_overlap);
}

TEST_CASE("inclusions poking out of the unit ball are rejected") {
  PhantomSpec spec;
  Inclusion big;
  big.center = {0.5, 0.0, 0.0};
  big.semi_axes = Eigen::Vector3d::Constant(0.6);
  big.value = 2.0;
  spec.inclusions = {big};
  CHECK_THROWS_AS(build_phantom(spec, generate_ball_mesh(2, 2)), ConfigError);
}

TEST_CASE("prior field: dilation geometry and value set") {
  const PhantomSpec spec = default_phantom();
  const Inclusion& ball = spec.inclusions[0];

  // radius 0.35 dilated by 1.1 reaches 0.385, so 0.38 is inside
  const Eigen::Vector3d probe = ball.center + Eigen::Vector3d(0.38, 0, 0);
  CHECK(inside_inclusion(ball, probe, 3, 1.1));
  CHECK(!inside_inclusion(ball, probe, 3, 1.0));

  const auto mesh = generate_ball_mesh(3, 4);
  const auto field = build_phantom(spec, mesh);
  const NodalField mu = prior_field(spec, mesh, 1.1, 1e-2);

  std::set<double> values(mu.data(), mu.data() + mu.size());
  CHECK(values == std::set<double>{1e-2, 1.0});

  // the low-penalty region contains the true support vertex-wise
  for (Index v = 0; v < mesh.num_vertices(); ++v)
    for (const auto& mask : field.masks)
      if (mask[static_cast<size_t>(v)]) CHECK(mu[v] == 1e-2);

  CHECK(mu[0] == 1.0);  // center vertex of the ball mesh grid is outside

  CHECK_THROWS_AS(prior_field(spec, mesh, 0.9, 1e-2), ConfigError);
}

TEST_CASE("full-data pattern family: counts and mean-zero") {
  const auto mesh = generate_ball_mesh(3, 3);
  const auto whole = mark_boundary_subset(mesh, [](const Eigen::Vector3d&) { return true; });

  CHECK(full_data_patterns(mesh, 5).size() == 35);
  CHECK(full_data_patterns(mesh, 1).size() == 3);

  const auto family = full_data_patterns(mesh, 5);
  for (const auto& g : family.patterns) {
    CHECK(std::abs(whole.vertex_weights.dot(g.values)) < 1e-10);
    CHECK(g.degree >= 1);
    CHECK(std::abs(g.order) <= g.degree);
  }
}

TEST_CASE("2D pattern family has two patterns per frequency") {
  const auto mesh = generate_ball_mesh(2, 4);
  CHECK(full_data_patterns(mesh, 5).size() == 10);
}

TEST_CASE("partial patterns: support, mean and counts") {
  const auto mesh = generate_ball_mesh(3, 3);
  const auto whole = mark_boundary_subset(mesh, [](const Eigen::Vector3d&) { return true; });
  const auto gamma = hemisphere_subset(mesh, Hemisphere::Lower);
  const std::set<Index> support(gamma.vertices.begin(), gamma.vertices.end());

  const auto family = partial_data_patterns(mesh, Hemisphere::Lower, 5);
  CHECK(family.size() == 35);
  for (const auto& g : family.patterns) {
    CHECK(std::abs(whole.vertex_weights.dot(g.values)) < 1e-10);
    for (Index v = 0; v < mesh.num_vertices(); ++v)
      if (g.values[v] != 0.0) CHECK(support.count(v) == 1);
  }
}

TEST_CASE("pattern families are linearly independent") {
  const auto mesh = generate_ball_mesh(3, 3);
  const auto whole = mark_boundary_subset(mesh, [](const Eigen::Vector3d&) { return true; });
  const SparseMatrix B = assemble_boundary_mass(mesh, whole);

  for (const auto& family :
       {full_data_patterns(mesh, 3), partial_data_patterns(mesh, Hemisphere::Upper, 3)}) {
    const int K = family.size();
    Matrix gram(K, K);
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < K; ++j)
        gram(i, j) = family.patterns[static_cast<size_t>(i)].values.dot(
            B * family.patterns[static_cast<size_t>(j)].values);
    Eigen::SelfAdjointEigenSolver<Matrix> eigen(gram);
    CHECK(eigen.eigenvalues().minCoeff() > 1e-4);
  }
}
