#include <doctest.h>

#include <cmath>

#include "eit/fem.hpp"
#include "eit/harmonics.hpp"
#include "eit/mesh.hpp"

using namespace eit;

TEST_CASE("associated Legendre matches closed forms") {
  for (const double x : {-0.9, -0.3, 0.0, 0.4, 0.95}) {
    const double s = std::sqrt(1.0 - x * x);
    CHECK(associated_legendre(0, 0, x) == doctest::Approx(1.0));
    CHECK(associated_legendre(1, 0, x) == doctest::Approx(x));
    CHECK(associated_legendre(1, 1, x) == doctest::Approx(-s));
    CHECK(associated_legendre(2, 0, x) == doctest::Approx(0.5 * (3 * x * x - 1)));
    CHECK(associated_legendre(2, 1, x) == doctest::Approx(-3 * x * s));
    CHECK(associated_legendre(2, 2, x) == doctest::Approx(3 * (1 - x * x)));
    CHECK(associated_legendre(3, 3, x) == doctest::Approx(-15 * s * s * s));
  }
  CHECK_THROWS_AS(associated_legendre(2, 3, 0.0), std::invalid_argument);
}

TEST_CASE("degree-0 harmonic is the constant 1/sqrt(4 pi)") {
  for (const auto& p : {Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(1, -2, 0.5)})
    CHECK(real_spherical_harmonic(0, 0, p) ==
          doctest::Approx(1.0 / std::sqrt(4.0 * M_PI)).epsilon(1e-14));
  CHECK_THROWS_AS(real_spherical_harmonic(1, 2, Eigen::Vector3d(0, 0, 1)),
                  std::invalid_argument);
}

TEST_CASE("harmonics are orthonormal under boundary quadrature") {
  const auto mesh = generate_ball_mesh(3, 6);
  const auto whole =
      mark_boundary_subset(mesh, [](const Eigen::Vector3d&) { return true; });
  const SparseMatrix B = assemble_boundary_mass(mesh, whole);
  const auto on_boundary = boundary_vertex_mask(mesh);

  const auto sample = [&](int n, int m) {
    Vector g = Vector::Zero(mesh.num_vertices());
    for (Index v = 0; v < mesh.num_vertices(); ++v)
      if (on_boundary[static_cast<size_t>(v)]) {
        Eigen::Vector3d p;
        p << mesh.vertices(v, 0), mesh.vertices(v, 1), mesh.vertices(v, 2);
        g[v] = real_spherical_harmonic(n, m, p);
      }
    return g;
  };

  for (const auto [n, m] : {std::pair{1, 0}, std::pair{2, -1}, std::pair{3, 2},
                            std::pair{5, -5}, std::pair{4, 0}}) {
    const Vector g = sample(n, m);
    CHECK(g.dot(B * g) == doctest::Approx(1.0).epsilon(0.05));
  }

  CHECK(std::abs(sample(1, 0).dot(B * sample(1, 1))) < 0.02);
  CHECK(std::abs(sample(2, 1).dot(B * sample(3, 1))) < 0.02);
  CHECK(std::abs(sample(2, -2).dot(B * sample(2, 2))) < 0.02);
}
