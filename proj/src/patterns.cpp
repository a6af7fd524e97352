#include "eit/patterns.hpp"

#include <cmath>
#include <functional>

#include "eit/fem.hpp"
#include "eit/harmonics.hpp"

namespace eit {

namespace {

// Sampled boundary function -> supported, mean-corrected, normalized pattern.
BoundaryPattern finish_pattern(const BoundarySubset& support,
                               const BoundarySubset& whole, const SparseMatrix& B,
                               Vector values, int degree, int order) {
  double support_weight = 0.0;
  for (const Index v : support.vertices) support_weight += whole.vertex_weights[v];
  const double mean = whole.vertex_weights.dot(values) / support_weight;
  for (const Index v : support.vertices) values[v] -= mean;

  const double norm = std::sqrt(values.dot(B * values));
  if (norm > 0.0) values /= norm;

  BoundaryPattern pattern;
  pattern.values = std::move(values);
  pattern.degree = degree;
  pattern.order = order;
  return pattern;
}

Vector sample_on_subset(const SimplicialMesh& mesh, const BoundarySubset& subset,
                        const std::function<double(const Eigen::Vector3d&)>& f) {
  Vector values = Vector::Zero(mesh.num_vertices());
  for (const Index v : subset.vertices) {
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    for (int a = 0; a < mesh.dim; ++a) p[a] = mesh.vertices(v, a);
    values[v] = f(p);
  }
  return values;
}

// Doubles the polar angle about the hemisphere pole, mapping the closed
// hemisphere onto the whole sphere; the azimuth is preserved.
Eigen::Vector3d stretch_to_sphere(const Eigen::Vector3d& point, Hemisphere half) {
  const double pole_z = half == Hemisphere::Lower ? -1.0 : 1.0;
  const Eigen::Vector3d x = point.normalized();
  const double cos_t = std::clamp(pole_z * x.z(), -1.0, 1.0);
  const double theta2 = 2.0 * std::acos(cos_t);
  const double phi = std::atan2(x.y(), x.x());
  return {std::sin(theta2) * std::cos(phi), std::sin(theta2) * std::sin(phi),
          pole_z * std::cos(theta2)};
}

double stretch_angle_2d(const Eigen::Vector3d& point, Hemisphere half) {
  const double pole = half == Hemisphere::Lower ? -M_PI / 2.0 : M_PI / 2.0;
  double delta = std::atan2(point.y(), point.x()) - pole;
  while (delta > M_PI) delta -= 2.0 * M_PI;
  while (delta < -M_PI) delta += 2.0 * M_PI;
  return pole + 2.0 * delta;
}

}  // namespace

BoundarySubset hemisphere_subset(const SimplicialMesh& mesh, Hemisphere half) {
  const double sign = half == Hemisphere::Lower ? -1.0 : 1.0;
  const int axis = mesh.dim - 1;  // z in 3D, y in 2D
  return mark_boundary_subset(
      mesh, [sign, axis](const Eigen::Vector3d& c) { return sign * c[axis] > 0.0; });
}

PatternFamily full_data_patterns(const SimplicialMesh& mesh, int n_max) {
  const auto whole =
      mark_boundary_subset(mesh, [](const Eigen::Vector3d&) { return true; });
  const SparseMatrix B = assemble_boundary_mass(mesh, whole);

  PatternFamily family;
  for (int n = 1; n <= n_max; ++n) {
    if (mesh.dim == 3) {
      for (int m = -n; m <= n; ++m) {
        Vector values = sample_on_subset(mesh, whole, [n, m](const Eigen::Vector3d& p) {
          return real_spherical_harmonic(n, m, p);
        });
        family.patterns.push_back(
            finish_pattern(whole, whole, B, std::move(values), n, m));
      }
    } else {
      for (const int sign : {1, -1}) {
        Vector values = sample_on_subset(mesh, whole, [n, sign](const Eigen::Vector3d& p) {
          const double theta = std::atan2(p.y(), p.x());
          return sign > 0 ? std::cos(n * theta) : std::sin(n * theta);
        });
        family.patterns.push_back(
            finish_pattern(whole, whole, B, std::move(values), n, sign * n));
      }
    }
  }
  return family;
}

PatternFamily partial_data_patterns(const SimplicialMesh& mesh, Hemisphere half,
                                    int n_max) {
  const auto whole =
      mark_boundary_subset(mesh, [](const Eigen::Vector3d&) { return true; });
  const auto gamma = hemisphere_subset(mesh, half);
  const SparseMatrix B = assemble_boundary_mass(mesh, whole);

  PatternFamily family;
  for (int n = 1; n <= n_max; ++n) {
    if (mesh.dim == 3) {
      for (int m = -n; m <= n; ++m) {
        Vector values = sample_on_subset(mesh, gamma, [&](const Eigen::Vector3d& p) {
          return real_spherical_harmonic(n, m, stretch_to_sphere(p, half));
        });
        family.patterns.push_back(
            finish_pattern(gamma, whole, B, std::move(values), n, m));
      }
    } else {
      for (const int sign : {1, -1}) {
        Vector values = sample_on_subset(mesh, gamma, [&](const Eigen::Vector3d& p) {
          const double theta = stretch_angle_2d(p, half);
          return sign > 0 ? std::cos(n * theta) : std::sin(n * theta);
        });
        family.patterns.push_back(
            finish_pattern(gamma, whole, B, std::move(values), n, sign * n));
      }
    }
  }
  return family;
}

}  // namespace eit
