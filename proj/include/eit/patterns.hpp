#pragma once

#include <vector>

#include "eit/mesh.hpp"
#include "eit/types.hpp"

namespace eit {

/// A Neumann current pattern as boundary-vertex values: zero off its support,
/// ds-mean-zero over the whole boundary, unit discrete L2 boundary norm.
/// `degree`/`order` keep the (n, m) metadata; in 2D, order > 0 marks the
/// cosine branch and order < 0 the sine branch of frequency `degree`.
struct BoundaryPattern {
  Vector values;
  int degree = 0;
  int order = 0;
};

struct PatternFamily {
  std::vector<BoundaryPattern> patterns;
  int size() const { return static_cast<int>(patterns.size()); }
};

enum class Hemisphere { Lower, Upper };

/// Selects the boundary subset of a hemisphere (facet centroids with z < 0 or
/// z > 0; in 2D the half-circle by the sign of y).
BoundarySubset hemisphere_subset(const SimplicialMesh& mesh, Hemisphere half);

/// Full-boundary current patterns: real spherical harmonics of degree
/// 1..n_max in 3D (n_max = 5 gives the 35-pattern family), cos/sin harmonics
/// in 2D (2 n_max patterns).
PatternFamily full_data_patterns(const SimplicialMesh& mesh, int n_max);

/// Partial-data patterns supported on one hemisphere: the full-data functions
/// pre-composed with the polar-angle doubling that maps the hemisphere onto
/// the whole sphere, so the traces keep the same number of periods. The
/// ds-mean over the whole boundary is removed by a constant on the hemisphere
/// only, preserving the support.
PatternFamily partial_data_patterns(const SimplicialMesh& mesh, Hemisphere half,
                                    int n_max);

}  // namespace eit
