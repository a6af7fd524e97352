#pragma once

#include <functional>
#include <vector>

#include "eit/types.hpp"

namespace eit {

/// Conforming simplicial mesh in 2D (triangles) or 3D (tetrahedra).
///
/// Cells are stored positively oriented. Boundary facets are the facets
/// belonging to exactly one cell; each carries a small integer marker used to
/// declare boundary subsets.
struct SimplicialMesh {
  int dim = 0;                 // 2 or 3
  Matrix vertices;             // n_vertices x dim
  IntMatrix cells;             // n_cells x (dim + 1)
  IntMatrix boundary_facets;   // n_facets x dim
  IntVector facet_markers;     // n_facets

  Index num_vertices() const { return vertices.rows(); }
  Index num_cells() const { return cells.rows(); }
  Index num_boundary_facets() const { return boundary_facets.rows(); }
};

/// A subset of the boundary made of whole facets (e.g. the half-sphere
/// carrying the measured Cauchy data).
///
/// `vertex_weights` is full-length over mesh vertices: entry j holds the
/// boundary surface measure attached to vertex j, i.e. the row sum of the
/// boundary mass matrix restricted to the selected facets. It vanishes off
/// the subset and sums to the subset area.
struct BoundarySubset {
  std::vector<Index> facets;     // indices into mesh.boundary_facets
  std::vector<Index> vertices;   // vertex ids touched by the subset, sorted
  Vector vertex_weights;         // full length, zero off the subset
  double area = 0.0;
};

/// Orients cells positively, derives boundary facets when none are given and
/// checks the mesh invariants (positive volumes, facets shared by exactly one
/// cell, closed boundary surface). Throws MeshError on defects.
///
/// With `reorient = false` a cell with non-positive signed volume is a hard
/// error instead of being flipped; the built-in generator relies on this to
/// detect tangled cells.
void finalize_mesh(SimplicialMesh& mesh, bool reorient = true);

/// Structured simplicial mesh of the unit disk (dim 2) or unit ball (dim 3).
///
/// A uniform square/cube grid with 2*refinement intervals per axis is split
/// into simplices and mapped radially onto the disk/ball; boundary vertices
/// land exactly on the unit sphere. Vertex count is (2*refinement + 1)^dim.
SimplicialMesh generate_ball_mesh(int dim, int refinement);

double cell_volume(const SimplicialMesh& mesh, Index cell);
Vector cell_volumes(const SimplicialMesh& mesh);
double mesh_volume(const SimplicialMesh& mesh);
double mesh_diameter(const SimplicialMesh& mesh);

/// Area (3D) or length (2D) of one boundary facet.
double facet_area(const SimplicialMesh& mesh, Index facet);

/// Node volumes beta_j = sum_{cells owning j} |cell| / (dim + 1); equals the
/// L1 norm of the nodal hat function psi_j. Sums exactly to the mesh volume.
Vector node_volumes(const SimplicialMesh& mesh);

/// True at entries whose vertex lies on the boundary.
std::vector<bool> boundary_vertex_mask(const SimplicialMesh& mesh);

/// Selects whole boundary facets by a predicate on the facet centroid.
/// Throws MeshError when the selection is empty.
BoundarySubset mark_boundary_subset(
    const SimplicialMesh& mesh,
    const std::function<bool(const Eigen::Vector3d&)>& centroid_predicate);

/// Selects boundary facets whose marker belongs to `markers`.
BoundarySubset mark_boundary_subset(const SimplicialMesh& mesh,
                                    const std::vector<int>& markers);

/// Cell lookup with a uniform-grid spatial index. Points within
/// `snap_tolerance` of the mesh are clamped onto the nearest candidate cell,
/// so evaluation does not fail at curved-boundary mismatches.
class PointLocator {
 public:
  explicit PointLocator(const SimplicialMesh& mesh);

  struct Location {
    Index cell = -1;
    Vector barycentric;  // dim + 1 entries, clamped to the simplex
  };

  /// Throws MeshError when the point is farther than `snap_tolerance` from
  /// every cell. A negative tolerance selects the default
  /// 1e-8 * mesh diameter.
  Location locate(const Eigen::Vector3d& point, double snap_tolerance) const;

 private:
  const SimplicialMesh* mesh_;
  Eigen::Vector3d box_min_;
  Eigen::Vector3d box_max_;
  Eigen::Vector3i bins_;
  Eigen::Vector3d bin_size_;
  std::vector<std::vector<int>> cells_in_bin_;
  double default_snap_;

  void candidate_cells(const Eigen::Vector3d& point, double pad,
                       std::vector<int>& out) const;
};

/// Barycentric P1 interpolation of a nodal field at arbitrary points; exact
/// for globally affine fields. `snap_tolerance < 0` uses the locator default.
Vector interpolate_at_points(const SimplicialMesh& mesh, const NodalField& field,
                             const Matrix& points, double snap_tolerance = -1.0);

/// FNV-1a hash of a canonical text serialization; ties datasets to the mesh
/// they were simulated for.
std::uint64_t mesh_hash(const SimplicialMesh& mesh);

}  // namespace eit
