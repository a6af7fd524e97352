#include "eit/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

namespace eit {

namespace {

Eigen::Vector3d vertex_point(const SimplicialMesh& mesh, Index v) {
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  for (int a = 0; a < mesh.dim; ++a) p[a] = mesh.vertices(v, a);
  return p;
}

double signed_cell_volume(const SimplicialMesh& mesh, Index cell) {
  const int d = mesh.dim;
  Eigen::Matrix3d edges = Eigen::Matrix3d::Identity();
  for (int i = 0; i < d; ++i)
    for (int a = 0; a < d; ++a)
      edges(a, i) = mesh.vertices(mesh.cells(cell, i + 1), a) -
                    mesh.vertices(mesh.cells(cell, 0), a);
  const double det = edges.determinant();
  return d == 2 ? det / 2.0 : det / 6.0;
}

// Facet of `cell` opposite to local vertex `skip`, as a sorted key.
std::array<int, 3> facet_key(const SimplicialMesh& mesh, Index cell, int skip) {
  std::array<int, 3> key = {-1, -1, -1};
  int n = 0;
  for (int i = 0; i <= mesh.dim; ++i)
    if (i != skip) key[n++] = mesh.cells(cell, i);
  std::sort(key.begin(), key.begin() + n);
  return key;
}

void check_closed_boundary(const SimplicialMesh& mesh) {
  if (mesh.dim == 2) {
    // Each boundary vertex must be shared by exactly two boundary edges.
    std::map<int, int> touch;
    for (Index f = 0; f < mesh.num_boundary_facets(); ++f)
      for (int i = 0; i < 2; ++i) ++touch[mesh.boundary_facets(f, i)];
    for (const auto& [v, count] : touch)
      if (count != 2)
        throw MeshError("boundary is not closed at vertex " + std::to_string(v) +
                        " (shared by " + std::to_string(count) + " edges)");
  } else {
    // Each edge of a boundary triangle must be shared by exactly two of them.
    std::map<std::pair<int, int>, int> touch;
    for (Index f = 0; f < mesh.num_boundary_facets(); ++f) {
      for (int i = 0; i < 3; ++i) {
        int a = mesh.boundary_facets(f, i);
        int b = mesh.boundary_facets(f, (i + 1) % 3);
        if (a > b) std::swap(a, b);
        ++touch[{a, b}];
      }
    }
    for (const auto& [e, count] : touch)
      if (count != 2)
        throw MeshError("boundary is not closed at edge (" +
                        std::to_string(e.first) + "," + std::to_string(e.second) +
                        "), shared by " + std::to_string(count) + " facets");
  }
}

}  // namespace

void finalize_mesh(SimplicialMesh& mesh, bool reorient) {
  if (mesh.dim != 2 && mesh.dim != 3)
    throw MeshError("mesh dimension must be 2 or 3, got " + std::to_string(mesh.dim));
  if (mesh.num_cells() == 0) throw MeshError("mesh has no cells");
  if (mesh.cells.cols() != mesh.dim + 1 || mesh.vertices.cols() != mesh.dim)
    throw MeshError("inconsistent mesh array shapes");

  const Index nv = mesh.num_vertices();
  for (Index c = 0; c < mesh.num_cells(); ++c)
    for (int i = 0; i <= mesh.dim; ++i) {
      const int v = mesh.cells(c, i);
      if (v < 0 || v >= nv)
        throw MeshError("cell " + std::to_string(c) + " references unknown vertex " +
                        std::to_string(v));
    }

  for (Index c = 0; c < mesh.num_cells(); ++c) {
    double vol = signed_cell_volume(mesh, c);
    if (vol < 0 && reorient) {
      std::swap(mesh.cells(c, mesh.dim - 1), mesh.cells(c, mesh.dim));
      vol = -vol;
    }
    if (!(vol > 0))
      throw MeshError("cell " + std::to_string(c) + " has non-positive volume " +
                      std::to_string(vol));
  }

  // Count every cell facet; boundary facets are the ones seen exactly once.
  std::map<std::array<int, 3>, int> counts;
  for (Index c = 0; c < mesh.num_cells(); ++c)
    for (int i = 0; i <= mesh.dim; ++i) ++counts[facet_key(mesh, c, i)];
  for (const auto& [key, count] : counts)
    if (count > 2)
      throw MeshError("facet shared by " + std::to_string(count) + " cells");

  if (mesh.num_boundary_facets() == 0) {
    std::vector<std::array<int, 3>> boundary;
    for (const auto& [key, count] : counts)
      if (count == 1) boundary.push_back(key);
    mesh.boundary_facets.resize(static_cast<Index>(boundary.size()), mesh.dim);
    for (Index f = 0; f < mesh.num_boundary_facets(); ++f)
      for (int i = 0; i < mesh.dim; ++i)
        mesh.boundary_facets(f, i) = boundary[static_cast<size_t>(f)][i];
    mesh.facet_markers = IntVector::Ones(mesh.num_boundary_facets());
  } else {
    if (mesh.facet_markers.size() != mesh.num_boundary_facets())
      mesh.facet_markers = IntVector::Ones(mesh.num_boundary_facets());
    std::set<std::array<int, 3>> seen;
    for (Index f = 0; f < mesh.num_boundary_facets(); ++f) {
      std::array<int, 3> key = {-1, -1, -1};
      for (int i = 0; i < mesh.dim; ++i) {
        const int v = mesh.boundary_facets(f, i);
        if (v < 0 || v >= nv)
          throw MeshError("boundary facet " + std::to_string(f) +
                          " references unknown vertex " + std::to_string(v));
        key[static_cast<size_t>(i)] = v;
      }
      std::sort(key.begin(), key.begin() + mesh.dim);
      auto it = counts.find(key);
      if (it == counts.end() || it->second != 1)
        throw MeshError("boundary facet " + std::to_string(f) +
                        " does not belong to exactly one cell");
      if (!seen.insert(key).second)
        throw MeshError("duplicate boundary facet " + std::to_string(f));
    }
    size_t expected = 0;
    for (const auto& [key, count] : counts) expected += (count == 1);
    if (expected != static_cast<size_t>(mesh.num_boundary_facets()))
      throw MeshError("boundary facet list is incomplete: got " +
                      std::to_string(mesh.num_boundary_facets()) + ", mesh has " +
                      std::to_string(expected));
  }

  check_closed_boundary(mesh);
}

SimplicialMesh generate_ball_mesh(int dim, int refinement) {
  if (dim != 2 && dim != 3)
    throw MeshError("generate_ball_mesh: dim must be 2 or 3");
  if (refinement < 1)
    throw MeshError("generate_ball_mesh: refinement must be >= 1");

  const int n = 2 * refinement;  // grid intervals per axis over [-1, 1]
  const int m = n + 1;           // grid vertices per axis
  const double h = 1.0 / refinement;

  SimplicialMesh mesh;
  mesh.dim = dim;

  if (dim == 2) {
    mesh.vertices.resize(static_cast<Index>(m) * m, 2);
    auto id = [m](int i, int j) { return i * m + j; };
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        mesh.vertices(id(i, j), 0) = -1.0 + i * h;
        mesh.vertices(id(i, j), 1) = -1.0 + j * h;
      }
    mesh.cells.resize(static_cast<Index>(2) * n * n, 3);
    Index c = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        mesh.cells.row(c++) << id(i, j), id(i + 1, j), id(i + 1, j + 1);
        mesh.cells.row(c++) << id(i, j), id(i + 1, j + 1), id(i, j + 1);
      }
  } else {
    mesh.vertices.resize(static_cast<Index>(m) * m * m, 3);
    auto id = [m](int i, int j, int k) { return (i * m + j) * m + k; };
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k) {
          const Index v = id(i, j, k);
          mesh.vertices(v, 0) = -1.0 + i * h;
          mesh.vertices(v, 1) = -1.0 + j * h;
          mesh.vertices(v, 2) = -1.0 + k * h;
        }
    // Kuhn subdivision: six tetrahedra per cube, all sharing the main
    // diagonal; even permutations keep positive orientation, odd ones are
    // fixed by swapping the middle vertices.
    static const int perms[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1},
                                    {0, 2, 1}, {2, 1, 0}, {1, 0, 2}};
    static const bool odd[6] = {false, false, false, true, true, true};
    mesh.cells.resize(static_cast<Index>(6) * n * n * n, 4);
    Index c = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int p = 0; p < 6; ++p) {
            int corner[3] = {i, j, k};
            int v[4];
            v[0] = id(corner[0], corner[1], corner[2]);
            int step[3] = {i, j, k};
            for (int q = 0; q < 3; ++q) {
              ++step[perms[p][q]];
              v[q + 1] = id(step[0], step[1], step[2]);
            }
            if (odd[p]) std::swap(v[1], v[2]);
            mesh.cells.row(c++) << v[0], v[1], v[2], v[3];
          }
  }

  // Radial map of the cube onto the ball: scale by |p|_inf / |p|_2, which
  // sends the cube surface exactly onto the unit sphere.
  for (Index v = 0; v < mesh.num_vertices(); ++v) {
    double norm2 = 0.0, norminf = 0.0;
    for (int a = 0; a < dim; ++a) {
      const double x = mesh.vertices(v, a);
      norm2 += x * x;
      norminf = std::max(norminf, std::abs(x));
    }
    norm2 = std::sqrt(norm2);
    if (norm2 > 0.0) mesh.vertices.row(v) *= norminf / norm2;
  }

  finalize_mesh(mesh, /*reorient=*/false);
  return mesh;
}

double cell_volume(const SimplicialMesh& mesh, Index cell) {
  return signed_cell_volume(mesh, cell);
}

Vector cell_volumes(const SimplicialMesh& mesh) {
  Vector v(mesh.num_cells());
  for (Index c = 0; c < mesh.num_cells(); ++c) v[c] = signed_cell_volume(mesh, c);
  return v;
}

double mesh_volume(const SimplicialMesh& mesh) { return cell_volumes(mesh).sum(); }

double mesh_diameter(const SimplicialMesh& mesh) {
  Eigen::VectorXd lo = mesh.vertices.colwise().minCoeff();
  Eigen::VectorXd hi = mesh.vertices.colwise().maxCoeff();
  return (hi - lo).norm();
}

double facet_area(const SimplicialMesh& mesh, Index facet) {
  if (mesh.dim == 2) {
    const Index a = mesh.boundary_facets(facet, 0);
    const Index b = mesh.boundary_facets(facet, 1);
    return (mesh.vertices.row(a) - mesh.vertices.row(b)).norm();
  }
  const Eigen::Vector3d p0 = vertex_point(mesh, mesh.boundary_facets(facet, 0));
  const Eigen::Vector3d p1 = vertex_point(mesh, mesh.boundary_facets(facet, 1));
  const Eigen::Vector3d p2 = vertex_point(mesh, mesh.boundary_facets(facet, 2));
  return 0.5 * (p1 - p0).cross(p2 - p0).norm();
}

Vector node_volumes(const SimplicialMesh& mesh) {
  Vector beta = Vector::Zero(mesh.num_vertices());
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const double share = signed_cell_volume(mesh, c) / (mesh.dim + 1);
    for (int i = 0; i <= mesh.dim; ++i) beta[mesh.cells(c, i)] += share;
  }
  return beta;
}

std::vector<bool> boundary_vertex_mask(const SimplicialMesh& mesh) {
  std::vector<bool> mask(static_cast<size_t>(mesh.num_vertices()), false);
  for (Index f = 0; f < mesh.num_boundary_facets(); ++f)
    for (int i = 0; i < mesh.dim; ++i)
      mask[static_cast<size_t>(mesh.boundary_facets(f, i))] = true;
  return mask;
}

namespace {

BoundarySubset build_subset(const SimplicialMesh& mesh, std::vector<Index> facets) {
  if (facets.empty()) throw MeshError("boundary subset selection is empty");
  BoundarySubset subset;
  subset.facets = std::move(facets);
  subset.vertex_weights = Vector::Zero(mesh.num_vertices());
  std::set<Index> verts;
  for (const Index f : subset.facets) {
    const double area = facet_area(mesh, f);
    subset.area += area;
    // Row sum of the facet mass matrix: each vertex carries |facet| / dim.
    for (int i = 0; i < mesh.dim; ++i) {
      const Index v = mesh.boundary_facets(f, i);
      subset.vertex_weights[v] += area / mesh.dim;
      verts.insert(v);
    }
  }
  subset.vertices.assign(verts.begin(), verts.end());
  return subset;
}

}  // namespace

BoundarySubset mark_boundary_subset(
    const SimplicialMesh& mesh,
    const std::function<bool(const Eigen::Vector3d&)>& centroid_predicate) {
  std::vector<Index> selected;
  for (Index f = 0; f < mesh.num_boundary_facets(); ++f) {
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (int i = 0; i < mesh.dim; ++i)
      centroid += vertex_point(mesh, mesh.boundary_facets(f, i));
    centroid /= mesh.dim;
    if (centroid_predicate(centroid)) selected.push_back(f);
  }
  return build_subset(mesh, std::move(selected));
}

BoundarySubset mark_boundary_subset(const SimplicialMesh& mesh,
                                    const std::vector<int>& markers) {
  std::vector<Index> selected;
  for (Index f = 0; f < mesh.num_boundary_facets(); ++f)
    if (std::find(markers.begin(), markers.end(), mesh.facet_markers[f]) !=
        markers.end())
      selected.push_back(f);
  return build_subset(mesh, std::move(selected));
}

PointLocator::PointLocator(const SimplicialMesh& mesh) : mesh_(&mesh) {
  box_min_.setZero();
  box_max_.setZero();
  for (int a = 0; a < mesh.dim; ++a) {
    box_min_[a] = mesh.vertices.col(a).minCoeff();
    box_max_[a] = mesh.vertices.col(a).maxCoeff();
  }
  default_snap_ = 1e-8 * mesh_diameter(mesh);

  const int per_axis = std::clamp(
      static_cast<int>(std::round(std::pow(static_cast<double>(mesh.num_cells()),
                                           1.0 / mesh.dim))),
      2, 48);
  bins_ = Eigen::Vector3i::Ones();
  for (int a = 0; a < mesh.dim; ++a) bins_[a] = per_axis;
  for (int a = 0; a < 3; ++a) {
    const double extent = std::max(box_max_[a] - box_min_[a], 1e-300);
    bin_size_[a] = extent / bins_[a];
  }
  cells_in_bin_.resize(static_cast<size_t>(bins_[0]) * bins_[1] * bins_[2]);

  for (Index c = 0; c < mesh.num_cells(); ++c) {
    Eigen::Vector3d lo = Eigen::Vector3d::Zero(), hi = Eigen::Vector3d::Zero();
    for (int a = 0; a < mesh.dim; ++a) {
      lo[a] = hi[a] = mesh.vertices(mesh.cells(c, 0), a);
      for (int i = 1; i <= mesh.dim; ++i) {
        lo[a] = std::min(lo[a], mesh.vertices(mesh.cells(c, i), a));
        hi[a] = std::max(hi[a], mesh.vertices(mesh.cells(c, i), a));
      }
    }
    Eigen::Vector3i blo = Eigen::Vector3i::Zero(), bhi = Eigen::Vector3i::Zero();
    for (int a = 0; a < mesh.dim; ++a) {
      blo[a] = std::clamp(static_cast<int>((lo[a] - box_min_[a]) / bin_size_[a]), 0,
                          bins_[a] - 1);
      bhi[a] = std::clamp(static_cast<int>((hi[a] - box_min_[a]) / bin_size_[a]), 0,
                          bins_[a] - 1);
    }
    for (int i = blo[0]; i <= bhi[0]; ++i)
      for (int j = blo[1]; j <= bhi[1]; ++j)
        for (int k = blo[2]; k <= bhi[2]; ++k)
          cells_in_bin_[(static_cast<size_t>(i) * bins_[1] + j) * bins_[2] + k]
              .push_back(static_cast<int>(c));
  }
}

void PointLocator::candidate_cells(const Eigen::Vector3d& point, double pad,
                                   std::vector<int>& out) const {
  Eigen::Vector3i blo = Eigen::Vector3i::Zero(), bhi = Eigen::Vector3i::Zero();
  for (int a = 0; a < mesh_->dim; ++a) {
    blo[a] = std::clamp(
        static_cast<int>((point[a] - pad - box_min_[a]) / bin_size_[a]), 0,
        bins_[a] - 1);
    bhi[a] = std::clamp(
        static_cast<int>((point[a] + pad - box_min_[a]) / bin_size_[a]), 0,
        bins_[a] - 1);
  }
  for (int i = blo[0]; i <= bhi[0]; ++i)
    for (int j = blo[1]; j <= bhi[1]; ++j)
      for (int k = blo[2]; k <= bhi[2]; ++k) {
        const auto& bin =
            cells_in_bin_[(static_cast<size_t>(i) * bins_[1] + j) * bins_[2] + k];
        out.insert(out.end(), bin.begin(), bin.end());
      }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

PointLocator::Location PointLocator::locate(const Eigen::Vector3d& point,
                                            double snap_tolerance) const {
  const double snap = snap_tolerance < 0 ? default_snap_ : snap_tolerance;
  const SimplicialMesh& mesh = *mesh_;
  const int d = mesh.dim;

  std::vector<int> candidates;
  candidates.reserve(64);
  candidate_cells(point, snap + 1e-14, candidates);
  if (candidates.empty()) {
    // Point beyond all padded cell boxes; scan everything before giving up.
    candidates.resize(static_cast<size_t>(mesh.num_cells()));
    for (Index c = 0; c < mesh.num_cells(); ++c) candidates[static_cast<size_t>(c)] = static_cast<int>(c);
  }

  int best_cell = -1;
  double best_min = -std::numeric_limits<double>::infinity();
  Eigen::Vector4d best_bary = Eigen::Vector4d::Zero();
  for (const int c : candidates) {
    Eigen::Matrix3d edges = Eigen::Matrix3d::Identity();
    Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
    for (int a = 0; a < d; ++a) {
      rhs[a] = point[a] - mesh.vertices(mesh.cells(c, 0), a);
      for (int i = 0; i < d; ++i)
        edges(a, i) =
            mesh.vertices(mesh.cells(c, i + 1), a) - mesh.vertices(mesh.cells(c, 0), a);
    }
    const Eigen::Vector3d lambda = edges.partialPivLu().solve(rhs);
    Eigen::Vector4d bary = Eigen::Vector4d::Zero();
    double sum = 0.0;
    for (int i = 0; i < d; ++i) {
      bary[i + 1] = lambda[i];
      sum += lambda[i];
    }
    bary[0] = 1.0 - sum;
    const double min_coord = bary.head(d + 1).minCoeff();
    if (min_coord > best_min) {
      best_min = min_coord;
      best_cell = c;
      best_bary = bary;
    }
    if (best_min >= 0.0) break;
  }

  if (best_cell < 0) throw MeshError("point location failed: empty mesh");

  if (best_min < 0.0) {
    // Estimate the geometric distance via the smallest altitude of the cell.
    double max_facet = 0.0;
    const SimplicialMesh& m = mesh;
    for (int skip = 0; skip <= d; ++skip) {
      if (d == 2) {
        int a = -1, b = -1;
        for (int i = 0; i <= d; ++i) {
          if (i == skip) continue;
          (a < 0 ? a : b) = m.cells(best_cell, i);
        }
        max_facet = std::max(max_facet, (m.vertices.row(a) - m.vertices.row(b)).norm());
      } else {
        Eigen::Vector3d p[3];
        int n = 0;
        for (int i = 0; i <= d; ++i)
          if (i != skip) p[n++] = vertex_point(m, m.cells(best_cell, i));
        max_facet =
            std::max(max_facet, 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).norm());
      }
    }
    const double h_min = d * signed_cell_volume(mesh, best_cell) / max_facet;
    const double distance = -best_min * h_min;
    if (distance > snap) {
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "point (%g, %g, %g) lies outside the mesh (distance ~ %.3e, "
                    "snap tolerance %.3e)",
                    point[0], point[1], point[2], distance, snap);
      throw MeshError(buf);
    }
    for (int i = 0; i <= d; ++i) best_bary[i] = std::max(best_bary[i], 0.0);
    best_bary.head(d + 1) /= best_bary.head(d + 1).sum();
  }

  Location loc;
  loc.cell = best_cell;
  loc.barycentric = best_bary.head(d + 1);
  return loc;
}

Vector interpolate_at_points(const SimplicialMesh& mesh, const NodalField& field,
                             const Matrix& points, double snap_tolerance) {
  if (field.size() != mesh.num_vertices())
    throw MeshError("field size does not match vertex count");
  PointLocator locator(mesh);
  Vector values(points.rows());
  for (Index p = 0; p < points.rows(); ++p) {
    Eigen::Vector3d x = Eigen::Vector3d::Zero();
    for (int a = 0; a < mesh.dim && a < points.cols(); ++a) x[a] = points(p, a);
    const auto loc = locator.locate(x, snap_tolerance);
    double value = 0.0;
    for (int i = 0; i <= mesh.dim; ++i)
      value += loc.barycentric[i] * field[mesh.cells(loc.cell, i)];
    values[p] = value;
  }
  return values;
}

std::uint64_t mesh_hash(const SimplicialMesh& mesh) {
  std::uint64_t h = 1469598103934665603ull;
  auto feed = [&h](const char* data, size_t n) {
    for (size_t i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(data[i]);
      h *= 1099511628211ull;
    }
  };
  auto feed_str = [&](const std::string& s) { feed(s.data(), s.size()); };
  char buf[64];
  feed_str("dim " + std::to_string(mesh.dim));
  feed_str(" nv " + std::to_string(mesh.num_vertices()));
  feed_str(" nc " + std::to_string(mesh.num_cells()));
  for (Index v = 0; v < mesh.num_vertices(); ++v)
    for (int a = 0; a < mesh.dim; ++a) {
      const int n = std::snprintf(buf, sizeof(buf), " %.17g", mesh.vertices(v, a));
      feed(buf, static_cast<size_t>(n));
    }
  for (Index c = 0; c < mesh.num_cells(); ++c)
    for (int i = 0; i <= mesh.dim; ++i) {
      const int n = std::snprintf(buf, sizeof(buf), " %d", mesh.cells(c, i));
      feed(buf, static_cast<size_t>(n));
    }
  for (Index f = 0; f < mesh.num_boundary_facets(); ++f) {
    for (int i = 0; i < mesh.dim; ++i) {
      const int n = std::snprintf(buf, sizeof(buf), " %d", mesh.boundary_facets(f, i));
      feed(buf, static_cast<size_t>(n));
    }
    const int n = std::snprintf(buf, sizeof(buf), " m%d", mesh.facet_markers[f]);
    feed(buf, static_cast<size_t>(n));
  }
  return h;
}

}  // namespace eit
