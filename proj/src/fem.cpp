#include "eit/fem.hpp"

#include <cmath>
#include <cstdio>

namespace eit {

namespace {

// Rows of G are the constant gradients of the barycentric basis on the cell.
template <int D>
void cell_gradients(const SimplicialMesh& mesh, Index cell,
                    Eigen::Matrix<double, D + 1, D>& grads, double& volume) {
  Eigen::Matrix<double, D, D> edges;
  for (int i = 0; i < D; ++i)
    for (int a = 0; a < D; ++a)
      edges(a, i) = mesh.vertices(mesh.cells(cell, i + 1), a) -
                    mesh.vertices(mesh.cells(cell, 0), a);
  const double det = edges.determinant();
  volume = det / (D == 2 ? 2.0 : 6.0);
  if (!(volume > 0))
    throw MeshError("cell " + std::to_string(cell) + " has non-positive volume");
  const Eigen::Matrix<double, D, D> inv_t = edges.inverse().transpose();
  for (int i = 0; i < D; ++i) grads.row(i + 1) = inv_t.col(i).transpose();
  grads.row(0) = -grads.bottomRows(D).colwise().sum();
}

template <int D>
void add_stiffness_triplets(const SimplicialMesh& mesh, const NodalField& gamma,
                            std::vector<Triplet>& triplets) {
  Eigen::Matrix<double, D + 1, D> grads;
  double volume;
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    cell_gradients<D>(mesh, c, grads, volume);
    double coeff = 0.0;
    for (int i = 0; i <= D; ++i) coeff += gamma[mesh.cells(c, i)];
    coeff /= D + 1;
    const Eigen::Matrix<double, D + 1, D + 1> local =
        coeff * volume * (grads * grads.transpose());
    for (int i = 0; i <= D; ++i)
      for (int j = 0; j <= D; ++j)
        triplets.emplace_back(mesh.cells(c, i), mesh.cells(c, j), local(i, j));
  }
}

}  // namespace

SparseMatrix assemble_stiffness(const SimplicialMesh& mesh, const NodalField& gamma) {
  if (gamma.size() != mesh.num_vertices())
    throw MeshError("gamma size does not match vertex count");
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<size_t>(mesh.num_cells()) * (mesh.dim + 1) * (mesh.dim + 1));
  if (mesh.dim == 2)
    add_stiffness_triplets<2>(mesh, gamma, triplets);
  else
    add_stiffness_triplets<3>(mesh, gamma, triplets);
  SparseMatrix K(mesh.num_vertices(), mesh.num_vertices());
  K.setFromTriplets(triplets.begin(), triplets.end());
  return K;
}

SparseMatrix assemble_mass(const SimplicialMesh& mesh) {
  // Exact P1 simplex rule: integral of l_i l_j = |cell| (1 + delta_ij) / ((d+1)(d+2)).
  const int d = mesh.dim;
  const double scale = 1.0 / ((d + 1) * (d + 2));
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<size_t>(mesh.num_cells()) * (d + 1) * (d + 1));
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const double v = cell_volume(mesh, c) * scale;
    for (int i = 0; i <= d; ++i)
      for (int j = 0; j <= d; ++j)
        triplets.emplace_back(mesh.cells(c, i), mesh.cells(c, j), v * (i == j ? 2.0 : 1.0));
  }
  SparseMatrix M(mesh.num_vertices(), mesh.num_vertices());
  M.setFromTriplets(triplets.begin(), triplets.end());
  return M;
}

SparseMatrix assemble_boundary_mass(const SimplicialMesh& mesh,
                                    const BoundarySubset& subset) {
  // Facets are (d-1)-simplices; same exact rule one dimension down.
  const int d = mesh.dim;
  const double scale = 1.0 / (d * (d + 1));
  std::vector<Triplet> triplets;
  triplets.reserve(subset.facets.size() * static_cast<size_t>(d) * d);
  for (const Index f : subset.facets) {
    const double a = facet_area(mesh, f) * scale;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        triplets.emplace_back(mesh.boundary_facets(f, i), mesh.boundary_facets(f, j),
                              a * (i == j ? 2.0 : 1.0));
  }
  SparseMatrix B(mesh.num_vertices(), mesh.num_vertices());
  B.setFromTriplets(triplets.begin(), triplets.end());
  return B;
}

PcgResult pcg_solve(const SparseMatrix& A, const Vector& rhs, Vector& x,
                    const PcgOptions& options, bool remove_mean) {
  const Index n = A.rows();
  const int max_iter =
      options.max_iterations > 0 ? options.max_iterations : static_cast<int>(10 * n);

  Vector inv_diag(n);
  for (Index i = 0; i < n; ++i) {
    const double d = A.coeff(i, i);
    inv_diag[i] = d > 0 ? 1.0 / d : 1.0;
  }

  Vector b = rhs;
  if (remove_mean) b.array() -= b.mean();
  const double b_norm = b.norm();
  PcgResult result;
  if (b_norm == 0.0) {
    x = Vector::Zero(n);
    result.converged = true;
    return result;
  }

  if (x.size() != n) x = Vector::Zero(n);
  Vector r = b - A * x;
  Vector z = inv_diag.asDiagonal() * r;
  if (remove_mean) z.array() -= z.mean();
  Vector p = z;
  Vector Ap(n);
  double rz = r.dot(z);

  // Iterate below half the target so the recomputed true residual meets it.
  const double target = 0.5 * options.tolerance * b_norm;
  for (int it = 0; it < max_iter; ++it) {
    Ap.noalias() = A * p;
    const double pAp = p.dot(Ap);
    if (!(pAp > 0)) break;  // matrix not positive on the current subspace
    const double alpha = rz / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    result.iterations = it + 1;
    if (r.norm() <= target) break;
    z = inv_diag.asDiagonal() * r;
    if (remove_mean) z.array() -= z.mean();
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }

  result.relative_residual = (b - A * x).norm() / b_norm;
  result.converged = result.relative_residual <= options.tolerance;
  return result;
}

NeumannSystem make_neumann_system(const SimplicialMesh& mesh, const NodalField& gamma,
                                  const PcgOptions& options) {
  NeumannSystem system;
  system.mesh = &mesh;
  system.stiffness = assemble_stiffness(mesh, gamma);
  BoundarySubset whole = mark_boundary_subset(mesh, [](const Eigen::Vector3d&) { return true; });
  system.boundary_mass = assemble_boundary_mass(mesh, whole);
  system.boundary_weights = whole.vertex_weights;
  system.options = options;
  return system;
}

NodalField solve_neumann(const NeumannSystem& system, const Vector& g,
                         const BoundarySubset& ground) {
  const Index n = system.stiffness.rows();
  if (g.size() != n) throw SolverError("pattern size does not match system");

  const double g_norm = std::sqrt(std::max(g.dot(system.boundary_mass * g), 0.0));
  const double mean_defect = std::abs(system.boundary_weights.dot(g));
  if (mean_defect > system.compat_tolerance * std::max(g_norm, 1e-300) && g_norm > 0.0) {
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "Neumann data is not compatible: |<g>_ds| = %.3e exceeds %.3e",
                  mean_defect, system.compat_tolerance * g_norm);
    throw SolverError(buf);
  }

  return solve_neumann_load(system, system.boundary_mass * g, ground);
}

NodalField solve_neumann_load(const NeumannSystem& system, const Vector& load,
                              const BoundarySubset& ground) {
  const Index n = system.stiffness.rows();
  if (load.size() != n) throw SolverError("load size does not match system");

  const double load_norm = load.norm();
  const double sum_defect = std::abs(load.sum());
  if (sum_defect > system.compat_tolerance * std::max(load_norm, 1e-300) &&
      load_norm > 0.0) {
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "Neumann load is not compatible: |sum| = %.3e exceeds %.3e",
                  sum_defect, system.compat_tolerance * load_norm);
    throw SolverError(buf);
  }

  Vector u = Vector::Zero(n);
  const PcgResult res = pcg_solve(system.stiffness, load, u, system.options,
                                  /*remove_mean=*/true);
  if (!res.converged) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "Neumann solve did not converge in %d iterations "
                  "(relative residual %.3e, tolerance %.3e)",
                  res.iterations, res.relative_residual, system.options.tolerance);
    throw SolverError(buf);
  }

  // Fix the additive constant: ds-weighted mean over the grounding subset.
  const double mean = ground.vertex_weights.dot(u) / ground.area;
  u.array() -= mean;
  return u;
}

H1Matrices assemble_h1_matrices(const SimplicialMesh& mesh) {
  H1Matrices h1;
  h1.stiffness_one = assemble_stiffness(mesh, Vector::Ones(mesh.num_vertices()));
  h1.mass = assemble_mass(mesh);
  h1.h1 = h1.stiffness_one + h1.mass;
  return h1;
}

RieszSolver::RieszSolver(const SimplicialMesh& mesh, const H1Matrices& h1,
                         const PcgOptions& options)
    : n_total_(mesh.num_vertices()), options_(options) {
  const auto on_boundary = boundary_vertex_mask(mesh);
  std::vector<Index> to_interior(static_cast<size_t>(n_total_), -1);
  for (Index v = 0; v < n_total_; ++v)
    if (!on_boundary[static_cast<size_t>(v)]) {
      to_interior[static_cast<size_t>(v)] = static_cast<Index>(interior_.size());
      interior_.push_back(v);
    }

  std::vector<Triplet> triplets;
  for (int col = 0; col < h1.h1.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(h1.h1, col); it; ++it) {
      const Index i = to_interior[static_cast<size_t>(it.row())];
      const Index j = to_interior[static_cast<size_t>(it.col())];
      if (i >= 0 && j >= 0) triplets.emplace_back(i, j, it.value());
    }
  interior_matrix_.resize(static_cast<Index>(interior_.size()),
                          static_cast<Index>(interior_.size()));
  interior_matrix_.setFromTriplets(triplets.begin(), triplets.end());
}

NodalField RieszSolver::solve(const Vector& load) const {
  if (load.size() != n_total_) throw SolverError("load size mismatch in Riesz solve");
  Vector rhs(static_cast<Index>(interior_.size()));
  for (size_t i = 0; i < interior_.size(); ++i) rhs[static_cast<Index>(i)] = load[interior_[i]];

  Vector v_int = Vector::Zero(rhs.size());
  const PcgResult res = pcg_solve(interior_matrix_, rhs, v_int, options_);
  if (!res.converged)
    throw SolverError("Riesz solve did not converge (relative residual " +
                      std::to_string(res.relative_residual) + ")");

  Vector v = Vector::Zero(n_total_);
  for (size_t i = 0; i < interior_.size(); ++i) v[interior_[i]] = v_int[static_cast<Index>(i)];
  return v;
}

}  // namespace eit
