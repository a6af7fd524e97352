#pragma once

#include <vector>

#include "eit/mesh.hpp"
#include "eit/types.hpp"

namespace eit {

/// Stiffness matrix K(gamma)_ij = sum_cells mean(gamma|cell) grad(psi_i).grad(psi_j) |cell|.
/// Row sums vanish, so constants span the kernel of the pure-Neumann operator.
SparseMatrix assemble_stiffness(const SimplicialMesh& mesh, const NodalField& gamma);

/// Mass matrix by exact simplex quadrature, M_ij = integral of psi_i psi_j.
SparseMatrix assemble_mass(const SimplicialMesh& mesh);

/// Boundary mass over the facets of `subset`: B_ij = integral over Gamma of
/// psi_i psi_j ds. Full-sized with nonzeros only on subset vertices.
SparseMatrix assemble_boundary_mass(const SimplicialMesh& mesh,
                                    const BoundarySubset& subset);

struct PcgOptions {
  double tolerance = 1e-10;  // relative residual
  int max_iterations = 0;    // 0: 10 * n
};

struct PcgResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Jacobi-preconditioned conjugate gradients. When `remove_mean` is set the
/// preconditioned residual is projected onto the zero-mean complement each
/// iteration, which keeps the singular pure-Neumann system in the subspace
/// where it is definite.
PcgResult pcg_solve(const SparseMatrix& A, const Vector& rhs, Vector& x,
                    const PcgOptions& options, bool remove_mean = false);

/// Weighted Neumann problem for one conductivity: K(gamma) u = b(g) with the
/// additive constant fixed by a ds-weighted zero mean over a grounding subset.
struct NeumannSystem {
  const SimplicialMesh* mesh = nullptr;
  SparseMatrix stiffness;        // K(gamma)
  SparseMatrix boundary_mass;    // full-boundary B
  Vector boundary_weights;       // m = B 1, discrete ds measure per vertex
  PcgOptions options;
  double compat_tolerance = 1e-10;
};

NeumannSystem make_neumann_system(const SimplicialMesh& mesh, const NodalField& gamma,
                                  const PcgOptions& options = {});

/// Solves K(gamma) u = B g for a nodal Neumann pattern g (mean-zero in the
/// ds-weighted sense) and grounds u so its ds-weighted mean over
/// `ground.vertex_weights` vanishes. Throws SolverError on incompatible data
/// or non-convergence.
NodalField solve_neumann(const NeumannSystem& system, const Vector& g,
                         const BoundarySubset& ground);

/// Same solve for an already assembled right-hand side (e.g. the adjoint
/// load B_Gamma r, whose boundary mass lives on a subset only). The load
/// must sum to zero up to the compatibility tolerance.
NodalField solve_neumann_load(const NeumannSystem& system, const Vector& load,
                              const BoundarySubset& ground);

/// H1 building blocks shared by the Riesz solve, the step-size control and
/// the weak-monotonicity test.
struct H1Matrices {
  SparseMatrix stiffness_one;  // K with gamma = 1
  SparseMatrix mass;           // M
  SparseMatrix h1;             // K + M
};

H1Matrices assemble_h1_matrices(const SimplicialMesh& mesh);

inline double h1_dot(const H1Matrices& h1, const Vector& u, const Vector& v) {
  return u.dot(h1.h1 * v);
}

/// Riesz representative solver for (-Laplace + 1) v = load with v = 0 on the
/// boundary: the interior block of (K + M) is inverted by PCG and boundary
/// values are pinned to zero.
class RieszSolver {
 public:
  RieszSolver(const SimplicialMesh& mesh, const H1Matrices& h1,
              const PcgOptions& options = {});

  /// `load` holds the discrete functional values on all vertices; entries on
  /// boundary vertices are ignored. The result vanishes identically on the
  /// boundary.
  NodalField solve(const Vector& load) const;

 private:
  SparseMatrix interior_matrix_;
  std::vector<Index> interior_;
  Index n_total_;
  PcgOptions options_;
};

}  // namespace eit
