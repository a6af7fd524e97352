#pragma once

#include "eit/types.hpp"

namespace eit {

/// Associated Legendre P_n^m(x) with the Condon-Shortley phase, by upward
/// recurrence in the degree. Requires 0 <= m <= n and |x| <= 1.
double associated_legendre(int n, int m, double x);

/// Real orthonormal spherical harmonic of degree n and order m (|m| <= n),
/// built from the complex-harmonic pairs so that the family is orthonormal
/// in L2 of the unit sphere. `point` is normalized internally.
double real_spherical_harmonic(int n, int m, const Eigen::Vector3d& point);

}  // namespace eit
