#pragma once

#include <vector>

#include "eit/mesh.hpp"
#include "eit/types.hpp"

namespace eit {

/// One conductivity inclusion: a ball or an ellipsoid with semi-axes
/// `semi_axes`, rotated by `rotation` about the axis parallel to Z through
/// its center (counterclockwise seen from +z). In 2D only the first two
/// coordinates are used and the rotation acts in the plane.
struct Inclusion {
  enum class Shape { Ball, Ellipsoid };
  Shape shape = Shape::Ball;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d semi_axes = Eigen::Vector3d::Ones();
  double rotation = 0.0;
  double value = 1.0;
};

struct PhantomSpec {
  double background = 1.0;
  std::vector<Inclusion> inclusions;
  bool allow_overlap = false;
};

/// The three-inclusion phantom used throughout the experiments: a small ball
/// of value 2 near the lower boundary and two rotated ellipsoids of value
/// 0.5. In 2D the same geometry is cut at z = 0.
PhantomSpec default_phantom();

struct PhantomField {
  NodalField sigma;
  // one membership mask per inclusion, in spec order
  std::vector<std::vector<bool>> masks;
};

/// Evaluates the phantom at the mesh vertices. A vertex inside several
/// inclusions is an error unless spec.allow_overlap is set, in which case the
/// first-listed inclusion wins.
PhantomField build_phantom(const PhantomSpec& spec, const SimplicialMesh& mesh);

/// True when `point` lies inside the inclusion scaled by `dilation` about its
/// own center.
bool inside_inclusion(const Inclusion& inclusion, const Eigen::Vector3d& point,
                      int dim, double dilation = 1.0);

/// Conductivity of the phantom at one point (first-listed inclusion wins).
double phantom_value(const PhantomSpec& spec, const Eigen::Vector3d& point, int dim);

/// Spatial penalty weights: mu_in on the inclusions dilated by `dilation`
/// (> = 1), 1 elsewhere.
NodalField prior_field(const PhantomSpec& spec, const SimplicialMesh& mesh,
                       double dilation, double mu_in);

}  // namespace eit
