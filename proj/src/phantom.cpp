#include "eit/phantom.hpp"

#include <cmath>
#include <string>

namespace eit {

PhantomSpec default_phantom() {
  const double a = 5.0 * M_PI / 12.0;
  PhantomSpec spec;
  spec.background = 1.0;

  Inclusion ball;
  ball.shape = Inclusion::Shape::Ball;
  ball.center = Eigen::Vector3d(-0.09, -0.55, 0.0);
  ball.semi_axes = Eigen::Vector3d::Constant(0.35);
  ball.value = 2.0;
  spec.inclusions.push_back(ball);

  Inclusion left;
  left.shape = Inclusion::Shape::Ellipsoid;
  left.center = Eigen::Vector3d(-0.55 * std::sin(a), 0.55 * std::cos(a), 0.0);
  left.semi_axes = Eigen::Vector3d(0.6, 0.3, 0.3);
  left.rotation = a;
  left.value = 0.5;
  spec.inclusions.push_back(left);

  Inclusion right;
  right.shape = Inclusion::Shape::Ellipsoid;
  right.center = Eigen::Vector3d(0.45 * std::sin(a), 0.45 * std::cos(a), 0.0);
  right.semi_axes = Eigen::Vector3d(0.7, 0.35, 0.35);
  right.rotation = -a;
  right.value = 0.5;
  spec.inclusions.push_back(right);

  return spec;
}

bool inside_inclusion(const Inclusion& inclusion, const Eigen::Vector3d& point,
                      int dim, double dilation) {
  Eigen::Vector3d q = point - inclusion.center;
  if (dim == 2) q.z() = 0.0;

  // undo the rotation about the z-parallel axis through the center
  const double c = std::cos(inclusion.rotation), s = std::sin(inclusion.rotation);
  const double qx = c * q.x() + s * q.y();
  const double qy = -s * q.x() + c * q.y();
  q.x() = qx;
  q.y() = qy;

  double level = 0.0;
  for (int a = 0; a < dim; ++a) {
    const double semi = inclusion.semi_axes[a] * dilation;
    level += (q[a] / semi) * (q[a] / semi);
  }
  return level <= 1.0;
}

namespace {

void check_inside_domain(const PhantomSpec& spec, int dim) {
  // Sample the inclusion surfaces; the phantom must stay in the unit ball.
  for (size_t i = 0; i < spec.inclusions.size(); ++i) {
    const Inclusion& inc = spec.inclusions[i];
    const double c = std::cos(inc.rotation), s = std::sin(inc.rotation);
    const int nu = 64, nv = dim == 3 ? 32 : 1;
    for (int a = 0; a < nu; ++a)
      for (int b = 0; b < nv; ++b) {
        const double phi = 2.0 * M_PI * a / nu;
        const double theta = dim == 3 ? M_PI * (b + 0.5) / nv : M_PI / 2.0;
        Eigen::Vector3d u(std::sin(theta) * std::cos(phi),
                          std::sin(theta) * std::sin(phi), std::cos(theta));
        if (dim == 2) u.z() = 0.0;
        Eigen::Vector3d q = inc.semi_axes.cwiseProduct(u);
        const Eigen::Vector3d rotated(c * q.x() - s * q.y(), s * q.x() + c * q.y(),
                                      q.z());
        Eigen::Vector3d x = inc.center + rotated;
        if (dim == 2) x.z() = 0.0;
        if (x.norm() > 1.0 + 1e-9)
          throw ConfigError("phantom inclusion " + std::to_string(i + 1) +
                            " is not contained in the unit ball");
      }
    if (inc.value <= 0.0 || spec.background <= 0.0)
      throw ConfigError("phantom values must be positive");
  }
}

}  // namespace

PhantomField build_phantom(const PhantomSpec& spec, const SimplicialMesh& mesh) {
  check_inside_domain(spec, mesh.dim);

  PhantomField field;
  field.sigma = NodalField::Constant(mesh.num_vertices(), spec.background);
  field.masks.assign(spec.inclusions.size(),
                     std::vector<bool>(static_cast<size_t>(mesh.num_vertices()), false));

  for (Index v = 0; v < mesh.num_vertices(); ++v) {
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    for (int a = 0; a < mesh.dim; ++a) p[a] = mesh.vertices(v, a);

    int owner = -1;
    for (size_t i = 0; i < spec.inclusions.size(); ++i) {
      if (!inside_inclusion(spec.inclusions[i], p, mesh.dim)) continue;
      field.masks[i][static_cast<size_t>(v)] = true;
      if (owner < 0) {
        owner = static_cast<int>(i);
        field.sigma[v] = spec.inclusions[i].value;
      } else if (!spec.allow_overlap) {
        throw ConfigError("phantom inclusions " + std::to_string(owner + 1) + " and " +
                          std::to_string(i + 1) + " overlap at vertex " +
                          std::to_string(v));
      }
    }
  }
  return field;
}

double phantom_value(const PhantomSpec& spec, const Eigen::Vector3d& point, int dim) {
  for (const Inclusion& inc : spec.inclusions)
    if (inside_inclusion(inc, point, dim)) return inc.value;
  return spec.background;
}

NodalField prior_field(const PhantomSpec& spec, const SimplicialMesh& mesh,
                       double dilation, double mu_in) {
  if (dilation < 1.0)
    throw ConfigError("prior dilation must be >= 1 (got " + std::to_string(dilation) + ")");
  if (!(mu_in > 0.0) || mu_in > 1.0)
    throw ConfigError("prior mu_in must lie in (0, 1]");

  NodalField mu = NodalField::Ones(mesh.num_vertices());
  for (Index v = 0; v < mesh.num_vertices(); ++v) {
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    for (int a = 0; a < mesh.dim; ++a) p[a] = mesh.vertices(v, a);
    for (const Inclusion& inc : spec.inclusions)
      if (inside_inclusion(inc, p, mesh.dim, dilation)) {
        mu[v] = mu_in;
        break;
      }
  }
  return mu;
}

}  // namespace eit
