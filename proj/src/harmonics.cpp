#include "eit/harmonics.hpp"

#include <cmath>

namespace eit {

double associated_legendre(int n, int m, double x) {
  if (m < 0 || m > n) throw std::invalid_argument("associated_legendre: need 0 <= m <= n");

  // P_m^m = (-1)^m (2m-1)!! (1-x^2)^{m/2}, then upward in the degree:
  // (n-m) P_n^m = x (2n-1) P_{n-1}^m - (n+m-1) P_{n-2}^m.
  double pmm = 1.0;
  if (m > 0) {
    const double s = std::sqrt(std::max(0.0, (1.0 - x) * (1.0 + x)));
    double fact = 1.0;
    for (int i = 0; i < m; ++i) {
      pmm *= -fact * s;
      fact += 2.0;
    }
  }
  if (n == m) return pmm;

  double p_prev = pmm;
  double p_curr = x * (2.0 * m + 1.0) * pmm;
  for (int k = m + 2; k <= n; ++k) {
    const double p_next =
        (x * (2.0 * k - 1.0) * p_curr - (k + m - 1.0) * p_prev) / (k - m);
    p_prev = p_curr;
    p_curr = p_next;
  }
  return p_curr;
}

double real_spherical_harmonic(int n, int m, const Eigen::Vector3d& point) {
  if (std::abs(m) > n)
    throw std::invalid_argument("real_spherical_harmonic: need |m| <= n");

  const double r = point.norm();
  if (!(r > 0)) throw std::invalid_argument("real_spherical_harmonic: zero point");
  const double cos_theta = point.z() / r;
  const double phi = std::atan2(point.y(), point.x());

  const int am = std::abs(m);
  double log_ratio = 0.0;  // log((n-|m|)! / (n+|m|)!)
  for (int k = n - am + 1; k <= n + am; ++k) log_ratio -= std::log(static_cast<double>(k));
  const double norm =
      std::sqrt((2.0 * n + 1.0) / (4.0 * M_PI) * std::exp(log_ratio));
  const double base = norm * associated_legendre(n, am, cos_theta);

  if (m == 0) return base;
  const double sign = (am % 2 == 0) ? 1.0 : -1.0;  // from the real combination
  if (m > 0) return sign * std::sqrt(2.0) * base * std::cos(am * phi);
  return sign * std::sqrt(2.0) * base * std::sin(am * phi);
}

}  // namespace eit
