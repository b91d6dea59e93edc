#include "iscat/mie_reference.hpp"

#include <cmath>

#include "iscat/special_functions.hpp"

namespace iscat {

Eigen::VectorXcd mie_circle_reference(double radius, const Vec2& center,
                                      const Scene& scene,
                                      const std::vector<Vec2>& points,
                                      int max_order) {
  if (radius <= 0.0) throw std::invalid_argument("mie_circle_reference: radius <= 0");
  const double ke = scene.kappa_e, ki = scene.kappa_i, beta = scene.beta;
  const double ze = ke * radius, zi = ki * radius;
  const cdouble phase = std::exp(iunit * ke * scene.incident_dir.dot(center));
  const double dir_angle = std::atan2(scene.incident_dir.y(), scene.incident_dir.x());

  // Scattering coefficients A_n of the partial-wave expansion
  //   u_sc = phase * sum_n i^n A_n H_n(ke rho) e^{i n alpha}.
  std::vector<cdouble> coef;
  coef.reserve(64);
  double rho_min = std::numeric_limits<double>::max();
  for (const auto& p : points) rho_min = std::min(rho_min, (p - center).norm());
  if (rho_min <= radius)
    throw std::invalid_argument("mie_circle_reference: point inside the circle");

  double scale = 0.0;
  int tail = 0;
  for (int n = 0; n <= max_order; ++n) {
    const double jn_e = bessel_jn(n, ze);
    const double djn_e = bessel_jn_deriv(n, ze);
    const double jn_i = bessel_jn(n, zi);
    const double djn_i = bessel_jn_deriv(n, zi);
    const cdouble hn_e = hankel1_n(n, ze);
    const cdouble dhn_e = hankel1_n_deriv(n, ze);

    const cdouble det = ke * jn_i * dhn_e - beta * ki * djn_i * hn_e;
    const cdouble an = (beta * ki * jn_e * djn_i - ke * jn_i * djn_e) / det;
    coef.push_back(an);

    const double tsize = std::abs(an) * std::abs(hankel1_n(n, ke * rho_min));
    scale = std::max(scale, tsize);
    if (n > ze + 8 && tsize < 1e-14 * std::max(scale, 1e-300)) {
      if (++tail >= 3) break;
    } else {
      tail = 0;
    }
    if (n == max_order)
      throw std::runtime_error("mie_circle_reference: series did not converge");
  }

  Eigen::VectorXcd u(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    const Vec2 rel = points[p] - center;
    const double rho = rel.norm();
    const double alpha = std::atan2(rel.y(), rel.x()) - dir_angle;
    cdouble usc = coef[0] * hankel1_n(0, ke * rho);
    cdouble ipow = iunit;
    for (std::size_t n = 1; n < coef.size(); ++n) {
      usc += 2.0 * ipow * coef[n] * hankel1_n(static_cast<int>(n), ke * rho) *
             std::cos(static_cast<double>(n) * alpha);
      ipow *= iunit;
    }
    u[p] = scene.u_inc(points[p]) + phase * usc;
  }
  return u;
}

}  // namespace iscat
