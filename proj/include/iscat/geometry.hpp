#pragma once

#include <optional>
#include <vector>

#include "iscat/types.hpp"

namespace iscat {

/// One star-shaped component: center plus truncated Fourier expansion of the
/// radius,
///   q(t) = c + r(t) (cos 2*pi*t, sin 2*pi*t),
///   r(t) = a_0 + 2 sum_m a_m cos(2*pi*m*t) + 2 sum_m b_m sin(2*pi*m*t),
/// with t in [0, 1).
struct ComponentParams {
  double cx = 0.0;
  double cy = 0.0;
  Eigen::VectorXd cos_coef;  // a_0 .. a_M
  Eigen::VectorXd sin_coef;  // b_1 .. b_M

  ComponentParams() = default;
  ComponentParams(double cx_, double cy_, Eigen::VectorXd a, Eigen::VectorXd b);
  /// Circle of radius a0 centered at (cx, cy) with M zeroed modes.
  static ComponentParams circle(double cx, double cy, double a0, int modes);

  int modes() const { return static_cast<int>(sin_coef.size()); }
  int dim() const { return 2 * modes() + 3; }

  double radius(double t) const;
  double radius_deriv(double t) const;   // dr/dt
  double radius_deriv2(double t) const;  // d2r/dt2
  Vec2 point(double t) const;
  Vec2 point_deriv(double t) const;   // dq/dt
  Vec2 point_deriv2(double t) const;  // d2q/dt2
};

/// Full parameter set: L components plus (optionally) the interior wavenumber.
struct ShapeParams {
  std::vector<ComponentParams> components;
  std::optional<double> kappa_i;

  int count() const { return static_cast<int>(components.size()); }
  int modes() const { return components.empty() ? 0 : components.front().modes(); }
  int dim() const;
};

/// Parameterization-independent descriptors of a closed curve.
struct ShapeStats {
  double area = 0.0;
  Vec2 center_of_mass = Vec2::Zero();
  double deviation = 0.0;  // arc-length integral of |r - r_avg|
  double r_avg = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
  double dir_min = 0.0;  // direction of minimal radius, in [0, pi)
  double dir_max = 0.0;  // direction of maximal radius, in [0, pi)
};

inline int component_dim(int modes) { return 2 * modes + 3; }
int param_dim(int count, int modes, bool has_kappa);

/// Boundary points q(t) for each t in t_grid. Negative radii are evaluated
/// as-is; admissibility is a separate check.
std::vector<Vec2> eval_boundary(const ComponentParams& comp,
                                const std::vector<double>& t_grid);

/// True iff every radius stays positive on the check grid and no pair of
/// component boundaries intersects or nests. When kappa_i is present it must
/// be positive as well.
bool is_admissible(const ShapeParams& params, int n_check = 256);

/// Area, center of mass, deviation from circularity and extremal radii of a
/// single admissible component; integrals use the trapezoid rule on n_quad
/// uniform nodes. Throws InadmissibleError for degenerate components.
ShapeStats shape_stats(const ComponentParams& comp, int n_quad = 256);

/// Flatten in the order (c_x, c_y, a_0, a_1..a_M, b_1..b_M) per component,
/// components first, kappa_i appended last when present.
Eigen::VectorXd pack(const ShapeParams& params);
ShapeParams unpack(const Eigen::VectorXd& v, int count, int modes, bool has_kappa);

/// Even-odd test against the polygon obtained by sampling the boundary.
bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& polygon);

}  // namespace iscat
