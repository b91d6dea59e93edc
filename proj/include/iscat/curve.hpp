#pragma once

#include <functional>
#include <vector>

#include "iscat/geometry.hpp"
#include "iscat/types.hpp"

namespace iscat {

/// Closed smooth curve sampled at n uniform nodes of the 2*pi-periodic
/// parameterization, with derivatives and outward normals. Orientation is
/// counterclockwise.
struct DiscretizedCurve {
  Eigen::VectorXd t;       // nodes in [0, 2*pi)
  Eigen::Matrix2Xd q;      // positions
  Eigen::Matrix2Xd dq;     // dq/dt
  Eigen::Matrix2Xd d2q;    // d2q/dt2
  Eigen::VectorXd speed;   // |dq/dt|
  Eigen::Matrix2Xd normal; // unit outward

  int size() const { return static_cast<int>(t.size()); }
  double perimeter() const { return speed.sum() * 2.0 * pi / size(); }

  std::vector<Vec2> polygon() const;
  bool contains(const Vec2& p) const;
  double distance_to_nodes(const Vec2& p) const;
};

/// Curve from a Fourier-parameterized component (analytic derivatives).
DiscretizedCurve discretize(const ComponentParams& comp, int n);

/// Curve from an arbitrary smooth parameterization q(t), t in [0, 1);
/// derivatives are computed spectrally from the samples.
DiscretizedCurve discretize_parametric(const std::function<Vec2(double)>& curve, int n);

/// Axis-aligned ellipse boundary (exact parameterization, not a Fourier fit).
DiscretizedCurve discretize_ellipse(const Vec2& center, double semi_x, double semi_y, int n);

std::vector<DiscretizedCurve> discretize_all(const ShapeParams& params, int n);

/// Differentiation matrix for 2*pi-periodic trigonometric interpolation on n
/// uniform nodes (n even).
const Eigen::MatrixXd& spectral_diff_matrix(int n);

}  // namespace iscat
