#pragma once

#include <vector>

#include "iscat/scene.hpp"
#include "iscat/types.hpp"

namespace iscat {

/// Separation-of-variables reference for a single penetrable circle: the
/// partial-wave series matched through the transmission conditions. Returns
/// the total field at exterior points. The series is truncated once terms
/// fall below 1e-14 of the running sum; failure to converge within the order
/// cap is reported.
Eigen::VectorXcd mie_circle_reference(double radius, const Vec2& center,
                                      const Scene& scene,
                                      const std::vector<Vec2>& points,
                                      int max_order = 200);

}  // namespace iscat
