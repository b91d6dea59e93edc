#pragma once

#include <cstdint>
#include <vector>

#include "iscat/geometry.hpp"
#include "iscat/types.hpp"

namespace iscat {

/// Posterior samples in packed parameter form, one column per sample, with
/// per-sample log-density and admissibility. Inadmissible draws stay in the
/// set but are excluded from all derived statistics.
struct SampleSet {
  Eigen::MatrixXd samples;  // dim x count
  Eigen::VectorXd log_density;
  std::vector<std::uint8_t> admissible;
  int count = 0;
  int shapes = 0;  // L
  int modes = 0;   // M
  bool has_kappa = false;

  int admissible_count() const {
    int n = 0;
    for (auto a : admissible) n += a != 0;
    return n;
  }
  double discard_fraction() const {
    return count == 0 ? 0.0 : 1.0 - static_cast<double>(admissible_count()) / count;
  }
  ShapeParams shape_at(int i) const {
    return unpack(samples.col(i), shapes, modes, has_kappa);
  }
};

}  // namespace iscat
