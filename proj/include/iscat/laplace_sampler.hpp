#pragma once

#include <cstdint>

#include "iscat/sample_set.hpp"
#include "iscat/types.hpp"

namespace iscat {

/// Gaussian posterior approximation at the MAP point: covariance is the
/// inverse Gauss-Newton Hessian, stored with its symmetric square root.
struct LaplacePosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  Eigen::MatrixXd sqrt_factor;
  bool floored = false;  // eigenvalue floor applied (indefinite Hessian)

  int dim() const { return static_cast<int>(mean.size()); }
};

/// Inverts the Hessian through a symmetric eigendecomposition; eigenvalues
/// below 1e-12 of the largest are floored (and flagged), which keeps the
/// intensity-data Hessian usable when M_h makes it indefinite.
LaplacePosterior posterior_covariance(const Eigen::VectorXd& nu_map,
                                      const Eigen::MatrixXd& gn_hessian);

/// Draws nu = mean + sqrt_factor * n with iid standard normal n. Each draw is
/// flagged admissible or not; draws are kept either way. log_density holds
/// the Gaussian log-density (up to its normalization constant).
SampleSet sample_laplace(const LaplacePosterior& posterior, int count,
                         std::uint64_t seed, int shapes, int modes, bool has_kappa);

/// Fraction above which the discarded-sample warning should fire.
inline constexpr double laplace_discard_warning_fraction = 0.2;

}  // namespace iscat
