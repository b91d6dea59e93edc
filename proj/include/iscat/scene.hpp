#pragma once

#include <cstdint>
#include <vector>

#include "iscat/types.hpp"

namespace iscat {

enum class Measurement { field, intensity };

/// Physical configuration: wavenumbers, transmission contrast, incident
/// plane-wave direction and detector positions. Dimensionless units.
struct Scene {
  double kappa_e = 0.0;
  double kappa_i = 0.0;
  double beta = 1.0;
  Vec2 incident_dir = Vec2(0.0, 1.0);  // unit vector; wave travels towards detectors
  std::vector<Vec2> detectors;

  cdouble u_inc(const Vec2& x) const {
    return std::exp(iunit * kappa_e * incident_dir.dot(x));
  }
  Eigen::Vector2cd grad_u_inc(const Vec2& x) const {
    return (iunit * kappa_e * u_inc(x)) * incident_dir;
  }
  cdouble dn_u_inc(const Vec2& x, const Vec2& n) const {
    return iunit * kappa_e * incident_dir.dot(n) * u_inc(x);
  }
};

/// Measured observations with the operator tag and noise level. Intensity
/// data are stored with zero imaginary part.
struct DataVector {
  Eigen::VectorXcd values;
  Measurement op = Measurement::field;
  double sigma_noise = 0.0;

  int size() const { return static_cast<int>(values.size()); }
};

/// Applies the measurement operator: identity for field, |u|^2 for intensity.
DataVector measure(const Eigen::VectorXcd& u_values, Measurement op);

/// Applies the measurement operator to a single value.
cdouble apply_operator(cdouble u, Measurement op);

/// Additive white noise of relative magnitude `level`:
/// sigma = level * rms(|d|); complex data get independent N(0, sigma^2/2)
/// real/imaginary perturbations, intensity data real N(0, sigma^2).
DataVector add_noise(const DataVector& d, double level, std::uint64_t seed);

/// Uniform detector line x_j = (x0 + spacing*j, y), j = 0..count-1.
std::vector<Vec2> detector_line(int count = 201, double y = 5.0, double x0 = -5.0,
                                double spacing = 0.05);

/// Splits data and detector positions into the even-index and odd-index
/// subgrids. Even indices (coarser grid) drive the inversion; odd indices
/// feed the prior construction.
struct DataSplit {
  DataVector invert;
  DataVector prior;
  std::vector<Vec2> invert_detectors;
  std::vector<Vec2> prior_detectors;
};
DataSplit split_interleaved(const DataVector& all, const std::vector<Vec2>& detectors);

}  // namespace iscat
