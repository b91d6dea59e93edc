#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace iscat {

using cdouble = std::complex<double>;
using Vec2 = Eigen::Vector2d;

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double euler_gamma = 0.577215664901532860606512090082402431;
inline constexpr cdouble iunit{0.0, 1.0};

/// Raised when a boundary-integral solve cannot be completed.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double rcond = -1.0)
      : std::runtime_error(what), rcond_(rcond) {}
  double rcond() const { return rcond_; }

 private:
  double rcond_;
};

/// Raised when parameters describe a degenerate or overlapping geometry.
class InadmissibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a sampler cannot populate its walkers inside the target
/// support.
class SamplerInitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace iscat
