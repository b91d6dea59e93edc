#pragma once

#include <cstdint>
#include <memory>

#include "iscat/geometry.hpp"
#include "iscat/scene.hpp"
#include "iscat/types.hpp"

namespace iscat {

/// Parameter-to-observable map over a fixed scene: packed parameter vector in,
/// detector field (or its Jacobian) out. Recently evaluated fields are cached
/// by parameter vector so that repeated evaluations at unchanged states do not
/// trigger a new boundary solve. Thread-safe for concurrent evaluation.
class ScatteringModel {
 public:
  /// `scene.detectors` are the observation points. When `infer_kappa` is set,
  /// the last packed parameter overrides scene.kappa_i per evaluation.
  ScatteringModel(Scene scene, int count, int modes, int n_bem, bool infer_kappa = false,
                  int threads = 1);
  ~ScatteringModel();
  ScatteringModel(ScatteringModel&&) noexcept;
  ScatteringModel& operator=(ScatteringModel&&) noexcept;

  /// Complex field u(x_j); throws InadmissibleError / SolverError.
  Eigen::VectorXcd field(const Eigen::VectorXd& nu) const;

  /// Field Jacobian (including the kappa column when active).
  Eigen::MatrixXcd jacobian(const Eigen::VectorXd& nu) const;

  bool admissible(const Eigen::VectorXd& nu) const;
  ShapeParams unpack_params(const Eigen::VectorXd& nu) const;
  Scene scene_for(const Eigen::VectorXd& nu) const;

  int parameter_dim() const;
  int detector_count() const;
  int n_bem() const;
  bool infer_kappa() const;
  const Scene& scene() const;

  /// Relative detector-field change when the boundary resolution doubles.
  double self_convergence_error(const Eigen::VectorXd& nu) const;

  std::uint64_t solve_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace iscat
