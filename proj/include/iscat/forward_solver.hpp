#pragma once

#include <memory>
#include <vector>

#include "iscat/curve.hpp"
#include "iscat/scene.hpp"
#include "iscat/types.hpp"

namespace iscat {

/// Dirichlet and Neumann traces of a transmission solve on every component
/// boundary. Interior traces belong to the field inside each inclusion;
/// exterior traces to the radiating field outside. They are linked by the
/// prescribed jumps gD = v- - v+ and gN = beta dn v- - dn v+.
struct BoundarySolution {
  double kappa_e = 0.0;
  double kappa_i = 0.0;
  double beta = 1.0;
  std::vector<DiscretizedCurve> curves;
  std::vector<Eigen::VectorXcd> interior_dirichlet;  // v- on each boundary
  std::vector<Eigen::VectorXcd> interior_neumann;    // dn v-
  std::vector<Eigen::VectorXcd> exterior_dirichlet;  // v+
  std::vector<Eigen::VectorXcd> exterior_neumann;    // dn v+
  double rcond = 1.0;

  /// Exterior field v+(x) from its layer representation; x must lie outside
  /// every component.
  Eigen::VectorXcd evaluate_exterior(const std::vector<Vec2>& points) const;
};

/// Nystrom solver for the 2D Helmholtz transmission problem on smooth
/// star-shaped boundaries. Uses spectrally accurate trapezoid quadrature with
/// log-singularity splitting and a combined single-trace formulation (sums of
/// the interior and exterior Calderon rows) that stays uniquely solvable at
/// interior resonances; hypersingular parts are reduced to single-layer form
/// through Maue's identity. The factorization is retained so that many jump
/// data sets can be solved against one geometry.
class TransmissionSolver {
 public:
  TransmissionSolver(std::vector<DiscretizedCurve> curves, double kappa_e,
                     double kappa_i, double beta);
  ~TransmissionSolver();
  TransmissionSolver(TransmissionSolver&&) noexcept;
  TransmissionSolver& operator=(TransmissionSolver&&) noexcept;

  /// Solves with prescribed jumps per component. Thread-safe on a const
  /// instance.
  BoundarySolution solve(const std::vector<Eigen::VectorXcd>& gD,
                         const std::vector<Eigen::VectorXcd>& gN) const;

  /// Forward scattering problem: jumps from the incident plane wave, so the
  /// interior trace is the transmitted field and the exterior trace the
  /// scattered one.
  BoundarySolution solve_incident(const Scene& scene) const;

  const std::vector<DiscretizedCurve>& curves() const;
  double kappa_e() const;
  double kappa_i() const;
  double beta() const;
  double rcond() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot forward solve for Fourier-parameterized components.
BoundarySolution solve_transmission(const ShapeParams& params, const Scene& scene,
                                    int n_bem);

/// Total field u = u_inc + u_sc at exterior points. Points inside an obstacle
/// or within one quadrature spacing of a boundary are rejected.
Eigen::VectorXcd eval_total_field(const BoundarySolution& sol, const Scene& scene,
                                  const std::vector<Vec2>& points);

/// Quadrature weights for the ln(4 sin^2((t-s)/2)) factor on n uniform nodes.
const Eigen::VectorXd& kress_log_weights(int n);

}  // namespace iscat
