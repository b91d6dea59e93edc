#pragma once

#include <vector>

#include "iscat/forward_solver.hpp"
#include "iscat/geometry.hpp"
#include "iscat/scene.hpp"

namespace iscat {

/// Boundary perturbation field dq/dnu_k on the curve nodes for one packed
/// parameter of a component: translations for the centers, radial fields
/// modulated by the trigonometric modes for the radius coefficients (the
/// factor 2 on the m >= 1 modes follows the radius expansion).
Eigen::Matrix2Xd direction_field(const DiscretizedCurve& curve, int param_index, int modes);

/// Jump data of the linearized transmission problem for a boundary
/// perturbation V supported on component `comp_index`:
///   v- - v+            = -(V.n) (dn u- - dn u+),
///   beta dn v- - dn v+ = d/ds[(V.n) d/ds(beta u- - u+)]
///                        + (V.n)(beta kappa_i^2 u- - kappa_e^2 u+).
struct FrechetJumps {
  std::vector<Eigen::VectorXcd> gD;
  std::vector<Eigen::VectorXcd> gN;
};
FrechetJumps frechet_jumps(const BoundarySolution& forward, int comp_index,
                           const Eigen::Matrix2Xd& V);

/// Detector trace of the linearized field for one perturbation direction.
Eigen::VectorXcd frechet_shape_solve(const TransmissionSolver& solver,
                                     const BoundarySolution& forward, int comp_index,
                                     const Eigen::Matrix2Xd& V,
                                     const std::vector<Vec2>& detectors);

/// Field Jacobian d u(x_j) / d nu: all shape columns (and the kappa_i column
/// when requested) at the given parameters. Columns are independent solves
/// against one factorization and may run on several threads.
Eigen::MatrixXcd assemble_jacobian(const ShapeParams& params, const Scene& scene,
                                   int n_bem, bool kappa_column = false,
                                   double kappa_rel_step = 1e-4, int threads = 1);

/// d u(x_j) / d kappa_i by the forward difference
/// (u(kappa_i + t) - u(kappa_i)) / t with t = rel_step * kappa_i.
Eigen::VectorXcd frechet_kappa_column(const ShapeParams& params, const Scene& scene,
                                      int n_bem, double rel_step,
                                      const Eigen::VectorXcd& u_at_kappa);

/// Adjoint state: p = p_inc + correction, where p_inc is the Hankel sum over
/// detectors weighted by chi and the correction solves the transmission
/// problem with p_inc as incident field. Interior traces of the returned
/// solution are the full adjoint traces.
BoundarySolution adjoint_solve(const TransmissionSolver& solver,
                               const std::vector<Vec2>& detectors,
                               const Eigen::VectorXcd& chi);

/// Shape derivative of the unregularized misfit along V (supported on one
/// component), evaluated as a boundary integral of forward and adjoint
/// traces.
double shape_derivative_cost(const BoundarySolution& forward,
                             const BoundarySolution& adjoint, int comp_index,
                             const Eigen::Matrix2Xd& V);

/// Measurement chain factors for intensity data:
/// M_g = diag(2 u_j), M_h = diag(6 |u_j|^2 - 2 d_j).
struct MeasurementChain {
  Eigen::VectorXcd mg;
  Eigen::VectorXd mh;
};
MeasurementChain measurement_chain(const Eigen::VectorXcd& u_det, const DataVector& data);

/// d/ds along a curve (spectral differentiation divided by the speed).
Eigen::VectorXcd arc_derivative(const DiscretizedCurve& curve, const Eigen::VectorXcd& f);

}  // namespace iscat
