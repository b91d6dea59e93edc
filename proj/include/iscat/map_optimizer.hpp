#pragma once

#include <functional>
#include <vector>

#include "iscat/scattering_model.hpp"
#include "iscat/scene.hpp"
#include "iscat/topological_prior.hpp"
#include "iscat/types.hpp"

namespace iscat {

/// Regularized least-squares model: data misfit weighted by the noise
/// variance plus a Gaussian prior penalty. The field map and its Jacobian are
/// injected so that analytic test problems and the boundary-element map share
/// one optimizer.
struct CostModel {
  std::function<Eigen::VectorXcd(const Eigen::VectorXd&)> field;
  std::function<Eigen::MatrixXcd(const Eigen::VectorXd&)> jacobian;
  std::function<bool(const Eigen::VectorXd&)> admissible;
  Measurement op = Measurement::field;
  Eigen::VectorXcd data;
  double sigma = 1.0;
  Eigen::VectorXd prior_mean;
  Eigen::VectorXd prior_variance;

  int dim() const { return static_cast<int>(prior_mean.size()); }
};

/// Binds the boundary-element map, the inversion data split and a prior into
/// a cost model.
CostModel make_cost_model(const ScatteringModel& model, const DataVector& data,
                          const PriorSpec& prior);

/// J(nu) = 1/2 ||f(nu) - d||^2 / sigma^2 + lambda/2 ||nu - nu0||^2_prior.
/// Inadmissible parameters evaluate to +infinity; solver failures propagate.
double cost(const CostModel& model, const Eigen::VectorXd& nu, double lambda = 1.0);

/// Same, reusing an already computed detector field.
double cost_from_field(const CostModel& model, const Eigen::VectorXd& nu,
                       const Eigen::VectorXcd& u_det, double lambda = 1.0);

/// Gradient of J; for intensity data the measurement chain factor
/// M_g = diag(2 u_j) enters the data term.
Eigen::VectorXd gradient(const CostModel& model, const Eigen::VectorXd& nu,
                         const Eigen::VectorXcd& u_det, const Eigen::MatrixXcd& jac,
                         double lambda = 1.0);

/// Gauss-Newton Hessian; for intensity data the data block uses
/// M_h = diag(6 |u_j|^2 - 2 d_j) and may be indefinite on its own.
Eigen::MatrixXd gn_hessian(const CostModel& model, const Eigen::VectorXcd& u_det,
                           const Eigen::MatrixXcd& jac, double lambda = 1.0);

struct LmOptions {
  double lambda0_factor = 0.1;   // lambda_0 = lambda0_factor / sigma^2
  double lambda_decay = 2.0 / 3.0;
  double mu0 = 1e-3;
  double mu_factor = 10.0;
  double mu_max = 1.0;
  double tau = 1e-5;             // stop when |dJ| < tau / sigma^2 at lambda = 1
  int max_iterations = 200;
};

struct LmIteration {
  int k = 0;
  double lambda = 1.0;
  double mu = 0.0;
  double cost = 0.0;      // accepted value of the lambda-weighted objective
  double step_norm = 0.0;
  bool accepted = false;
};

struct LmResult {
  Eigen::VectorXd nu_map;
  std::vector<LmIteration> trace;
  bool converged = false;
  int iterations = 0;
  double final_cost = 0.0;
  double initial_gradient_norm = 0.0;
  double final_gradient_norm = 0.0;
};

/// Levenberg-Marquardt with Fletcher's diagonal scaling
///   (H + mu diag(H)) step = -g,
/// Gauss-Newton Hessians, and a prior-weight continuation that starts at
/// lambda_0 = 0.1/sigma^2 and decays by 2/3 per iteration until lambda = 1.
/// mu resets to mu0 each iteration and grows tenfold (capped at 1) until the
/// objective decreases. Iteration stops once the cost change at lambda = 1
/// falls below tau/sigma^2.
LmResult lm_solve(const CostModel& model, const Eigen::VectorXd& nu_start,
                  const LmOptions& options = {});

}  // namespace iscat
