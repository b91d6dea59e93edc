#include "iscat/map_optimizer.hpp"

#include <cmath>
#include <limits>

namespace iscat {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

Eigen::VectorXd observed_residual(const CostModel& model, const Eigen::VectorXcd& u_det,
                                  Eigen::VectorXcd* complex_residual) {
  // Residual f(nu) - d: complex for field data, real for intensity.
  if (model.op == Measurement::field) {
    *complex_residual = u_det - model.data;
    return {};
  }
  Eigen::VectorXd r(u_det.size());
  for (Eigen::Index j = 0; j < u_det.size(); ++j)
    r[j] = std::norm(u_det[j]) - model.data[j].real();
  return r;
}

}  // namespace

CostModel make_cost_model(const ScatteringModel& model, const DataVector& data,
                          const PriorSpec& prior) {
  if (static_cast<int>(model.scene().detectors.size()) != data.size())
    throw std::invalid_argument("make_cost_model: data/detector mismatch");
  if (model.parameter_dim() != prior.dim())
    throw std::invalid_argument("make_cost_model: prior dimension mismatch");
  CostModel cm;
  cm.field = [&model](const Eigen::VectorXd& nu) { return model.field(nu); };
  cm.jacobian = [&model](const Eigen::VectorXd& nu) { return model.jacobian(nu); };
  cm.admissible = [&model](const Eigen::VectorXd& nu) { return model.admissible(nu); };
  cm.op = data.op;
  cm.data = data.values;
  cm.sigma = data.sigma_noise;
  cm.prior_mean = prior.mean();
  cm.prior_variance = prior.variance;
  if (cm.sigma <= 0.0)
    throw std::invalid_argument("make_cost_model: noise level must be positive");
  return cm;
}

double cost_from_field(const CostModel& model, const Eigen::VectorXd& nu,
                       const Eigen::VectorXcd& u_det, double lambda) {
  double misfit;
  if (model.op == Measurement::field) {
    misfit = (u_det - model.data).squaredNorm();
  } else {
    Eigen::VectorXcd unused;
    misfit = observed_residual(model, u_det, &unused).squaredNorm();
  }
  const Eigen::VectorXd dnu = nu - model.prior_mean;
  const double prior_term = dnu.cwiseQuotient(model.prior_variance).dot(dnu);
  return 0.5 * misfit / (model.sigma * model.sigma) + 0.5 * lambda * prior_term;
}

double cost(const CostModel& model, const Eigen::VectorXd& nu, double lambda) {
  if (model.admissible && !model.admissible(nu)) return inf;
  return cost_from_field(model, nu, model.field(nu), lambda);
}

Eigen::VectorXd gradient(const CostModel& model, const Eigen::VectorXd& nu,
                         const Eigen::VectorXcd& u_det, const Eigen::MatrixXcd& jac,
                         double lambda) {
  const double inv_var = 1.0 / (model.sigma * model.sigma);
  Eigen::VectorXd g;
  if (model.op == Measurement::field) {
    const Eigen::VectorXcd r = u_det - model.data;
    g = inv_var * (jac.adjoint() * r).real();
  } else {
    Eigen::VectorXcd unused;
    const Eigen::VectorXd r = observed_residual(model, u_det, &unused);
    const Eigen::VectorXcd weighted =
        (2.0 * u_det.array() * r.cast<cdouble>().array()).matrix();
    g = inv_var * (jac.adjoint() * weighted).real();
  }
  const Eigen::VectorXd dnu = nu - model.prior_mean;
  g += lambda * dnu.cwiseQuotient(model.prior_variance);
  return g;
}

Eigen::MatrixXd gn_hessian(const CostModel& model, const Eigen::VectorXcd& u_det,
                           const Eigen::MatrixXcd& jac, double lambda) {
  const double inv_var = 1.0 / (model.sigma * model.sigma);
  Eigen::MatrixXd h;
  if (model.op == Measurement::field) {
    h = inv_var * (jac.adjoint() * jac).real();
  } else {
    Eigen::VectorXd mh(u_det.size());
    for (Eigen::Index j = 0; j < u_det.size(); ++j)
      mh[j] = 6.0 * std::norm(u_det[j]) - 2.0 * model.data[j].real();
    h = inv_var * (jac.adjoint() * mh.asDiagonal() * jac).real();
  }
  h += (lambda * model.prior_variance.cwiseInverse()).asDiagonal();
  return 0.5 * (h + h.transpose());
}

LmResult lm_solve(const CostModel& model, const Eigen::VectorXd& nu_start,
                  const LmOptions& options) {
  if (model.sigma <= 0.0) throw std::invalid_argument("lm_solve: sigma must be positive");
  const double inv_var = 1.0 / (model.sigma * model.sigma);
  const double lambda0 = options.lambda0_factor * inv_var;
  const double stop_tol = options.tau * inv_var;

  LmResult result;
  Eigen::VectorXd nu = nu_start;
  if (model.admissible && !model.admissible(nu))
    throw InadmissibleError("lm_solve: inadmissible start");

  for (int k = 0; k < options.max_iterations; ++k) {
    const double lambda = std::max(1.0, lambda0 * std::pow(options.lambda_decay, k));

    const Eigen::VectorXcd u = model.field(nu);
    const Eigen::MatrixXcd jac = model.jacobian(nu);
    const Eigen::VectorXd g = gradient(model, nu, u, jac, lambda);
    const Eigen::MatrixXd h = gn_hessian(model, u, jac, lambda);
    const double j_cur = cost_from_field(model, nu, u, lambda);
    if (k == 0)
      result.initial_gradient_norm = gradient(model, nu, u, jac, 1.0).norm();

    double mu = options.mu0;
    bool accepted = false;
    Eigen::VectorXd trial;
    double j_trial = inf;
    while (true) {
      Eigen::MatrixXd damped = h;
      damped.diagonal() += mu * h.diagonal();
      const Eigen::VectorXd step = damped.ldlt().solve(-g);
      trial = nu + step;
      j_trial = inf;
      if (!model.admissible || model.admissible(trial)) {
        try {
          j_trial = cost_from_field(model, trial, model.field(trial), lambda);
        } catch (const SolverError&) {
          j_trial = inf;
        }
      }
      if (j_trial < j_cur) {
        accepted = true;
        break;
      }
      if (mu >= options.mu_max) break;
      mu = std::min(mu * options.mu_factor, options.mu_max);
    }

    LmIteration it;
    it.k = k;
    it.lambda = lambda;
    it.mu = mu;
    it.accepted = accepted;
    it.cost = accepted ? j_trial : j_cur;
    it.step_norm = accepted ? (trial - nu).norm() : 0.0;
    result.trace.push_back(it);
    result.iterations = k + 1;

    // Cost changes below machine resolution cannot be iterated away.
    const double resolve_floor = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(j_cur);
    if (lambda == 1.0 && std::isfinite(j_trial) &&
        std::abs(j_trial - j_cur) < stop_tol + resolve_floor) {
      if (accepted) nu = trial;
      result.converged = true;
      break;
    }
    if (accepted) {
      nu = trial;
    } else if (lambda == 1.0) {
      // no acceptable damped step at the full objective: stalled
      break;
    }
  }

  result.nu_map = nu;
  const Eigen::VectorXcd u = model.field(nu);
  const Eigen::MatrixXcd jac = model.jacobian(nu);
  result.final_cost = cost_from_field(model, nu, u, 1.0);
  result.final_gradient_norm = gradient(model, nu, u, jac, 1.0).norm();
  return result;
}

}  // namespace iscat
