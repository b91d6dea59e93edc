#include "iscat/laplace_sampler.hpp"

#include "iscat/rng.hpp"

namespace iscat {

LaplacePosterior posterior_covariance(const Eigen::VectorXd& nu_map,
                                      const Eigen::MatrixXd& gn_hessian) {
  const int n = static_cast<int>(nu_map.size());
  if (gn_hessian.rows() != n || gn_hessian.cols() != n)
    throw std::invalid_argument("posterior_covariance: dimension mismatch");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      0.5 * (gn_hessian + gn_hessian.transpose()));
  Eigen::VectorXd evals = eig.eigenvalues();
  const double floor = 1e-12 * evals.maxCoeff();
  if (!(floor > 0.0))
    throw std::invalid_argument("posterior_covariance: Hessian has no positive eigenvalue");

  LaplacePosterior post;
  post.mean = nu_map;
  for (int i = 0; i < n; ++i) {
    if (evals[i] < floor) {
      evals[i] = floor;
      post.floored = true;
    }
  }
  const Eigen::MatrixXd& q = eig.eigenvectors();
  post.covariance = q * evals.cwiseInverse().asDiagonal() * q.transpose();
  post.sqrt_factor = q * evals.cwiseInverse().cwiseSqrt().asDiagonal() * q.transpose();
  return post;
}

SampleSet sample_laplace(const LaplacePosterior& posterior, int count, std::uint64_t seed,
                         int shapes, int modes, bool has_kappa) {
  if (count < 1) throw std::invalid_argument("sample_laplace: count must be >= 1");
  const int dim = posterior.dim();
  if (dim != param_dim(shapes, modes, has_kappa))
    throw std::invalid_argument("sample_laplace: parameterization mismatch");

  // Factor the covariance once for the log-density of the draws.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(posterior.covariance);

  SampleSet set;
  set.count = count;
  set.shapes = shapes;
  set.modes = modes;
  set.has_kappa = has_kappa;
  set.samples.resize(dim, count);
  set.log_density.resize(count);
  set.admissible.resize(count);

  Rng rng(seed);
  Eigen::VectorXd normal(dim);
  for (int i = 0; i < count; ++i) {
    for (int k = 0; k < dim; ++k) normal[k] = rng.normal();
    set.samples.col(i) = posterior.mean + posterior.sqrt_factor * normal;
    const Eigen::VectorXd white =
        eig.eigenvectors().transpose() * (set.samples.col(i) - posterior.mean);
    set.log_density[i] =
        -0.5 * white.cwiseQuotient(eig.eigenvalues().cwiseMax(1e-300)).dot(white);
    set.admissible[i] =
        is_admissible(unpack(set.samples.col(i), shapes, modes, has_kappa)) ? 1 : 0;
  }
  return set;
}

}  // namespace iscat
