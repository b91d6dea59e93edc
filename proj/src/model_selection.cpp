#include "iscat/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "iscat/mcmc_sampler.hpp"
#include "iscat/parallel.hpp"
#include "iscat/rng.hpp"

namespace iscat {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// log(sum exp(v_i)) with a fixed reduction order.
double log_sum_exp(const Eigen::VectorXd& v) {
  const double vmax = v.maxCoeff();
  if (vmax == neg_inf) return neg_inf;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) acc += std::exp(v[i] - vmax);
  return vmax + std::log(acc);
}

}  // namespace

double normalized_log_likelihood(const Eigen::VectorXcd& u_det, const DataVector& data) {
  if (u_det.size() != data.values.size())
    throw std::invalid_argument("normalized_log_likelihood: size mismatch");
  if (data.sigma_noise <= 0.0)
    throw std::invalid_argument("normalized_log_likelihood: sigma must be positive");
  const double n = static_cast<double>(data.size());
  double misfit = 0.0;
  if (data.op == Measurement::field) {
    misfit = (u_det - data.values).squaredNorm();
  } else {
    for (Eigen::Index j = 0; j < u_det.size(); ++j) {
      const double r = std::norm(u_det[j]) - data.values[j].real();
      misfit += r * r;
    }
  }
  return -0.5 * n * std::log(2.0 * pi) - n * std::log(data.sigma_noise) -
         0.5 * misfit / (data.sigma_noise * data.sigma_noise);
}

EvidenceEstimate evidence_mc(const std::function<double(const Eigen::VectorXd&)>& log_lik,
                             const std::function<Eigen::VectorXd(Rng&)>& sampler,
                             int object_count, long num_samples, std::uint64_t seed,
                             int threads) {
  if (num_samples < 100)
    throw std::invalid_argument("evidence: need at least 100 prior samples");
  Rng rng(seed);
  Eigen::VectorXd first = sampler(rng);
  Eigen::MatrixXd samples(first.size(), num_samples);
  samples.col(0) = first;
  for (long i = 1; i < num_samples; ++i) samples.col(i) = sampler(rng);

  Eigen::VectorXd ll(num_samples);
  parallel_for(
      num_samples, [&](std::size_t i) { ll[i] = log_lik(samples.col(i)); }, threads);

  EvidenceEstimate est;
  est.object_count = object_count;
  est.samples = num_samples;
  est.log_mean = log_sum_exp(ll) - std::log(static_cast<double>(num_samples));
  // Second moment in log space; variance = S/(S-1) (m2 - mean^2).
  Eigen::VectorXd ll2 = 2.0 * ll;
  const double log_m2 = log_sum_exp(ll2) - std::log(static_cast<double>(num_samples));
  const double ratio = std::exp(2.0 * est.log_mean - log_m2);  // mean^2 / m2 <= 1
  if (ratio >= 1.0) {
    est.log_se = neg_inf;  // zero sample variance
  } else {
    const double log_var = log_m2 + std::log1p(-ratio) +
                           std::log(static_cast<double>(num_samples) /
                                    static_cast<double>(num_samples - 1));
    est.log_se = 0.5 * log_var - 0.5 * std::log(static_cast<double>(num_samples));
  }
  return est;
}

EvidenceEstimate evidence(const std::function<double(const Eigen::VectorXd&)>& log_lik,
                          const PriorSpec& prior, int object_count, long num_samples,
                          std::uint64_t seed, int threads) {
  return evidence_mc(log_lik, make_truncated_prior_sampler(prior), object_count,
                     num_samples, seed, threads);
}

EvidenceEstimate evidence(const ScatteringModel& model, const DataVector& data,
                          const PriorSpec& prior, int object_count, long num_samples,
                          std::uint64_t seed, int threads) {
  auto log_lik = [&model, data](const Eigen::VectorXd& nu) -> double {
    try {
      return normalized_log_likelihood(model.field(nu), data);
    } catch (const std::exception&) {
      return neg_inf;
    }
  };
  return evidence(log_lik, prior, object_count, num_samples, seed, threads);
}

double EvidenceEstimate::log_relative_se() const {
  return std::exp(log_se - log_mean);  // SE / E, the log-domain error bar
}

ModelChoice select_model(const std::vector<EvidenceEstimate>& estimates) {
  if (estimates.size() < 2)
    throw std::invalid_argument("select_model: need at least two estimates");
  ModelChoice choice;
  std::size_t best = 0;
  for (std::size_t i = 1; i < estimates.size(); ++i) {
    const bool better = estimates[i].log_mean > estimates[best].log_mean;
    const bool tie = estimates[i].log_mean == estimates[best].log_mean &&
                     estimates[i].object_count < estimates[best].object_count;
    if (better || tie) best = i;
  }
  choice.selected = estimates[best].object_count;

  // Unclear when the log-evidence bands log E +- 2 SE/E (delta method)
  // of the winner and a rival overlap.
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    if (i == best) continue;
    const double gap = estimates[best].log_mean - estimates[i].log_mean;
    const double band =
        2.0 * (estimates[best].log_relative_se() + estimates[i].log_relative_se());
    if (gap <= band) choice.unclear = true;
  }
  return choice;
}

}  // namespace iscat
