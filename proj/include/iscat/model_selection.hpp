#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "iscat/rng.hpp"
#include "iscat/scattering_model.hpp"
#include "iscat/topological_prior.hpp"
#include "iscat/types.hpp"

namespace iscat {

/// Monte Carlo estimate of the evidence p(d | m) for one object count.
/// Accumulation happens in log space so that tiny likelihoods cannot
/// underflow to zero.
struct EvidenceEstimate {
  int object_count = 0;
  double log_mean = 0.0;  // log of the evidence estimate
  double log_se = 0.0;    // log of its standard error (-inf for zero variance)
  long samples = 0;

  double estimate() const { return std::exp(log_mean); }
  double standard_error() const { return std::exp(log_se); }
  /// Error bar of log E by the delta method: SE / E.
  double log_relative_se() const;
};

/// Normalized log-likelihood of the data given a field evaluation:
/// -N/2 log(2 pi) - N log(sigma) - ||f - d||^2 / (2 sigma^2). Normalization
/// constants are kept because evidence values are compared across models.
double normalized_log_likelihood(const Eigen::VectorXcd& u_det, const DataVector& data);

/// Core Monte Carlo estimator over an arbitrary prior sampler.
EvidenceEstimate evidence_mc(const std::function<double(const Eigen::VectorXd&)>& log_lik,
                             const std::function<Eigen::VectorXd(Rng&)>& sampler,
                             int object_count, long num_samples, std::uint64_t seed,
                             int threads = 1);

/// Averages the likelihood over admissible prior draws (inadmissible draws
/// are resampled and do not count towards S).
EvidenceEstimate evidence(const std::function<double(const Eigen::VectorXd&)>& log_lik,
                          const PriorSpec& prior, int object_count, long num_samples,
                          std::uint64_t seed, int threads = 1);

/// Evidence for a scattering model with the given inversion data.
EvidenceEstimate evidence(const ScatteringModel& model, const DataVector& data,
                          const PriorSpec& prior, int object_count, long num_samples,
                          std::uint64_t seed, int threads = 1);

struct ModelChoice {
  int selected = 0;
  bool unclear = false;  // top two estimates overlap within two standard errors
};

/// Argmax of the evidence; ties resolve to the smaller count and are flagged.
ModelChoice select_model(const std::vector<EvidenceEstimate>& estimates);

}  // namespace iscat
