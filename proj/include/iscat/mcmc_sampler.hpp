#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "iscat/rng.hpp"
#include "iscat/sample_set.hpp"
#include "iscat/scattering_model.hpp"
#include "iscat/topological_prior.hpp"
#include "iscat/types.hpp"

namespace iscat {

/// Log of the truncated Gaussian prior: -inf for inadmissible geometry
/// (vanishing radius, intersecting or nested boundaries, nonpositive kappa),
/// otherwise the unnormalized Gaussian exponent.
double log_prior_truncated(const Eigen::VectorXd& nu, const PriorSpec& prior);

/// Unnormalized log-posterior: truncated prior plus data likelihood.
/// Inadmissible parameters short-circuit before any forward solve; solver
/// failures count as rejections (-inf).
std::function<double(const Eigen::VectorXd&)> make_log_posterior(
    const ScatteringModel& model, const DataVector& data, const PriorSpec& prior);

/// Rejection sampler from the truncated prior; throws after 1e6 attempts.
std::function<Eigen::VectorXd(Rng&)> make_truncated_prior_sampler(const PriorSpec& prior);

struct ChainConfig {
  int walkers = 200;
  int steps = 200;
  long burn_in = 0;     // flattened ensemble samples discarded from the start
  double stretch = 2.0; // a
  std::uint64_t seed = 0;
  int threads = 1;
};

/// All walker states: column k*walkers + w holds walker w at step k,
/// k = 0..steps.
struct Ensemble {
  int walkers = 0;
  int steps = 0;
  int dim = 0;
  Eigen::MatrixXd states;
  Eigen::VectorXd log_density;
  long accepted = 0;
  long proposals = 0;

  long total_samples() const { return static_cast<long>(walkers) * (steps + 1); }
  double acceptance_rate() const {
    return proposals == 0 ? 0.0 : static_cast<double>(accepted) / proposals;
  }
  /// Chain of one walker (dim x (steps+1)).
  Eigen::MatrixXd walker_chain(int w) const;
};

/// Goodman-Weare stretch-move ensemble sampling. Walkers are initialized from
/// `init` (redrawn while the target is -inf), then advanced `steps` sweeps:
/// each walker picks a random partner among the *pre-sweep* states, a stretch
/// factor z with density 1/sqrt(z) on [1/a, a], proposes
/// X_q + z (X_w - X_q), and accepts with probability min(1, z^{d-1} pi_prop /
/// pi_cur). Target evaluations within a sweep are independent and may run on
/// several threads; the realized chain depends only on the seed.
Ensemble run_ensemble(const std::function<double(const Eigen::VectorXd&)>& log_target,
                      const std::function<Eigen::VectorXd(Rng&)>& init,
                      const ChainConfig& config);

/// Flattened retained samples: everything from flattened index burn_in on.
SampleSet to_sample_set(const Ensemble& ensemble, long burn_in, int shapes, int modes,
                        bool has_kappa);

struct GelmanRubin {
  Eigen::VectorXd rhat;
  std::vector<std::uint8_t> degenerate;  // zero within-chain variance
};

/// Potential scale reduction per parameter from chains of equal length.
GelmanRubin gelman_rubin(const std::vector<Eigen::MatrixXd>& chains);

/// Same, over walker chains with the first `discard_steps` states dropped.
GelmanRubin gelman_rubin(const Ensemble& ensemble, int discard_steps = 0);

}  // namespace iscat
