#include "iscat/mcmc_sampler.hpp"

#include <cmath>
#include <limits>

#include "iscat/parallel.hpp"

namespace iscat {

namespace {
constexpr double neg_inf = -std::numeric_limits<double>::infinity();
}

double log_prior_truncated(const Eigen::VectorXd& nu, const PriorSpec& prior) {
  const ShapeParams params =
      unpack(nu, static_cast<int>(prior.nu0.components.size()), prior.nu0.modes(),
             prior.has_kappa());
  if (!is_admissible(params)) return neg_inf;
  const Eigen::VectorXd dnu = nu - prior.mean();
  return -0.5 * dnu.cwiseQuotient(prior.variance).dot(dnu);
}

std::function<double(const Eigen::VectorXd&)> make_log_posterior(
    const ScatteringModel& model, const DataVector& data, const PriorSpec& prior) {
  if (data.sigma_noise <= 0.0)
    throw std::invalid_argument("make_log_posterior: noise level must be positive");
  const double inv_two_var = 0.5 / (data.sigma_noise * data.sigma_noise);
  return [&model, data, prior, inv_two_var](const Eigen::VectorXd& nu) -> double {
    const double lp = log_prior_truncated(nu, prior);
    if (lp == neg_inf) return neg_inf;
    Eigen::VectorXcd u;
    try {
      u = model.field(nu);
    } catch (const std::exception&) {
      return neg_inf;
    }
    double misfit = 0.0;
    if (data.op == Measurement::field) {
      misfit = (u - data.values).squaredNorm();
    } else {
      for (Eigen::Index j = 0; j < u.size(); ++j) {
        const double r = std::norm(u[j]) - data.values[j].real();
        misfit += r * r;
      }
    }
    return lp - inv_two_var * misfit;
  };
}

std::function<Eigen::VectorXd(Rng&)> make_truncated_prior_sampler(const PriorSpec& prior) {
  const Eigen::VectorXd mean = prior.mean();
  const Eigen::VectorXd std_dev = prior.variance.cwiseSqrt();
  const int shapes = static_cast<int>(prior.nu0.components.size());
  const int modes = prior.nu0.modes();
  const bool has_kappa = prior.has_kappa();
  return [=](Rng& rng) -> Eigen::VectorXd {
    Eigen::VectorXd nu(mean.size());
    for (long attempt = 0; attempt < 1000000; ++attempt) {
      for (int i = 0; i < nu.size(); ++i) nu[i] = mean[i] + std_dev[i] * rng.normal();
      if (is_admissible(unpack(nu, shapes, modes, has_kappa))) return nu;
    }
    throw SamplerInitError(
        "truncated prior sampler: no admissible draw in 1e6 attempts");
  };
}

Eigen::MatrixXd Ensemble::walker_chain(int w) const {
  Eigen::MatrixXd chain(dim, steps + 1);
  for (int k = 0; k <= steps; ++k)
    chain.col(k) = states.col(static_cast<long>(k) * walkers + w);
  return chain;
}

Ensemble run_ensemble(const std::function<double(const Eigen::VectorXd&)>& log_target,
                      const std::function<Eigen::VectorXd(Rng&)>& init,
                      const ChainConfig& config) {
  const int W = config.walkers;
  const int K = config.steps;
  if (W < 3) throw std::invalid_argument("run_ensemble: need at least 3 walkers");
  if (config.stretch <= 1.0) throw std::invalid_argument("run_ensemble: stretch must be > 1");

  Rng rng(config.seed);
  Eigen::VectorXd first = init(rng);
  const int d = static_cast<int>(first.size());
  if (W <= 2 * d)
    throw std::invalid_argument("run_ensemble: walker count must exceed twice the dimension");

  Ensemble ens;
  ens.walkers = W;
  ens.steps = K;
  ens.dim = d;
  ens.states.resize(d, static_cast<long>(W) * (K + 1));
  ens.log_density.resize(static_cast<long>(W) * (K + 1));

  // Initialization: redraw while the target is -inf (capped attempts).
  Eigen::MatrixXd x(d, W);
  Eigen::VectorXd logp = Eigen::VectorXd::Constant(W, neg_inf);
  x.col(0) = first;
  for (int w = 1; w < W; ++w) x.col(w) = init(rng);
  long attempts = 0;
  while (true) {
    std::vector<int> pending;
    for (int w = 0; w < W; ++w)
      if (!std::isfinite(logp[w]) || attempts == 0) pending.push_back(w);
    // first pass evaluates everyone; later passes only failed slots
    if (attempts > 0) {
      for (int w : pending) x.col(w) = init(rng);
    }
    parallel_for(
        pending.size(), [&](std::size_t i) { logp[pending[i]] = log_target(x.col(pending[i])); },
        config.threads);
    bool all_ok = true;
    for (int w = 0; w < W; ++w) all_ok = all_ok && std::isfinite(logp[w]);
    if (all_ok) break;
    attempts += static_cast<long>(pending.size());
    if (attempts > 1000000)
      throw SamplerInitError("run_ensemble: could not initialize walkers in the target support");
  }

  ens.states.leftCols(W) = x;
  ens.log_density.head(W) = logp;

  const double a = config.stretch;
  std::vector<int> partner(W);
  std::vector<double> zval(W), logr(W);
  Eigen::MatrixXd proposals(d, W);
  Eigen::VectorXd prop_logp(W);

  for (int k = 0; k < K; ++k) {
    // All random draws happen sequentially; evaluations are order-free.
    for (int w = 0; w < W; ++w) {
      int idx = static_cast<int>(rng.integer(W - 1));
      if (idx >= w) ++idx;
      partner[w] = idx;
      const double u = rng.uniform();
      const double root = ((a - 1.0) * u + 1.0);
      zval[w] = root * root / a;
      logr[w] = std::log(std::max(rng.uniform(), 1e-300));
    }
    for (int w = 0; w < W; ++w) {
      proposals.col(w) =
          x.col(partner[w]) + zval[w] * (x.col(w) - x.col(partner[w]));
    }
    parallel_for(
        W, [&](std::size_t w) { prop_logp[w] = log_target(proposals.col(w)); },
        config.threads);
    for (int w = 0; w < W; ++w) {
      ++ens.proposals;
      if (prop_logp[w] == neg_inf) continue;
      const double log_s = (d - 1) * std::log(zval[w]) + prop_logp[w] - logp[w];
      if (logr[w] <= log_s) {
        x.col(w) = proposals.col(w);
        logp[w] = prop_logp[w];
        ++ens.accepted;
      }
    }
    ens.states.middleCols(static_cast<long>(k + 1) * W, W) = x;
    ens.log_density.segment(static_cast<long>(k + 1) * W, W) = logp;
  }
  return ens;
}

SampleSet to_sample_set(const Ensemble& ensemble, long burn_in, int shapes, int modes,
                        bool has_kappa) {
  const long total = ensemble.total_samples();
  if (burn_in < 0 || burn_in >= total)
    throw std::invalid_argument("to_sample_set: burn-in out of range");
  const long retained = total - burn_in;
  SampleSet set;
  set.count = static_cast<int>(retained);
  set.shapes = shapes;
  set.modes = modes;
  set.has_kappa = has_kappa;
  set.samples = ensemble.states.rightCols(retained);
  set.log_density = ensemble.log_density.tail(retained);
  set.admissible.assign(retained, 1);  // the truncated prior keeps states admissible
  return set;
}

GelmanRubin gelman_rubin(const std::vector<Eigen::MatrixXd>& chains) {
  if (chains.size() < 2)
    throw std::invalid_argument("gelman_rubin: need at least two chains");
  const int m = static_cast<int>(chains.size());
  const int dim = static_cast<int>(chains[0].rows());
  const long n = chains[0].cols();
  if (n < 10) throw std::invalid_argument("gelman_rubin: chains too short");
  for (const auto& c : chains)
    if (c.rows() != dim || c.cols() != n)
      throw std::invalid_argument("gelman_rubin: inconsistent chain shapes");

  GelmanRubin out;
  out.rhat.resize(dim);
  out.degenerate.assign(dim, 0);
  for (int p = 0; p < dim; ++p) {
    Eigen::VectorXd means(m), vars(m);
    for (int c = 0; c < m; ++c) {
      const Eigen::VectorXd row = chains[c].row(p);
      const double mean = row.mean();
      means[c] = mean;
      vars[c] = (row.array() - mean).square().sum() / (n - 1);
    }
    const double w = vars.mean();
    const double grand = means.mean();
    const double b_over_n = (means.array() - grand).square().sum() / (m - 1);
    // zero within-chain variance up to accumulation roundoff
    if (w <= 1e-14 * std::max(1.0, grand * grand)) {
      out.rhat[p] = 1.0;
      out.degenerate[p] = 1;
      continue;
    }
    const double var_plus = (static_cast<double>(n - 1) / n) * w + b_over_n;
    out.rhat[p] = std::sqrt(var_plus / w);
  }
  return out;
}

GelmanRubin gelman_rubin(const Ensemble& ensemble, int discard_steps) {
  std::vector<Eigen::MatrixXd> chains;
  chains.reserve(ensemble.walkers);
  for (int w = 0; w < ensemble.walkers; ++w) {
    Eigen::MatrixXd chain = ensemble.walker_chain(w);
    chains.push_back(chain.rightCols(chain.cols() - discard_steps));
  }
  return gelman_rubin(chains);
}

}  // namespace iscat
