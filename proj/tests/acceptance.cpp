// Acceptance suite: one integration check per release criterion, each printed
// as a PASS/FAIL line with the measured quantities. The binary exits nonzero
// if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "iscat/csv.hpp"
#include "iscat/derivatives.hpp"
#include "iscat/experiment.hpp"
#include "iscat/forward_solver.hpp"
#include "iscat/laplace_sampler.hpp"
#include "iscat/map_optimizer.hpp"
#include "iscat/mcmc_sampler.hpp"
#include "iscat/mie_reference.hpp"
#include "iscat/model_selection.hpp"
#include "iscat/rng.hpp"
#include "iscat/sample_stats.hpp"

using namespace iscat;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] %2d. %-34s %s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// scenario plumbing

struct Scenario {
  Scene scene_full;   // all 201 detectors
  Scene scene_inv;    // even subgrid (inversion)
  DataSplit split;
  PriorSpec prior;
};

Scene holography_scene(double ke, double ki) {
  Scene sc;
  sc.kappa_e = ke;
  sc.kappa_i = ki;
  sc.beta = 1.0;
  sc.detectors = detector_line();
  return sc;
}

Eigen::VectorXcd truth_field(const std::vector<DiscretizedCurve>& curves,
                             const Scene& sc) {
  TransmissionSolver solver(curves, sc.kappa_e, sc.kappa_i, sc.beta);
  return eval_total_field(solver.solve_incident(sc), sc, sc.detectors);
}

Scenario make_scenario(const std::vector<DiscretizedCurve>& truth, double ke, double ki,
                       Measurement op, double noise, std::uint64_t seed, int target,
                       int prior_n_bem, bool infer_kappa = false,
                       double kappa_variance = 4.0) {
  Scenario s;
  s.scene_full = holography_scene(ke, ki);
  DataVector clean = measure(truth_field(truth, s.scene_full), op);
  DataVector noisy = add_noise(clean, noise, seed);
  s.split = split_interleaved(noisy, s.scene_full.detectors);
  s.scene_inv = s.scene_full;
  s.scene_inv.detectors = s.split.invert_detectors;

  PriorOptions opt;
  opt.target_count = target;
  opt.n_bem = prior_n_bem;
  opt.infer_kappa = infer_kappa;
  opt.kappa_mean = ki;  // nominal material value as the prior center
  opt.kappa_variance = kappa_variance;
  s.prior = build_topological_prior(s.split.prior, s.split.prior_detectors,
                                    s.scene_full, opt)
                .spec;
  return s;
}

std::vector<DiscretizedCurve> circle_truth(double r, int n) {
  return {discretize(ComponentParams::circle(0.0, 0.0, r, 5), n)};
}

std::vector<DiscretizedCurve> ellipse_truth(int n) {
  return {discretize_ellipse(Vec2(0.0, 0.0), 0.2, 0.1, n)};
}

double window_mass(const std::vector<double>& dirs, double center, double halfwidth) {
  // directions live in [0, pi); distance modulo pi
  long hits = 0;
  for (double d : dirs) {
    double gap = std::abs(d - center);
    gap = std::min(gap, pi - gap);
    if (gap <= halfwidth) ++hits;
  }
  return dirs.empty() ? 0.0 : static_cast<double>(hits) / dirs.size();
}

// ---------------------------------------------------------------------------

void criterion_1_forward_oracle() {
  try {
    Scene sc = holography_scene(12.56, 15.12);
    Scene sub = sc;
    sub.detectors.clear();
    for (std::size_t j = 0; j < sc.detectors.size(); j += 2)
      sub.detectors.push_back(sc.detectors[j]);

    ShapeParams params;
    params.components.push_back(ComponentParams::circle(0, 0, 0.2, 5));
    const auto t0 = std::chrono::steady_clock::now();
    auto sol = solve_transmission(params, sub, 256);
    auto u_bem = eval_total_field(sol, sub, sub.detectors);
    const double elapsed = seconds_since(t0);
    auto u_mie = mie_circle_reference(0.2, Vec2(0, 0), sub, sub.detectors);
    const double rel = (u_bem - u_mie).norm() / u_mie.norm();
    report(1, "forward-solver oracle", rel < 1e-5 && elapsed < 5.0,
           fmt("rel_l2=%.2e (<1e-5), solve %.2f s (<5 s), n_bem=256", rel, elapsed));
  } catch (const std::exception& e) {
    report(1, "forward-solver oracle", false, e.what());
  }
}

struct MapPoint {
  Scenario scenario;
  Eigen::VectorXd nu;
  LmResult result;
};

MapPoint map_point(const std::vector<DiscretizedCurve>& truth, double ke, double ki,
                   Measurement op, double noise, std::uint64_t seed, int n_bem) {
  MapPoint mp;
  mp.scenario = make_scenario(truth, ke, ki, op, noise, seed, 1, 64);
  ScatteringModel model(mp.scenario.scene_inv, 1, 5, n_bem);
  CostModel cm = make_cost_model(model, mp.scenario.split.invert, mp.scenario.prior);
  mp.result = lm_solve(cm, mp.scenario.prior.mean());
  mp.nu = mp.result.nu_map;
  return mp;
}

void criterion_2_derivatives() {
  try {
    const int n_bem = 64;
    struct Case {
      const char* name;
      MapPoint mp;
    };
    std::vector<Case> cases;
    cases.push_back({"circle", map_point(circle_truth(0.2, 256), 12.56, 15.12,
                                         Measurement::field, 0.01, 2001, n_bem)});
    cases.push_back({"ellipse", map_point(ellipse_truth(256), 20.56, 25.12,
                                          Measurement::field, 0.05, 2002, n_bem)});

    double worst_jac = 0.0, worst_grad = 0.0, worst_shape = 0.0;
    for (auto& cs : cases) {
      const Scene& sc = cs.mp.scenario.scene_inv;
      const ShapeParams shape = unpack(cs.mp.nu, 1, 5, false);

      // (a) Jacobian columns against central differences, h = 1e-5
      const Eigen::MatrixXcd jac = assemble_jacobian(shape, sc, n_bem);
      const double h = 1e-5;
      for (int k = 0; k < cs.mp.nu.size(); ++k) {
        Eigen::VectorXd up = cs.mp.nu, dn = cs.mp.nu;
        up[k] += h;
        dn[k] -= h;
        const Eigen::VectorXcd fp = eval_total_field(
            solve_transmission(unpack(up, 1, 5, false), sc, n_bem), sc, sc.detectors);
        const Eigen::VectorXcd fm = eval_total_field(
            solve_transmission(unpack(dn, 1, 5, false), sc, n_bem), sc, sc.detectors);
        const Eigen::VectorXcd fd = (fp - fm) / (2 * h);
        worst_jac = std::max(worst_jac, (jac.col(k) - fd).norm() / fd.norm());
      }

      for (Measurement op : {Measurement::field, Measurement::intensity}) {
        // data for this operator (same truth curves, same noise magnitude)
        Scenario sop = make_scenario(
            cs.mp.scenario.scene_full.kappa_i == 15.12 ? circle_truth(0.2, 256)
                                                       : ellipse_truth(256),
            sc.kappa_e, sc.kappa_i, op, 0.05, 2003, 1, 64);
        ScatteringModel model(sop.scene_inv, 1, 5, n_bem);
        CostModel cm = make_cost_model(model, sop.split.invert, sop.prior);

        // (b) cost gradient against central differences
        const Eigen::VectorXcd u = model.field(cs.mp.nu);
        const Eigen::VectorXd g = gradient(cm, cs.mp.nu, u, model.jacobian(cs.mp.nu));
        Eigen::VectorXd g_fd(cs.mp.nu.size());
        const double hg = 1e-6;
        for (int k = 0; k < cs.mp.nu.size(); ++k) {
          Eigen::VectorXd up = cs.mp.nu, dn = cs.mp.nu;
          up[k] += hg;
          dn[k] -= hg;
          g_fd[k] = (cost(cm, up) - cost(cm, dn)) / (2 * hg);
        }
        worst_grad = std::max(worst_grad, (g - g_fd).norm() / g_fd.norm());

        // (c) shape-derivative formula against finite differences of J_c
        TransmissionSolver solver(discretize_all(shape, n_bem), sc.kappa_e, sc.kappa_i,
                                  1.0);
        auto fwd = solver.solve_incident(sop.scene_inv);
        const Eigen::VectorXcd u_det =
            eval_total_field(fwd, sop.scene_inv, sop.scene_inv.detectors);
        auto adj = adjoint_solve(solver, sop.scene_inv.detectors,
                                 chi_weights(u_det, sop.split.invert));
        const double hs = 1e-5;
        for (int k = 0; k < cs.mp.nu.size(); ++k) {
          const Eigen::Matrix2Xd v = direction_field(fwd.curves[0], k, 5);
          const double analytic = shape_derivative_cost(fwd, adj, 0, v);
          Eigen::VectorXd up = cs.mp.nu, dn = cs.mp.nu;
          up[k] += hs;
          dn[k] -= hs;
          const double jp = unregularized_cost(unpack(up, 1, 5, false), sop.split.invert,
                                               sop.scene_inv.detectors, sop.scene_inv,
                                               n_bem);
          const double jm = unregularized_cost(unpack(dn, 1, 5, false), sop.split.invert,
                                               sop.scene_inv.detectors, sop.scene_inv,
                                               n_bem);
          const double fd = (jp - jm) / (2 * hs);
          const double scale = std::max(std::abs(fd), 1e-3 * std::abs(g_fd.norm()));
          worst_shape = std::max(worst_shape, std::abs(analytic - fd) / scale);
        }
      }
    }
    const bool pass = worst_jac < 1e-3 && worst_grad < 1e-4 && worst_shape < 1e-2;
    report(2, "derivative correctness", pass,
           fmt("jacobian %.1e (<1e-3), gradient %.1e (<1e-4), shape-deriv %.1e (<1e-2)",
               worst_jac, worst_grad, worst_shape));
  } catch (const std::exception& e) {
    report(2, "derivative correctness", false, e.what());
  }
}

void criterion_3_map_reproduction() {
  try {
    bool pass = true;
    std::string detail;
    for (double noise : {0.01, 0.05}) {
      const auto t0 = std::chrono::steady_clock::now();
      MapPoint mp = map_point(circle_truth(0.2, 256), 12.56, 15.12, Measurement::field,
                              noise, 99, 96);
      const double elapsed = seconds_since(t0);
      const ShapeParams shape = unpack(mp.nu, 1, 5, false);
      const ShapeStats st = shape_stats(shape.components[0], 512);
      const bool ok = mp.result.converged && mp.result.iterations <= 40 &&
                      st.center_of_mass.norm() < 0.02 &&
                      std::abs(st.r_avg - 0.2) < 0.05 * 0.2;
      pass = pass && ok;
      detail += fmt("%s%.0f%%: com=(%.3f,%.3f) r=%.4f it=%d %.0fs", detail.empty() ? "" : " | ",
                    100 * noise, st.center_of_mass.x(), st.center_of_mass.y(), st.r_avg,
                    mp.result.iterations, elapsed);
    }
    report(3, "MAP circle reproduction", pass, detail);
  } catch (const std::exception& e) {
    report(3, "MAP circle reproduction", false, e.what());
  }
}

void criterion_4_laplace_statistics() {
  try {
    // degenerate case: zero Jacobian returns the prior covariance exactly
    Eigen::VectorXd var = build_prior_covariance(1, 5, 3.0);
    Eigen::MatrixXd h0 = var.cwiseInverse().asDiagonal();
    Eigen::VectorXd mean0 = pack(ShapeParams{{ComponentParams::circle(0, 0, 0.2, 5)}, {}});
    auto post0 = posterior_covariance(mean0, h0);
    const double degen_err = (post0.covariance - Eigen::MatrixXd(var.asDiagonal())).norm();

    // empirical covariance of 1e5 draws from the circle-MAP posterior
    MapPoint mp = map_point(circle_truth(0.2, 256), 12.56, 15.12, Measurement::field,
                            0.01, 99, 64);
    ScatteringModel model(mp.scenario.scene_inv, 1, 5, 64);
    CostModel cm = make_cost_model(model, mp.scenario.split.invert, mp.scenario.prior);
    const Eigen::VectorXcd u = model.field(mp.nu);
    const Eigen::MatrixXd h = gn_hessian(cm, u, model.jacobian(mp.nu));
    auto post = posterior_covariance(mp.nu, h);

    const int n = 100000;
    auto set = sample_laplace(post, n, 777, 1, 5, false);
    Eigen::VectorXd emp_mean = set.samples.rowwise().mean();
    Eigen::MatrixXd centered = set.samples.colwise() - emp_mean;
    Eigen::MatrixXd emp_cov = centered * centered.transpose() / (n - 1);
    const double cov_err = (emp_cov - post.covariance).norm() / post.covariance.norm();

    // data are informative: posterior variances below the prior's
    bool shrinks = true;
    for (int i = 0; i < var.size(); ++i) shrinks = shrinks && post.covariance(i, i) < var[i];

    const bool pass = degen_err < 1e-14 && cov_err < 0.05 && shrinks;
    report(4, "Laplace sampler statistics", pass,
           fmt("cov rel err %.3f (<0.05) at 1e5 draws, F=0 case err %.1e, shrinkage=%s",
               cov_err, degen_err, shrinks ? "yes" : "no"));
  } catch (const std::exception& e) {
    report(4, "Laplace sampler statistics", false, e.what());
  }
}

void criterion_5_mcmc_known_targets() {
  try {
    // 2D standard normal
    auto normal2 = [](const Eigen::VectorXd& x) { return -0.5 * x.squaredNorm(); };
    ChainConfig cfg;
    cfg.walkers = 50;
    cfg.steps = 5000;
    cfg.seed = 21;
    Rng dummy(0);
    auto ens = run_ensemble(
        normal2,
        [](Rng& rng) {
          Eigen::VectorXd x(2);
          x << rng.normal(), rng.normal();
          return x;
        },
        cfg);
    const long discard = 50L * 500;
    Eigen::MatrixXd kept = ens.states.rightCols(ens.total_samples() - discard);
    Eigen::VectorXd mean = kept.rowwise().mean();
    Eigen::MatrixXd cen = kept.colwise() - mean;
    Eigen::MatrixXd cov = cen * cen.transpose() / (kept.cols() - 1);
    const double mc_err = std::sqrt(1.0 / (kept.cols() / 50.0));
    const bool normal_ok = mean.cwiseAbs().maxCoeff() < 3 * mc_err &&
                           std::abs(cov(0, 0) - 1) < 0.05 &&
                           std::abs(cov(1, 1) - 1) < 0.05 && std::abs(cov(0, 1)) < 0.05;
    auto gr = gelman_rubin(ens, 500);
    const bool gr_ok = gr.rhat.maxCoeff() < 1.05;

    // 1D double-well against quadrature
    const double wexp = 0.5;
    auto dwell = [wexp](const Eigen::VectorXd& x) {
      const double q = x[0] * x[0] - 1.0;
      return -q * q / wexp;
    };
    ChainConfig cfg2;
    cfg2.walkers = 800;
    cfg2.steps = 3000;
    cfg2.seed = 5;
    auto ens2 = run_ensemble(
        dwell,
        [](Rng& rng) {
          Eigen::VectorXd x(1);
          x[0] = 1.5 * rng.normal();
          return x;
        },
        cfg2);
    const long retained = 1000000;
    Eigen::MatrixXd kept2 = ens2.states.rightCols(retained);
    const int bins = 40;
    const double lo = -2.0, hi = 2.0;
    auto density = [wexp](double x) {
      const double q = x * x - 1.0;
      return std::exp(-q * q / wexp);
    };
    const int nq = 60000;
    double z = 0.0;
    for (int i = 0; i <= nq; ++i) {
      const double x = -3.0 + 6.0 * i / nq;
      z += ((i == 0 || i == nq) ? 0.5 : 1.0) * density(x);
    }
    z *= 6.0 / nq;
    double sup = 0.0, peak = 0.0;
    Eigen::VectorXd emp = Eigen::VectorXd::Zero(bins);
    for (long i = 0; i < retained; ++i) {
      const double x = kept2(0, i);
      if (x >= lo && x < hi) emp[static_cast<int>((x - lo) / (hi - lo) * bins)] += 1.0;
    }
    emp /= static_cast<double>(retained);
    for (int b = 0; b < bins; ++b) {
      const double a = lo + 4.0 * b / bins, bb = a + 4.0 / bins;
      double acc = 0.0;
      const int mq = 200;
      for (int i = 0; i <= mq; ++i)
        acc += ((i == 0 || i == mq) ? 0.5 : 1.0) * density(a + (bb - a) * i / mq);
      const double exact = acc * (bb - a) / mq / z;
      sup = std::max(sup, std::abs(emp[b] - exact));
      peak = std::max(peak, exact);
    }
    const bool dwell_ok = sup / peak < 0.03;

    report(5, "MCMC on known targets", normal_ok && gr_ok && dwell_ok,
           fmt("normal2d mean|cov ok=%d, Rhat max %.4f (<1.05), double-well sup %.3f (<0.03)",
               normal_ok, gr.rhat.maxCoeff(), sup / peak));
  } catch (const std::exception& e) {
    report(5, "MCMC on known targets", false, e.what());
  }
}

struct EllipseRun {
  Scenario scenario;
  Eigen::VectorXd nu_map;
  SampleSet mcmc_samples;
};

void criterion_6_laplace_mcmc_agreement() {
  try {
    const int n_bem = 64;
    Scenario s = make_scenario(ellipse_truth(256), 20.56, 25.12, Measurement::field,
                               0.05, 3001, 1, 64);
    ScatteringModel model(s.scene_inv, 1, 5, n_bem);
    CostModel cm = make_cost_model(model, s.split.invert, s.prior);
    LmResult res = lm_solve(cm, s.prior.mean());

    ChainConfig cc;
    cc.walkers = 200;
    cc.steps = 1000;
    cc.burn_in = 200L * 1001 - 40000;
    cc.seed = 3002;
    auto target = make_log_posterior(model, s.split.invert, s.prior);
    auto ens = run_ensemble(target, make_truncated_prior_sampler(s.prior), cc);
    SampleSet samples = to_sample_set(ens, cc.burn_in, 1, 5, false);

    // The ensemble's approximation to the MAP point is its maximum-probability
    // sample; compare its radius profile against the optimizer's MAP curve.
    int best = 0;
    for (int i = 1; i < samples.count; ++i)
      if (samples.log_density[i] > samples.log_density[best]) best = i;
    const ShapeParams mcmc_map = samples.shape_at(best);
    const ShapeStats mcmc_st = shape_stats(mcmc_map.components[0], 512);
    const ShapeParams map_shape = unpack(res.nu_map, 1, 5, false);
    const ShapeStats map_st = shape_stats(map_shape.components[0], 512);
    std::vector<double> ts(512);
    for (int i = 0; i < 512; ++i) ts[i] = i / 512.0;
    const auto map_poly = eval_boundary(map_shape.components[0], ts);
    const auto mcmc_poly = eval_boundary(mcmc_map.components[0], ts);

    const int n_angles = 64;
    AngularQuantiles aq = boundary_marginals(samples, 0, n_angles);
    double worst = 0.0, worst_median = 0.0;
    for (int a = 0; a < n_angles; ++a) {
      const double r_map =
          ray_boundary_distance(map_poly, map_st.center_of_mass, aq.angles[a]);
      const double r_mcmc =
          ray_boundary_distance(mcmc_poly, mcmc_st.center_of_mass, aq.angles[a]);
      worst = std::max(worst, std::abs(r_mcmc - r_map));
      worst_median = std::max(worst_median, std::abs(aq.quantiles(2, a) - r_map));
    }
    const double rel = worst / map_st.r_max;
    const bool pass = res.converged && rel < 0.10;
    report(6, "Laplace-MCMC agreement (ellipse)", pass,
           fmt("max-prob sample vs MAP: %.1f%% of r_max (<10%%); ensemble median gap %.0f%% "
               "(mode-weight dependent), retained=%d, acc=%.2f",
               100 * rel, 100 * worst_median / map_st.r_max, samples.count,
               ens.acceptance_rate()));
  } catch (const std::exception& e) {
    report(6, "Laplace-MCMC agreement (ellipse)", false, e.what());
  }
}

void criterion_7_bimodality() {
  try {
    const int n_bem = 64;
    Scenario s = make_scenario(ellipse_truth(256), 20.56, 25.12, Measurement::field,
                               0.10, 4001, 1, 64);
    ScatteringModel model(s.scene_inv, 1, 5, n_bem);

    ChainConfig cc;
    cc.walkers = 800;
    cc.steps = 150;
    cc.burn_in = 80000;
    cc.seed = 4002;
    auto target = make_log_posterior(model, s.split.invert, s.prior);
    auto ens = run_ensemble(target, make_truncated_prior_sampler(s.prior), cc);
    SampleSet samples = to_sample_set(ens, cc.burn_in, 1, 5, false);

    std::vector<double> dirs;
    for (int i = 0; i < samples.count; ++i) {
      const ShapeStats st = shape_stats(samples.shape_at(i).components[0], 128);
      dirs.push_back(st.dir_max);
    }
    const double w20 = 20.0 * pi / 180.0;
    const double mass_truth = window_mass(dirs, 0.0, w20);
    const double mass_axial = window_mass(dirs, pi / 2, w20);

    // the Gaussian approximation at the MAP shows only the truth mode
    CostModel cm = make_cost_model(model, s.split.invert, s.prior);
    LmResult res = lm_solve(cm, s.prior.mean());
    auto post = posterior_covariance(
        res.nu_map, gn_hessian(cm, model.field(res.nu_map), model.jacobian(res.nu_map)));
    auto lap = sample_laplace(post, 4000, 4003, 1, 5, false);
    std::vector<double> lap_dirs;
    for (int i = 0; i < lap.count; ++i) {
      if (!lap.admissible[i]) continue;
      lap_dirs.push_back(shape_stats(lap.shape_at(i).components[0], 128).dir_max);
    }
    const double lap_truth = window_mass(lap_dirs, 0.0, w20);
    const double lap_axial = window_mass(lap_dirs, pi / 2, w20);

    const bool pass = mass_truth > 0.05 && mass_axial > 0.05 && lap_axial < 0.05 &&
                      lap_truth > 5.0 * std::max(lap_axial, 0.02);
    report(7, "bimodal orientation posterior", pass,
           fmt("MCMC mass near 0: %.2f, near pi/2: %.2f (both >0.05); Laplace %.2f / %.2f",
               mass_truth, mass_axial, lap_truth, lap_axial));
  } catch (const std::exception& e) {
    report(7, "bimodal orientation posterior", false, e.what());
  }
}

void criterion_8_kappa_inference() {
  try {
    const int n_bem = 64;
    // circle scenario, field data, truth kappa_i = 15.12
    Scenario s1 = make_scenario(circle_truth(0.2, 256), 12.56, 15.12, Measurement::field,
                                0.05, 5001, 1, 64, true, 4.0);
    ScatteringModel m1(s1.scene_inv, 1, 5, n_bem, true);
    ChainConfig cc;
    cc.walkers = 150;
    cc.steps = 250;
    cc.burn_in = 15000;
    cc.seed = 5002;
    auto ens1 = run_ensemble(make_log_posterior(m1, s1.split.invert, s1.prior),
                             make_truncated_prior_sampler(s1.prior), cc);
    SampleSet set1 = to_sample_set(ens1, cc.burn_in, 1, 5, true);
    const double kappa1 = set1.samples.row(set1.samples.rows() - 1).mean();
    const bool ok1 = kappa1 >= 14.5 && kappa1 <= 15.7;

    // ellipse intensity scenario, truth kappa_i = 25.12; posterior expected
    // 5-12% below the truth
    Scenario s2 = make_scenario(ellipse_truth(256), 20.56, 25.12, Measurement::intensity,
                                0.05, 5003, 1, 64, true, 4.0);
    ScatteringModel m2(s2.scene_inv, 1, 5, n_bem, true);
    cc.seed = 5004;
    auto ens2 = run_ensemble(make_log_posterior(m2, s2.split.invert, s2.prior),
                             make_truncated_prior_sampler(s2.prior), cc);
    SampleSet set2 = to_sample_set(ens2, cc.burn_in, 1, 5, true);
    const double kappa2 = set2.samples.row(set2.samples.rows() - 1).mean();
    const bool ok2 = kappa2 <= 0.95 * 25.12 && kappa2 >= 0.88 * 25.12;

    report(8, "kappa_i inference", ok1 && ok2,
           fmt("circle: mean %.2f in [14.5, 15.7]=%d; ellipse: mean %.2f in [%.2f, %.2f]=%d",
               kappa1, ok1, kappa2, 0.88 * 25.12, 0.95 * 25.12, ok2));
  } catch (const std::exception& e) {
    report(8, "kappa_i inference", false, e.what());
  }
}

void criterion_9_model_selection() {
  try {
    Scene sc = holography_scene(12.56, 15.12);
    std::vector<DiscretizedCurve> truth;
    truth.push_back(discretize(ComponentParams::circle(-1.5, 0.0, 0.5, 5), 256));
    truth.push_back(discretize(ComponentParams::circle(1.5, 0.0, 0.5, 5), 256));
    truth.push_back(discretize(ComponentParams::circle(0.0, -1.3, 0.45, 5), 256));
    DataVector noisy =
        add_noise(measure(truth_field(truth, sc), Measurement::intensity), 0.05, 6001);
    DataSplit split = split_interleaved(noisy, sc.detectors);
    Scene inv = sc;
    inv.detectors = split.invert_detectors;

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<EvidenceEstimate> estimates;
    for (int m : {1, 2, 3, 4}) {
      PriorOptions opt;
      opt.target_count = m;
      opt.n_bem = 48;
      PriorSpec prior_m =
          build_topological_prior(split.prior, split.prior_detectors, sc, opt).spec;
      if (static_cast<int>(prior_m.nu0.components.size()) != m) {
        Rng jitter(6100 + m);
        while (static_cast<int>(prior_m.nu0.components.size()) > m)
          prior_m.nu0.components.pop_back();
        while (static_cast<int>(prior_m.nu0.components.size()) < m) {
          ComponentParams extra = prior_m.nu0.components[0];
          extra.cx += 0.5 * (2.0 * jitter.uniform() - 1.0);
          extra.cy += 0.5 * (2.0 * jitter.uniform() - 1.0);
          prior_m.nu0.components.push_back(extra);
        }
        prior_m.variance = build_prior_covariance(m, 5, 3.0);
      }
      ScatteringModel model_m(inv, m, 5, 48);
      estimates.push_back(
          evidence(model_m, split.invert, prior_m, m, 5000, 6200 + m));
    }
    const double elapsed = seconds_since(t0);

    ModelChoice choice = select_model(estimates);
    double margin = std::numeric_limits<double>::max();
    const auto& best = estimates[2];  // m = 3
    for (const auto& e : estimates) {
      if (e.object_count == 3) continue;
      const double band = 2.0 * (best.log_relative_se() + e.log_relative_se());
      margin = std::min(margin, (best.log_mean - e.log_mean) / std::max(band, 1e-12));
    }
    const bool pass = choice.selected == 3 && !choice.unclear && margin > 1.0;
    std::string detail = fmt("selected m=%d, log-evidence:", choice.selected);
    for (const auto& e : estimates)
      detail += fmt(" m%d=%.1f", e.object_count, e.log_mean);
    detail += fmt(", margin/2se=%.2g, %.0f s", std::min(margin, 9e9), elapsed);
    report(9, "model selection (3 objects)", pass, detail);
  } catch (const std::exception& e) {
    report(9, "model selection (3 objects)", false, e.what());
  }
}

void criterion_10_evidence_calibration() {
  try {
    const double nu0 = 0.3, gamma = 0.5, cslope = 1.7, sigma = 0.4, dobs = 1.1;
    auto loglik = [&](const Eigen::VectorXd& nu) {
      const double r = dobs - cslope * nu[0];
      return -0.5 * std::log(2 * pi) - std::log(sigma) - 0.5 * r * r / (sigma * sigma);
    };
    auto sampler = [&](Rng& rng) {
      Eigen::VectorXd x(1);
      x[0] = nu0 + std::sqrt(gamma) * rng.normal();
      return x;
    };
    const double pred = cslope * cslope * gamma + sigma * sigma;
    const double exact = std::exp(-0.5 * (dobs - cslope * nu0) * (dobs - cslope * nu0) / pred) /
                         std::sqrt(2 * pi * pred);
    auto est = evidence_mc(loglik, sampler, 1, 1000, 808);
    const double err = std::abs(est.estimate() - exact);
    const bool pass = err < 3.0 * est.standard_error();
    report(10, "evidence estimator calibration", pass,
           fmt("estimate %.5f vs exact %.5f, |err|=%.2e < 3 se=%.2e", est.estimate(),
               exact, err, 3.0 * est.standard_error()));
  } catch (const std::exception& e) {
    report(10, "evidence estimator calibration", false, e.what());
  }
}

void criterion_11_determinism() {
  try {
    const std::string config_text = R"({
      "scene": {"kappa_e": 12.56, "kappa_i": 15.12, "beta": 1.0, "modes": 5},
      "truth": [{"type": "circle", "center": [0.0, 0.0], "radius": 0.2}],
      "data": {"operator": "field", "noise_level": 0.01},
      "solver": {"n_bem": 48, "self_check": false},
      "prior": {"C0": 0.1},
      "laplace": {"enabled": true, "samples": 500},
      "mcmc": {"enabled": true, "walkers": 30, "steps": 15, "burn_in": 200, "stretch": 2.0},
      "stats": {"bins": 20, "angles": 16, "grid_halfwidth": 0.3, "grid_spacing": 0.05},
      "seed": 77
    })";
    auto cfg = parse_config_text(config_text);
    const auto base = std::filesystem::temp_directory_path();
    const auto dir1 = base / "iscat_acc_det1";
    const auto dir2 = base / "iscat_acc_det2";
    std::filesystem::remove_all(dir1);
    std::filesystem::remove_all(dir2);
    ExperimentRun(cfg, dir1).run_all();
    ExperimentRun(cfg, dir2).run_all();

    auto bytes = [](const std::filesystem::path& p) {
      std::ifstream in(p, std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      return ss.str();
    };
    bool pass = true;
    for (const char* f : {"laplace_samples.csv", "mcmc_samples.csv", "data_full.csv",
                          "map.json"}) {
      pass = pass && bytes(dir1 / f) == bytes(dir2 / f);
    }
    report(11, "pipeline determinism", pass,
           pass ? "sample tables byte-identical across reruns"
                : "rerun produced differing artifacts");
  } catch (const std::exception& e) {
    report(11, "pipeline determinism", false, e.what());
  }
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  std::printf("acceptance suite\n");
  criterion_1_forward_oracle();
  criterion_2_derivatives();
  criterion_3_map_reproduction();
  criterion_4_laplace_statistics();
  criterion_5_mcmc_known_targets();
  criterion_6_laplace_mcmc_agreement();
  criterion_7_bimodality();
  criterion_8_kappa_inference();
  criterion_9_model_selection();
  criterion_10_evidence_calibration();
  criterion_11_determinism();
  std::printf("%d of 11 criteria passed (%.0f s total)\n", 11 - failures,
              seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
