#include "iscat/topological_prior.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "iscat/forward_solver.hpp"
#include "iscat/special_functions.hpp"

namespace iscat {

Eigen::VectorXcd chi_weights(const Eigen::VectorXcd& u_det, const DataVector& data) {
  if (u_det.size() != data.values.size())
    throw std::invalid_argument("chi_weights: size mismatch");
  Eigen::VectorXcd chi(u_det.size());
  for (Eigen::Index j = 0; j < u_det.size(); ++j) {
    const cdouble fu = apply_operator(u_det[j], data.op);
    const cdouble resid = std::conj(data.values[j] - fu);
    chi[j] = data.op == Measurement::field ? resid : resid * 2.0 * std::conj(u_det[j]);
  }
  return chi;
}

AdjointIncident adjoint_incident_field(const Eigen::VectorXcd& chi,
                                       const std::vector<Vec2>& detectors,
                                       double kappa_e, const std::vector<Vec2>& points) {
  if (static_cast<std::size_t>(chi.size()) != detectors.size())
    throw std::invalid_argument("adjoint_incident_field: chi/detector size mismatch");
  AdjointIncident adj;
  adj.value = Eigen::VectorXcd::Zero(points.size());
  adj.gradient = Eigen::Matrix2Xcd::Zero(2, points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    cdouble val = 0.0;
    Eigen::Vector2cd grad = Eigen::Vector2cd::Zero();
    for (std::size_t j = 0; j < detectors.size(); ++j) {
      const Vec2 diff = points[p] - detectors[j];
      const double r = diff.norm();
      if (r < 1e-12)
        throw std::invalid_argument("adjoint_incident_field: point coincides with a detector");
      const double z = kappa_e * r;
      val += hankel1_0(z) * chi[j];
      // d/dz H0 = -H1
      grad += (-kappa_e * hankel1_1(z) * chi[j] / r) * diff.cast<cdouble>();
    }
    // Sign such that the field solves (Laplacian + kappa_e^2) p = sum chi_j
    // delta_j; the fundamental solution (i/4) H0 carries a -delta source.
    adj.value[p] = -0.25 * iunit * val;
    adj.gradient.col(p) = -0.25 * iunit * grad;
  }
  return adj;
}

Eigen::VectorXd topo_derivative_values(const std::vector<Vec2>& points, const Scene& scene,
                                       const AdjointIncident& adjoint, double kappa_i,
                                       double beta) {
  Eigen::VectorXd out(points.size());
  const double grad_coef = 2.0 * (1.0 - beta) / (1.0 + beta);
  const double mass_coef = beta * kappa_i * kappa_i - scene.kappa_e * scene.kappa_e;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const cdouble ui = scene.u_inc(points[p]);
    const Eigen::Vector2cd gi = scene.grad_u_inc(points[p]);
    const cdouble gdot = gi[0] * adjoint.gradient(0, p) + gi[1] * adjoint.gradient(1, p);
    out[p] = std::real(grad_coef * gdot + mass_coef * ui * adjoint.value[p]);
  }
  return out;
}

TopoField compute_topo_field(const DataVector& prior_data,
                             const std::vector<Vec2>& prior_detectors,
                             const Scene& scene, const GridSpec& grid) {
  Eigen::VectorXcd u_inc_det(prior_detectors.size());
  for (std::size_t j = 0; j < prior_detectors.size(); ++j)
    u_inc_det[j] = scene.u_inc(prior_detectors[j]);
  const Eigen::VectorXcd chi = chi_weights(u_inc_det, prior_data);

  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(grid.nx()) * grid.ny());
  for (int iy = 0; iy < grid.ny(); ++iy)
    for (int ix = 0; ix < grid.nx(); ++ix) pts.push_back(grid.point(ix, iy));

  const AdjointIncident adj =
      adjoint_incident_field(chi, prior_detectors, scene.kappa_e, pts);
  const Eigen::VectorXd vals =
      topo_derivative_values(pts, scene, adj, scene.kappa_i, scene.beta);

  TopoField field;
  field.grid = grid;
  field.values.resize(grid.nx(), grid.ny());
  std::size_t k = 0;
  for (int iy = 0; iy < grid.ny(); ++iy)
    for (int ix = 0; ix < grid.nx(); ++ix) field.values(ix, iy) = vals[k++];
  return field;
}

std::vector<GridComponent> threshold_components(const TopoField& field, double C0) {
  const double vmin = field.min_value();
  if (!(vmin < 0.0))
    throw std::runtime_error("threshold_components: field minimum is nonnegative");
  const double level = (1.0 - C0) * vmin;
  const int nx = field.grid.nx(), ny = field.grid.ny();
  Eigen::MatrixXi label = Eigen::MatrixXi::Constant(nx, ny, -1);
  std::vector<GridComponent> comps;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      if (label(ix, iy) >= 0 || !(field.values(ix, iy) < level)) continue;
      GridComponent comp;
      std::deque<std::pair<int, int>> queue{{ix, iy}};
      label(ix, iy) = static_cast<int>(comps.size());
      while (!queue.empty()) {
        auto [cx, cy] = queue.front();
        queue.pop_front();
        comp.cells.emplace_back(cx, cy);
        const int dx[4] = {1, -1, 0, 0};
        const int dy[4] = {0, 0, 1, -1};
        for (int d = 0; d < 4; ++d) {
          const int mx = cx + dx[d], my = cy + dy[d];
          if (mx < 0 || my < 0 || mx >= nx || my >= ny) continue;
          if (label(mx, my) >= 0 || !(field.values(mx, my) < level)) continue;
          label(mx, my) = static_cast<int>(comps.size());
          queue.emplace_back(mx, my);
        }
      }
      comps.push_back(std::move(comp));
    }
  }
  return comps;
}

double unregularized_cost_empty(const DataVector& data, const std::vector<Vec2>& detectors,
                                const Scene& scene) {
  double cost = 0.0;
  for (std::size_t j = 0; j < detectors.size(); ++j) {
    const cdouble fu = apply_operator(scene.u_inc(detectors[j]), data.op);
    cost += 0.5 * std::norm(data.values[j] - fu);
  }
  return cost;
}

double unregularized_cost(const ShapeParams& params, const DataVector& data,
                          const std::vector<Vec2>& detectors, const Scene& scene,
                          int n_bem) {
  Scene sc = scene;
  sc.detectors = detectors;
  auto sol = solve_transmission(params, sc, n_bem);
  const Eigen::VectorXcd u = eval_total_field(sol, sc, detectors);
  double cost = 0.0;
  for (std::size_t j = 0; j < detectors.size(); ++j)
    cost += 0.5 * std::norm(data.values[j] - apply_operator(u[j], data.op));
  return cost;
}

ShapeParams fit_prior_mean(const std::vector<GridComponent>& components,
                           const TopoField& field, const DataVector& prior_data,
                           const std::vector<Vec2>& prior_detectors, const Scene& scene,
                           int n_bem, RadiusRule rule, int modes) {
  if (components.empty()) throw std::invalid_argument("fit_prior_mean: no components");
  const GridSpec& grid = field.grid;
  const int nx = grid.nx(), ny = grid.ny();

  ShapeParams params;
  for (const auto& comp : components) {
    Eigen::MatrixXi mask = Eigen::MatrixXi::Zero(nx, ny);
    Vec2 centroid = Vec2::Zero();
    for (auto [ix, iy] : comp.cells) {
      mask(ix, iy) = 1;
      centroid += grid.point(ix, iy);
    }
    centroid /= static_cast<double>(comp.cells.size());

    // Boundary cells: component cells adjacent to the outside (or grid edge).
    double dmin = std::numeric_limits<double>::max();
    double dmax = 0.0;
    for (auto [ix, iy] : comp.cells) {
      bool boundary = ix == 0 || iy == 0 || ix == nx - 1 || iy == ny - 1;
      if (!boundary) {
        boundary = !mask(ix - 1, iy) || !mask(ix + 1, iy) || !mask(ix, iy - 1) ||
                   !mask(ix, iy + 1);
      }
      if (!boundary) continue;
      const double d = (grid.point(ix, iy) - centroid).norm();
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
    double a0 = rule == RadiusRule::min_distance ? dmin : 0.5 * (dmin + dmax);
    a0 = std::max(a0, 0.5 * grid.spacing);
    params.components.push_back(
        ComponentParams::circle(centroid.x(), centroid.y(), a0, modes));
  }

  const double cost_empty = unregularized_cost_empty(prior_data, prior_detectors, scene);
  while (unregularized_cost(params, prior_data, prior_detectors, scene, n_bem) >
         cost_empty) {
    for (auto& comp : params.components) {
      comp.cos_coef[0] *= 0.5;
      if (comp.cos_coef[0] < grid.spacing)
        throw std::runtime_error("fit_prior_mean: radius underflow while halving");
    }
  }
  return params;
}

double scan_C0(const TopoField& field, const DataVector& prior_data,
               const std::vector<Vec2>& prior_detectors, const Scene& scene,
               int target_count, int n_bem, RadiusRule rule, int modes) {
  if (target_count < 1) throw std::invalid_argument("scan_C0: target_count must be >= 1");
  constexpr int n_values = 50;
  constexpr double lo = 0.01, hi = 0.3;

  struct Candidate {
    double c0;
    int count;
  };
  std::vector<Candidate> cands;
  for (int k = 0; k < n_values; ++k) {
    const double c0 = lo + (hi - lo) * k / (n_values - 1);
    cands.push_back({c0, static_cast<int>(threshold_components(field, c0).size())});
  }

  double best_c0 = -1.0;
  double best_cost = std::numeric_limits<double>::max();
  for (const auto& cand : cands) {
    if (cand.count != target_count) continue;
    try {
      const auto comps = threshold_components(field, cand.c0);
      const auto nu0 = fit_prior_mean(comps, field, prior_data, prior_detectors, scene,
                                      n_bem, rule, modes);
      const double cost =
          unregularized_cost(nu0, prior_data, prior_detectors, scene, n_bem);
      if (cost < best_cost) {
        best_cost = cost;
        best_c0 = cand.c0;
      }
    } catch (const std::exception&) {
      // degenerate fit at this threshold; skip it
    }
  }
  if (best_c0 >= 0.0) return best_c0;

  // No threshold reaches the requested count: take the closest count,
  // breaking ties towards the smaller C0.
  int best_gap = std::numeric_limits<int>::max();
  for (const auto& cand : cands) {
    const int gap = std::abs(cand.count - target_count);
    if (gap < best_gap) {
      best_gap = gap;
      best_c0 = cand.c0;
    }
  }
  return best_c0;
}

Eigen::VectorXd build_prior_covariance(int count, int modes, double s, bool include_kappa,
                                       double kappa_variance) {
  if (count < 1 || modes < 1)
    throw std::invalid_argument("build_prior_covariance: need L >= 1 and M >= 1");
  if (s <= 0.0) throw std::invalid_argument("build_prior_covariance: need s > 0");
  Eigen::VectorXd var(param_dim(count, modes, include_kappa));
  int k = 0;
  for (int l = 0; l < count; ++l) {
    var[k++] = 0.1;  // center x
    var[k++] = 0.2;  // center y: larger uncertainty along the incidence direction
    var[k++] = 0.1;  // a_0
    for (int m = 1; m <= modes; ++m) var[k++] = 0.1 / std::pow(1.0 + m * m, s);
    for (int m = 1; m <= modes; ++m) var[k++] = 0.1 / std::pow(1.0 + m * m, s);
  }
  if (include_kappa) {
    if (kappa_variance <= 0.0)
      throw std::invalid_argument("build_prior_covariance: kappa variance must be positive");
    var[k++] = kappa_variance;
  }
  return var;
}

PriorBuildResult build_topological_prior(const DataVector& prior_data,
                                         const std::vector<Vec2>& prior_detectors,
                                         const Scene& scene, const PriorOptions& options) {
  PriorBuildResult result;
  result.field = compute_topo_field(prior_data, prior_detectors, scene, options.grid);
  const double c0 = options.fixed_C0
                        ? *options.fixed_C0
                        : scan_C0(result.field, prior_data, prior_detectors, scene,
                                  options.target_count, options.n_bem, options.rule,
                                  options.modes);
  auto comps = threshold_components(result.field, c0);
  ShapeParams nu0 = fit_prior_mean(comps, result.field, prior_data, prior_detectors,
                                   scene, options.n_bem, options.rule, options.modes);
  if (options.infer_kappa) nu0.kappa_i = options.kappa_mean;

  PriorSpec spec;
  spec.nu0 = std::move(nu0);
  spec.s = options.s;
  spec.C0 = c0;
  spec.variance =
      build_prior_covariance(static_cast<int>(spec.nu0.components.size()), options.modes,
                             options.s, options.infer_kappa, options.kappa_variance);
  result.spec = std::move(spec);
  return result;
}

}  // namespace iscat
