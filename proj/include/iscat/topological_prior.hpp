#pragma once

#include <optional>
#include <vector>

#include "iscat/geometry.hpp"
#include "iscat/scene.hpp"
#include "iscat/types.hpp"

namespace iscat {

/// Rectangular observation grid.
struct GridSpec {
  double xmin = -2.5, xmax = 2.5;
  double ymin = -2.5, ymax = 2.5;
  double spacing = 0.05;

  int nx() const { return static_cast<int>(std::lround((xmax - xmin) / spacing)) + 1; }
  int ny() const { return static_cast<int>(std::lround((ymax - ymin) / spacing)) + 1; }
  Vec2 point(int ix, int iy) const { return {xmin + ix * spacing, ymin + iy * spacing}; }
};

/// Topological derivative of the data misfit sampled on a grid. Large
/// negative values mark likely object locations.
struct TopoField {
  GridSpec grid;
  Eigen::MatrixXd values;  // nx x ny

  double min_value() const { return values.minCoeff(); }
};

/// Grid-cell indices of one connected (4-neighbor) component of the
/// thresholded region.
struct GridComponent {
  std::vector<std::pair<int, int>> cells;
};

/// Gaussian prior: mean shape, diagonal covariance in pack order, and the
/// hyperparameters used to build it.
struct PriorSpec {
  ShapeParams nu0;
  Eigen::VectorXd variance;
  double s = 3.0;
  double C0 = 0.0;

  int dim() const { return nu0.dim(); }
  bool has_kappa() const { return nu0.kappa_i.has_value(); }
  Eigen::VectorXd mean() const { return pack(nu0); }
};

/// Residual weights chi_j = conj(d_j - f(u_j)) f'(u_j), with f' = 1 for field
/// data and f'(u) = 2 conj(u) for intensity data.
Eigen::VectorXcd chi_weights(const Eigen::VectorXcd& u_det, const DataVector& data);

/// Conjugate adjoint field driven by the residual weights: the radiating
/// solution of (Laplacian + kappa_e^2) p = sum_j chi_j delta_{x_j}, i.e.
/// p(x) = -(i/4) sum_j H0(kappa_e |x - x_j|) chi_j, with its gradient
/// (computed analytically through H1).
struct AdjointIncident {
  Eigen::VectorXcd value;
  Eigen::Matrix2Xcd gradient;
};
AdjointIncident adjoint_incident_field(const Eigen::VectorXcd& chi,
                                       const std::vector<Vec2>& detectors,
                                       double kappa_e, const std::vector<Vec2>& points);

/// D_T(x) = Re[ 2(1-beta)/(1+beta) grad u_inc . grad p + (beta kappa_i^2 -
/// kappa_e^2) u_inc p ] at the given points.
Eigen::VectorXd topo_derivative_values(const std::vector<Vec2>& points, const Scene& scene,
                                       const AdjointIncident& adjoint, double kappa_i,
                                       double beta);

/// Field over the observation grid from prior-split data.
TopoField compute_topo_field(const DataVector& prior_data,
                             const std::vector<Vec2>& prior_detectors,
                             const Scene& scene, const GridSpec& grid);

/// Cells where D_T < (1 - C0) * min D_T, grouped by 4-connectivity. Throws if
/// the field minimum is nonnegative (no detectable object).
std::vector<GridComponent> threshold_components(const TopoField& field, double C0);

enum class RadiusRule { min_distance, avg_min_max };

/// Fits one circle per connected component (centroid plus distance to the
/// component boundary) and halves the radii until the unregularized misfit of
/// the guess does not exceed the empty-domain misfit.
ShapeParams fit_prior_mean(const std::vector<GridComponent>& components,
                           const TopoField& field, const DataVector& prior_data,
                           const std::vector<Vec2>& prior_detectors, const Scene& scene,
                           int n_bem, RadiusRule rule = RadiusRule::min_distance,
                           int modes = 5);

/// Unregularized misfit J_c = 1/2 sum_j |d_j - f(u(x_j))|^2 of a candidate
/// configuration; empty configuration uses the incident field.
double unregularized_cost(const ShapeParams& params, const DataVector& data,
                          const std::vector<Vec2>& detectors, const Scene& scene,
                          int n_bem);
double unregularized_cost_empty(const DataVector& data, const std::vector<Vec2>& detectors,
                                const Scene& scene);

/// Scans 50 threshold values in [0.01, 0.3]; among those producing exactly
/// target_count components returns the cost-minimizing one, otherwise the
/// value with the closest component count (ties to the smaller C0).
double scan_C0(const TopoField& field, const DataVector& prior_data,
               const std::vector<Vec2>& prior_detectors, const Scene& scene,
               int target_count, int n_bem, RadiusRule rule = RadiusRule::min_distance,
               int modes = 5);

/// Diagonal pack-order variances: (0.1, 0.2, 0.1, 0.1/(1+m^2)^s for the
/// cosine then sine modes) per component, kappa variance appended on demand.
Eigen::VectorXd build_prior_covariance(int count, int modes, double s,
                                       bool include_kappa = false,
                                       double kappa_variance = 0.0);

struct PriorOptions {
  GridSpec grid;
  double s = 3.0;
  int target_count = 1;
  int modes = 5;
  int n_bem = 128;
  RadiusRule rule = RadiusRule::min_distance;
  std::optional<double> fixed_C0;  // skip the scan when set
  bool infer_kappa = false;
  double kappa_mean = 0.0;
  double kappa_variance = 0.0;
};

struct PriorBuildResult {
  PriorSpec spec;
  TopoField field;
};

/// Full prior pipeline: topological field, C0 selection, circle fitting and
/// covariance assembly.
PriorBuildResult build_topological_prior(const DataVector& prior_data,
                                         const std::vector<Vec2>& prior_detectors,
                                         const Scene& scene, const PriorOptions& options);

}  // namespace iscat
