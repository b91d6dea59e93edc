#pragma once

#include <string>
#include <vector>

#include "iscat/sample_set.hpp"
#include "iscat/topological_prior.hpp"
#include "iscat/types.hpp"

namespace iscat {

/// Fraction of admissible samples whose component `comp` contains each grid
/// point (point-in-polygon on the sampled boundary); comp = -1 tests
/// containment in any component. Values lie in [0, 1].
Eigen::MatrixXd inside_probability_grid(const SampleSet& samples, const GridSpec& grid,
                                        int comp = -1, int boundary_points = 256);

/// Per-angle quantiles (5, 25, 50, 75, 95 %) of the boundary distance from
/// each sample's center of mass, for one component.
struct AngularQuantiles {
  Eigen::VectorXd angles;     // n_angles values in [0, 2 pi)
  Eigen::MatrixXd quantiles;  // 5 x n_angles
};
AngularQuantiles boundary_marginals(const SampleSet& samples, int comp, int n_angles,
                                    int boundary_points = 256);

/// ShapeStats for every admissible sample (one entry per admissible sample,
/// in sample order) for one component.
std::vector<ShapeStats> per_sample_stats(const SampleSet& samples, int comp,
                                         int n_quad = 256);

/// Fixed-bin histogram over [min, max] of the values.
struct HistogramTable {
  std::string name;
  Eigen::VectorXd edges;   // bins + 1
  Eigen::VectorXd counts;  // bins
  double mean = 0.0;
};
HistogramTable histogram(const std::string& name, const std::vector<double>& values,
                         int bins);

/// Histogram tables of the parameterization-independent statistics (area,
/// deviation, center coordinates, extremal radii and directions), plus the
/// kappa histogram when the samples carry it.
std::vector<HistogramTable> stats_histograms(const SampleSet& samples, int comp,
                                             int bins = 50);

/// Distance from a point to a sample polygon along a ray (largest
/// intersection); negative when the ray misses.
double ray_boundary_distance(const std::vector<Vec2>& polygon, const Vec2& origin,
                             double angle);

}  // namespace iscat
