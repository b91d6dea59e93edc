#include "iscat/sample_stats.hpp"

#include <algorithm>
#include <cmath>

namespace iscat {

namespace {

std::vector<Vec2> component_polygon(const ShapeParams& params, int comp, int n) {
  std::vector<double> tgrid(n);
  for (int i = 0; i < n; ++i) tgrid[i] = static_cast<double>(i) / n;
  return eval_boundary(params.components[comp], tgrid);
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::nan("");
  const double pos = q * (sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - lo;
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

Eigen::MatrixXd inside_probability_grid(const SampleSet& samples, const GridSpec& grid,
                                        int comp, int boundary_points) {
  const int nx = grid.nx(), ny = grid.ny();
  Eigen::MatrixXd prob = Eigen::MatrixXd::Zero(nx, ny);
  int n_adm = 0;
  for (int s = 0; s < samples.count; ++s) {
    if (!samples.admissible[s]) continue;
    ++n_adm;
    const ShapeParams params = samples.shape_at(s);
    Eigen::MatrixXi hit = Eigen::MatrixXi::Zero(nx, ny);
    const int c_lo = comp < 0 ? 0 : comp;
    const int c_hi = comp < 0 ? params.count() : comp + 1;
    for (int c = c_lo; c < c_hi; ++c) {
      const auto poly = component_polygon(params, c, boundary_points);
      double xmin = poly[0].x(), xmax = xmin, ymin = poly[0].y(), ymax = ymin;
      for (const auto& p : poly) {
        xmin = std::min(xmin, p.x());
        xmax = std::max(xmax, p.x());
        ymin = std::min(ymin, p.y());
        ymax = std::max(ymax, p.y());
      }
      for (int ix = 0; ix < nx; ++ix) {
        for (int iy = 0; iy < ny; ++iy) {
          if (hit(ix, iy)) continue;
          const Vec2 pt = grid.point(ix, iy);
          if (pt.x() < xmin || pt.x() > xmax || pt.y() < ymin || pt.y() > ymax) continue;
          if (point_in_polygon(pt, poly)) hit(ix, iy) = 1;
        }
      }
    }
    for (int ix = 0; ix < nx; ++ix)
      for (int iy = 0; iy < ny; ++iy) prob(ix, iy) += hit(ix, iy);
  }
  if (n_adm == 0) throw std::invalid_argument("inside_probability_grid: no admissible samples");
  return prob / n_adm;
}

double ray_boundary_distance(const std::vector<Vec2>& polygon, const Vec2& origin,
                             double angle) {
  const Vec2 dir(std::cos(angle), std::sin(angle));
  double best = -1.0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[(i + 1) % n];
    // origin + t dir = a + u e, Cramer on [dir, -e]
    const Vec2 e = b - a;
    const double den = dir.x() * (-e.y()) + dir.y() * e.x();
    if (std::abs(den) < 1e-300) continue;
    const Vec2 rhs = a - origin;
    const double t = (rhs.x() * (-e.y()) + rhs.y() * e.x()) / den;
    const double u = (dir.x() * rhs.y() - dir.y() * rhs.x()) / den;
    if (t >= 0.0 && u >= 0.0 && u <= 1.0) best = std::max(best, t);
  }
  return best;
}

AngularQuantiles boundary_marginals(const SampleSet& samples, int comp, int n_angles,
                                    int boundary_points) {
  if (n_angles < 1) throw std::invalid_argument("boundary_marginals: n_angles >= 1");
  AngularQuantiles out;
  out.angles.resize(n_angles);
  for (int k = 0; k < n_angles; ++k) out.angles[k] = 2.0 * pi * k / n_angles;
  out.quantiles.resize(5, n_angles);

  std::vector<std::vector<double>> radii(n_angles);
  for (int s = 0; s < samples.count; ++s) {
    if (!samples.admissible[s]) continue;
    const ShapeParams params = samples.shape_at(s);
    const auto poly = component_polygon(params, comp, boundary_points);
    const ShapeStats stats = shape_stats(params.components[comp], boundary_points);
    for (int k = 0; k < n_angles; ++k) {
      const double r = ray_boundary_distance(poly, stats.center_of_mass, out.angles[k]);
      if (r > 0.0) radii[k].push_back(r);
    }
  }
  const double levels[5] = {0.05, 0.25, 0.50, 0.75, 0.95};
  for (int k = 0; k < n_angles; ++k) {
    std::sort(radii[k].begin(), radii[k].end());
    for (int q = 0; q < 5; ++q) out.quantiles(q, k) = quantile_sorted(radii[k], levels[q]);
  }
  return out;
}

std::vector<ShapeStats> per_sample_stats(const SampleSet& samples, int comp, int n_quad) {
  std::vector<ShapeStats> stats;
  stats.reserve(samples.count);
  for (int s = 0; s < samples.count; ++s) {
    if (!samples.admissible[s]) continue;
    stats.push_back(shape_stats(samples.shape_at(s).components[comp], n_quad));
  }
  return stats;
}

HistogramTable histogram(const std::string& name, const std::vector<double>& values,
                         int bins) {
  if (values.empty()) throw std::invalid_argument("histogram: no values");
  if (bins < 1) throw std::invalid_argument("histogram: bins >= 1");
  HistogramTable table;
  table.name = name;
  double lo = values[0], hi = values[0], sum = 0.0;
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  table.mean = sum / values.size();
  if (hi <= lo) hi = lo + 1e-12;  // degenerate data collapse into one bin
  table.edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b) table.edges[b] = lo + (hi - lo) * b / bins;
  table.counts = Eigen::VectorXd::Zero(bins);
  for (double v : values) {
    int b = static_cast<int>((v - lo) / (hi - lo) * bins);
    b = std::clamp(b, 0, bins - 1);
    table.counts[b] += 1.0;
  }
  return table;
}

std::vector<HistogramTable> stats_histograms(const SampleSet& samples, int comp, int bins) {
  const auto stats = per_sample_stats(samples, comp);
  if (stats.empty()) throw std::invalid_argument("stats_histograms: no admissible samples");
  std::vector<double> area, deviation, cx, cy, rmin, rmax, dmin, dmax;
  for (const auto& st : stats) {
    area.push_back(st.area);
    deviation.push_back(st.deviation);
    cx.push_back(st.center_of_mass.x());
    cy.push_back(st.center_of_mass.y());
    rmin.push_back(st.r_min);
    rmax.push_back(st.r_max);
    dmin.push_back(st.dir_min);
    dmax.push_back(st.dir_max);
  }
  std::vector<HistogramTable> tables;
  tables.push_back(histogram("area", area, bins));
  tables.push_back(histogram("deviation", deviation, bins));
  tables.push_back(histogram("center_x", cx, bins));
  tables.push_back(histogram("center_y", cy, bins));
  tables.push_back(histogram("r_min", rmin, bins));
  tables.push_back(histogram("r_max", rmax, bins));
  tables.push_back(histogram("dir_min", dmin, bins));
  tables.push_back(histogram("dir_max", dmax, bins));
  if (samples.has_kappa) {
    std::vector<double> kappa;
    for (int s = 0; s < samples.count; ++s) {
      if (!samples.admissible[s]) continue;
      kappa.push_back(samples.samples(samples.samples.rows() - 1, s));
    }
    tables.push_back(histogram("kappa_i", kappa, bins));
  }
  return tables;
}

}  // namespace iscat
