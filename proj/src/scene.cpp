#include "iscat/scene.hpp"

#include <cmath>

#include "iscat/rng.hpp"

namespace iscat {

cdouble apply_operator(cdouble u, Measurement op) {
  return op == Measurement::field ? u : cdouble(std::norm(u), 0.0);
}

DataVector measure(const Eigen::VectorXcd& u_values, Measurement op) {
  DataVector d;
  d.op = op;
  d.values.resize(u_values.size());
  for (Eigen::Index j = 0; j < u_values.size(); ++j)
    d.values[j] = apply_operator(u_values[j], op);
  return d;
}

DataVector add_noise(const DataVector& d, double level, std::uint64_t seed) {
  if (level < 0.0) throw std::invalid_argument("add_noise: level must be >= 0");
  DataVector out = d;
  const double rms = std::sqrt(d.values.squaredNorm() / std::max<Eigen::Index>(1, d.size()));
  const double sigma = level * rms;
  out.sigma_noise = sigma;
  if (sigma == 0.0) return out;
  Rng rng(seed);
  const double s = sigma / std::sqrt(2.0);
  for (Eigen::Index j = 0; j < out.values.size(); ++j) {
    if (d.op == Measurement::field) {
      out.values[j] += cdouble(s * rng.normal(), s * rng.normal());
    } else {
      out.values[j] += sigma * rng.normal();
    }
  }
  return out;
}

std::vector<Vec2> detector_line(int count, double y, double x0, double spacing) {
  std::vector<Vec2> pts;
  pts.reserve(count);
  for (int j = 0; j < count; ++j) pts.emplace_back(x0 + spacing * j, y);
  return pts;
}

DataSplit split_interleaved(const DataVector& all, const std::vector<Vec2>& detectors) {
  if (static_cast<std::size_t>(all.size()) != detectors.size())
    throw std::invalid_argument("split_interleaved: data/detector size mismatch");
  DataSplit s;
  s.invert.op = s.prior.op = all.op;
  s.invert.sigma_noise = s.prior.sigma_noise = all.sigma_noise;
  std::vector<cdouble> even, odd;
  for (int j = 0; j < all.size(); ++j) {
    if (j % 2 == 0) {
      even.push_back(all.values[j]);
      s.invert_detectors.push_back(detectors[j]);
    } else {
      odd.push_back(all.values[j]);
      s.prior_detectors.push_back(detectors[j]);
    }
  }
  s.invert.values = Eigen::Map<Eigen::VectorXcd>(even.data(), even.size());
  s.prior.values = Eigen::Map<Eigen::VectorXcd>(odd.data(), odd.size());
  return s;
}

}  // namespace iscat
