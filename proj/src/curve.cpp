#include "iscat/curve.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace iscat {

namespace {

void finalize(DiscretizedCurve& c) {
  const int n = c.size();
  c.speed.resize(n);
  c.normal.resize(2, n);
  for (int i = 0; i < n; ++i) {
    const double s = c.dq.col(i).norm();
    if (s <= 0.0) throw InadmissibleError("discretize: vanishing curve speed");
    c.speed[i] = s;
    c.normal.col(i) = Vec2(c.dq(1, i), -c.dq(0, i)) / s;
  }
}

}  // namespace

std::vector<Vec2> DiscretizedCurve::polygon() const {
  std::vector<Vec2> poly(size());
  for (int i = 0; i < size(); ++i) poly[i] = q.col(i);
  return poly;
}

bool DiscretizedCurve::contains(const Vec2& p) const {
  return point_in_polygon(p, polygon());
}

double DiscretizedCurve::distance_to_nodes(const Vec2& p) const {
  return (q.colwise() - p).colwise().norm().minCoeff();
}

DiscretizedCurve discretize(const ComponentParams& comp, int n) {
  if (n < 4 || n % 2 != 0) throw std::invalid_argument("discretize: n must be even and >= 4");
  DiscretizedCurve c;
  c.t.resize(n);
  c.q.resize(2, n);
  c.dq.resize(2, n);
  c.d2q.resize(2, n);
  const double inv_two_pi = 1.0 / (2.0 * pi);
  for (int i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) / n;  // component parameter in [0,1)
    c.t[i] = 2.0 * pi * u;
    c.q.col(i) = comp.point(u);
    c.dq.col(i) = comp.point_deriv(u) * inv_two_pi;
    c.d2q.col(i) = comp.point_deriv2(u) * inv_two_pi * inv_two_pi;
  }
  finalize(c);
  return c;
}

DiscretizedCurve discretize_parametric(const std::function<Vec2(double)>& curve, int n) {
  if (n < 4 || n % 2 != 0) throw std::invalid_argument("discretize: n must be even and >= 4");
  DiscretizedCurve c;
  c.t.resize(n);
  c.q.resize(2, n);
  for (int i = 0; i < n; ++i) {
    c.t[i] = 2.0 * pi * i / n;
    c.q.col(i) = curve(static_cast<double>(i) / n);
  }
  const Eigen::MatrixXd& D = spectral_diff_matrix(n);
  c.dq = c.q * D.transpose();
  c.d2q = c.dq * D.transpose();
  finalize(c);
  return c;
}

DiscretizedCurve discretize_ellipse(const Vec2& center, double semi_x, double semi_y, int n) {
  if (n < 4 || n % 2 != 0) throw std::invalid_argument("discretize: n must be even and >= 4");
  DiscretizedCurve c;
  c.t.resize(n);
  c.q.resize(2, n);
  c.dq.resize(2, n);
  c.d2q.resize(2, n);
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * pi * i / n;
    c.t[i] = t;
    c.q.col(i) = center + Vec2(semi_x * std::cos(t), semi_y * std::sin(t));
    c.dq.col(i) = Vec2(-semi_x * std::sin(t), semi_y * std::cos(t));
    c.d2q.col(i) = Vec2(-semi_x * std::cos(t), -semi_y * std::sin(t));
  }
  finalize(c);
  return c;
}

std::vector<DiscretizedCurve> discretize_all(const ShapeParams& params, int n) {
  std::vector<DiscretizedCurve> curves;
  curves.reserve(params.components.size());
  for (const auto& comp : params.components) curves.push_back(discretize(comp, n));
  return curves;
}

const Eigen::MatrixXd& spectral_diff_matrix(int n) {
  static std::map<int, Eigen::MatrixXd> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double sgn = ((i - j) % 2 == 0) ? 1.0 : -1.0;
      D(i, j) = 0.5 * sgn / std::tan(pi * (i - j) / n);
    }
  }
  return cache.emplace(n, std::move(D)).first->second;
}

}  // namespace iscat
