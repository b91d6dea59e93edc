#include "iscat/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace iscat {

namespace {

constexpr double two_pi = 2.0 * pi;

struct BoundingBox {
  double xmin, xmax, ymin, ymax;
  bool overlaps(const BoundingBox& o) const {
    return xmin <= o.xmax && o.xmin <= xmax && ymin <= o.ymax && o.ymin <= ymax;
  }
};

BoundingBox bounding_box(const std::vector<Vec2>& pts) {
  BoundingBox b{pts[0].x(), pts[0].x(), pts[0].y(), pts[0].y()};
  for (const auto& p : pts) {
    b.xmin = std::min(b.xmin, p.x());
    b.xmax = std::max(b.xmax, p.x());
    b.ymin = std::min(b.ymin, p.y());
    b.ymax = std::max(b.ymax, p.y());
  }
  return b;
}

double orientation(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double o1 = orientation(a, b, c);
  const double o2 = orientation(a, b, d);
  const double o3 = orientation(c, d, a);
  const double o4 = orientation(c, d, b);
  return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0));
}

bool polygons_interact(const std::vector<Vec2>& pa, const std::vector<Vec2>& pb) {
  if (!bounding_box(pa).overlaps(bounding_box(pb))) return false;
  const std::size_t na = pa.size(), nb = pb.size();
  for (std::size_t i = 0; i < na; ++i) {
    const Vec2& a0 = pa[i];
    const Vec2& a1 = pa[(i + 1) % na];
    for (std::size_t j = 0; j < nb; ++j) {
      if (segments_intersect(a0, a1, pb[j], pb[(j + 1) % nb])) return true;
    }
  }
  // No crossing: nesting remains possible.
  return point_in_polygon(pa[0], pb) || point_in_polygon(pb[0], pa);
}

}  // namespace

ComponentParams::ComponentParams(double cx_, double cy_, Eigen::VectorXd a, Eigen::VectorXd b)
    : cx(cx_), cy(cy_), cos_coef(std::move(a)), sin_coef(std::move(b)) {
  if (cos_coef.size() != sin_coef.size() + 1)
    throw std::invalid_argument("ComponentParams: need a_0..a_M and b_1..b_M");
}

ComponentParams ComponentParams::circle(double cx, double cy, double a0, int modes) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(modes + 1);
  a[0] = a0;
  return ComponentParams(cx, cy, a, Eigen::VectorXd::Zero(modes));
}

double ComponentParams::radius(double t) const {
  double r = cos_coef[0];
  for (int m = 1; m <= modes(); ++m) {
    const double arg = two_pi * m * t;
    r += 2.0 * (cos_coef[m] * std::cos(arg) + sin_coef[m - 1] * std::sin(arg));
  }
  return r;
}

double ComponentParams::radius_deriv(double t) const {
  double dr = 0.0;
  for (int m = 1; m <= modes(); ++m) {
    const double w = two_pi * m;
    dr += 2.0 * w * (-cos_coef[m] * std::sin(w * t) + sin_coef[m - 1] * std::cos(w * t));
  }
  return dr;
}

double ComponentParams::radius_deriv2(double t) const {
  double ddr = 0.0;
  for (int m = 1; m <= modes(); ++m) {
    const double w = two_pi * m;
    ddr -= 2.0 * w * w * (cos_coef[m] * std::cos(w * t) + sin_coef[m - 1] * std::sin(w * t));
  }
  return ddr;
}

Vec2 ComponentParams::point(double t) const {
  const double c = std::cos(two_pi * t), s = std::sin(two_pi * t);
  const double r = radius(t);
  return {cx + r * c, cy + r * s};
}

Vec2 ComponentParams::point_deriv(double t) const {
  const double c = std::cos(two_pi * t), s = std::sin(two_pi * t);
  const double r = radius(t), dr = radius_deriv(t);
  return {dr * c - r * two_pi * s, dr * s + r * two_pi * c};
}

Vec2 ComponentParams::point_deriv2(double t) const {
  const double c = std::cos(two_pi * t), s = std::sin(two_pi * t);
  const double r = radius(t), dr = radius_deriv(t), ddr = radius_deriv2(t);
  return {ddr * c - 2.0 * dr * two_pi * s - r * two_pi * two_pi * c,
          ddr * s + 2.0 * dr * two_pi * c - r * two_pi * two_pi * s};
}

int ShapeParams::dim() const {
  int n = 0;
  for (const auto& c : components) n += c.dim();
  return n + (kappa_i ? 1 : 0);
}

int param_dim(int count, int modes, bool has_kappa) {
  return count * component_dim(modes) + (has_kappa ? 1 : 0);
}

std::vector<Vec2> eval_boundary(const ComponentParams& comp,
                                const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw std::invalid_argument("eval_boundary: empty t grid");
  std::vector<Vec2> pts;
  pts.reserve(t_grid.size());
  for (double t : t_grid) pts.push_back(comp.point(t));
  return pts;
}

bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& polygon) {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x_cross = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (p.x() < x_cross) inside = !inside;
    }
  }
  return inside;
}

bool is_admissible(const ShapeParams& params, int n_check) {
  if (params.components.empty()) return false;
  if (params.kappa_i && *params.kappa_i <= 0.0) return false;
  n_check = std::max(n_check, 4 * (2 * params.modes() + 1));

  std::vector<std::vector<Vec2>> polys;
  polys.reserve(params.components.size());
  for (const auto& comp : params.components) {
    std::vector<Vec2> poly(n_check);
    for (int i = 0; i < n_check; ++i) {
      const double t = static_cast<double>(i) / n_check;
      if (comp.radius(t) <= 0.0) return false;
      poly[i] = comp.point(t);
    }
    polys.push_back(std::move(poly));
  }
  for (std::size_t a = 0; a < polys.size(); ++a)
    for (std::size_t b = a + 1; b < polys.size(); ++b)
      if (polygons_interact(polys[a], polys[b])) return false;
  return true;
}

ShapeStats shape_stats(const ComponentParams& comp, int n_quad) {
  const double dt = 1.0 / n_quad;
  Eigen::Matrix2Xd q(2, n_quad), dq(2, n_quad);
  for (int i = 0; i < n_quad; ++i) {
    const double t = i * dt;
    if (comp.radius(t) <= 0.0)
      throw InadmissibleError("shape_stats: component radius vanishes");
    q.col(i) = comp.point(t);
    dq.col(i) = comp.point_deriv(t);
  }
  const Eigen::VectorXd speed = dq.colwise().norm();
  const double length = speed.sum() * dt;

  ShapeStats st;
  st.center_of_mass = (q * speed).rowwise().sum() * dt / length;
  // Green's theorem; counterclockwise parameterization gives positive sign.
  double twice_area = 0.0;
  for (int i = 0; i < n_quad; ++i)
    twice_area += q(0, i) * dq(1, i) - q(1, i) * dq(0, i);
  st.area = std::abs(0.5 * twice_area * dt);

  Eigen::VectorXd r(n_quad);
  for (int i = 0; i < n_quad; ++i) r[i] = (q.col(i) - st.center_of_mass).norm();
  st.r_avg = r.dot(speed) * dt / length;
  st.deviation = (r.array() - st.r_avg).abs().matrix().dot(speed) * dt;

  int imin = 0, imax = 0;
  r.minCoeff(&imin);
  r.maxCoeff(&imax);
  st.r_min = r[imin];
  st.r_max = r[imax];
  auto direction = [&](int i) {
    const Vec2 d = q.col(i) - st.center_of_mass;
    double ang = std::atan2(d.y(), d.x());
    if (ang < 0.0) ang += pi;
    if (ang >= pi) ang -= pi;
    return ang;
  };
  st.dir_min = direction(imin);
  st.dir_max = direction(imax);
  return st;
}

Eigen::VectorXd pack(const ShapeParams& params) {
  Eigen::VectorXd v(params.dim());
  int k = 0;
  for (const auto& c : params.components) {
    v[k++] = c.cx;
    v[k++] = c.cy;
    for (int m = 0; m <= c.modes(); ++m) v[k++] = c.cos_coef[m];
    for (int m = 1; m <= c.modes(); ++m) v[k++] = c.sin_coef[m - 1];
  }
  if (params.kappa_i) v[k++] = *params.kappa_i;
  return v;
}

ShapeParams unpack(const Eigen::VectorXd& v, int count, int modes, bool has_kappa) {
  if (v.size() != param_dim(count, modes, has_kappa))
    throw std::invalid_argument("unpack: parameter vector length mismatch");
  ShapeParams params;
  params.components.reserve(count);
  int k = 0;
  for (int l = 0; l < count; ++l) {
    const double cx = v[k++];
    const double cy = v[k++];
    Eigen::VectorXd a = v.segment(k, modes + 1);
    k += modes + 1;
    Eigen::VectorXd b = v.segment(k, modes);
    k += modes;
    params.components.emplace_back(cx, cy, std::move(a), std::move(b));
  }
  if (has_kappa) params.kappa_i = v[k++];
  return params;
}

}  // namespace iscat
