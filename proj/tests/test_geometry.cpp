#include <cmath>

#include "doctest.h"
#include "iscat/geometry.hpp"
#include "iscat/rng.hpp"

using namespace iscat;

namespace {

// Least-squares fit of the truncated Fourier radius to a target polar radius,
// sampled densely; used to build the M=5 ellipse approximation.
ComponentParams fit_polar_radius(const std::function<double(double)>& target, int modes,
                                 double cx, double cy) {
  const int n = 2048;
  Eigen::MatrixXd basis(n, 2 * modes + 1);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / n;
    rhs[i] = target(t);
    basis(i, 0) = 1.0;
    for (int m = 1; m <= modes; ++m) {
      basis(i, m) = 2.0 * std::cos(2.0 * pi * m * t);
      basis(i, modes + m) = 2.0 * std::sin(2.0 * pi * m * t);
    }
  }
  Eigen::VectorXd coef = (basis.transpose() * basis).ldlt().solve(basis.transpose() * rhs);
  return ComponentParams(cx, cy, coef.head(modes + 1), coef.tail(modes));
}

double ellipse_polar_radius(double t, double a, double b) {
  const double c = std::cos(2.0 * pi * t), s = std::sin(2.0 * pi * t);
  return a * b / std::sqrt(b * b * c * c + a * a * s * s);
}

}  // namespace

TEST_CASE("boundary evaluation of simple radius expansions") {
  auto circle = ComponentParams::circle(0.0, 0.0, 0.2, 5);
  CHECK(circle.point(0.0).x() == doctest::Approx(0.2));
  CHECK(circle.point(0.0).y() == doctest::Approx(0.0));

  ComponentParams bumped = circle;
  bumped.cos_coef[1] = 0.05;
  CHECK(bumped.radius(0.0) == doctest::Approx(0.3));
  CHECK(bumped.point(0.0).x() == doctest::Approx(0.3));
}

TEST_CASE("boundary is 1-periodic") {
  Rng rng(7);
  Eigen::VectorXd a(6), b(5);
  for (int i = 0; i < 6; ++i) a[i] = 0.02 * rng.normal();
  for (int i = 0; i < 5; ++i) b[i] = 0.02 * rng.normal();
  a[0] = 0.25;
  ComponentParams comp(0.3, -0.1, a, b);
  CHECK((comp.point(0.0) - comp.point(1.0)).norm() < 1e-14);
}

TEST_CASE("M=5 fit of the 0.2/0.1 ellipse stays within 2% of the true extent") {
  auto comp = fit_polar_radius([](double t) { return ellipse_polar_radius(t, 0.2, 0.1); },
                               5, 0.0, 0.0);
  double max_ext = 0.0;
  for (int i = 0; i < 4096; ++i) {
    max_ext = std::max(max_ext, comp.point(static_cast<double>(i) / 4096).norm());
  }
  CHECK(max_ext == doctest::Approx(0.2).epsilon(0.02));
}

TEST_CASE("admissibility: vanishing radius and overlap") {
  ShapeParams single;
  single.components.push_back(ComponentParams::circle(0, 0, 0.2, 5));
  CHECK(is_admissible(single));

  ShapeParams pinched = single;
  pinched.components[0].cos_coef[0] = 0.1;
  pinched.components[0].cos_coef[1] = 0.2;
  // r(1/2) = 0.1 - 0.4 < 0
  CHECK_FALSE(is_admissible(pinched));

  ShapeParams overlapping;
  overlapping.components.push_back(ComponentParams::circle(0, 0, 0.2, 5));
  overlapping.components.push_back(ComponentParams::circle(0.3, 0, 0.2, 5));
  CHECK_FALSE(is_admissible(overlapping));

  ShapeParams nested;
  nested.components.push_back(ComponentParams::circle(0, 0, 0.4, 5));
  nested.components.push_back(ComponentParams::circle(0.05, 0, 0.1, 5));
  CHECK_FALSE(is_admissible(nested));

  ShapeParams separated;
  separated.components.push_back(ComponentParams::circle(0, 0, 0.2, 5));
  separated.components.push_back(ComponentParams::circle(0.9, 0, 0.2, 5));
  CHECK(is_admissible(separated));
}

TEST_CASE("admissibility is translation invariant") {
  Rng rng(41);
  for (int rep = 0; rep < 20; ++rep) {
    ShapeParams params;
    for (int l = 0; l < 2; ++l) {
      Eigen::VectorXd a(6), b(5);
      for (int i = 0; i < 6; ++i) a[i] = 0.03 * rng.normal();
      for (int i = 0; i < 5; ++i) b[i] = 0.03 * rng.normal();
      a[0] = 0.15 + 0.1 * rng.uniform();
      ComponentParams comp(0.8 * rng.normal(), 0.8 * rng.normal(), a, b);
      params.components.push_back(comp);
    }
    ShapeParams moved = params;
    for (auto& c : moved.components) {
      c.cx += 3.7;
      c.cy -= 1.3;
    }
    CHECK(is_admissible(params) == is_admissible(moved));
  }
}

TEST_CASE("shape statistics of circles") {
  auto stats = shape_stats(ComponentParams::circle(0, 0, 0.2, 5), 256);
  CHECK(stats.area == doctest::Approx(pi * 0.04).epsilon(1e-10));
  CHECK(stats.deviation < 1e-10);
  CHECK(stats.center_of_mass.norm() < 1e-12);

  auto offset = shape_stats(ComponentParams::circle(1.0, 2.0, 0.2, 5), 256);
  CHECK(offset.center_of_mass.x() == doctest::Approx(1.0));
  CHECK(offset.center_of_mass.y() == doctest::Approx(2.0));
}

TEST_CASE("shape statistics of the M=5 ellipse fit") {
  auto comp = fit_polar_radius([](double t) { return ellipse_polar_radius(t, 0.2, 0.1); },
                               5, 0.0, 0.0);
  auto stats = shape_stats(comp, 512);
  CHECK(stats.r_max == doctest::Approx(0.2).epsilon(0.02));
  CHECK(stats.r_min == doctest::Approx(0.1).epsilon(0.02));
  const double dmax = std::min(stats.dir_max, pi - stats.dir_max);
  CHECK(dmax < 0.05);
  CHECK(stats.dir_min == doctest::Approx(pi / 2).epsilon(0.05));
}

TEST_CASE("shape statistics reject a degenerate component") {
  ComponentParams bad = ComponentParams::circle(0, 0, 0.1, 5);
  bad.cos_coef[1] = 0.2;
  CHECK_THROWS_AS(shape_stats(bad, 128), InadmissibleError);
}

TEST_CASE("pack/unpack round trip and lengths") {
  CHECK(param_dim(1, 5, false) == 13);
  CHECK(param_dim(3, 5, false) == 39);
  CHECK(param_dim(1, 5, true) == 14);

  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const int L = 1 + static_cast<int>(rng.integer(3));
    const int M = 1 + static_cast<int>(rng.integer(6));
    const bool has_kappa = rng.uniform() < 0.5;
    Eigen::VectorXd v(param_dim(L, M, has_kappa));
    for (int i = 0; i < v.size(); ++i) v[i] = rng.normal();
    ShapeParams p = unpack(v, L, M, has_kappa);
    CHECK((pack(p) - v).norm() == 0.0);
  }

  CHECK_THROWS_AS(unpack(Eigen::VectorXd::Zero(12), 1, 5, false), std::invalid_argument);
}
