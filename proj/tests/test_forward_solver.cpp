#include <cmath>
#include <vector>

#include "doctest.h"
#include "iscat/curve.hpp"
#include "iscat/forward_solver.hpp"
#include "iscat/mie_reference.hpp"
#include "iscat/special_functions.hpp"

using namespace iscat;

namespace {

Scene holography_scene(double ke = 12.56, double ki = 15.12, double beta = 1.0) {
  Scene sc;
  sc.kappa_e = ke;
  sc.kappa_i = ki;
  sc.beta = beta;
  sc.detectors = detector_line();
  return sc;
}

double rel_l2(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  return (a - b).norm() / b.norm();
}

// Radiating point source, exact solution of the exterior Helmholtz equation.
cdouble source_value(double kappa, const Vec2& x, const Vec2& y0) {
  return 0.25 * iunit * hankel1_0(kappa * (x - y0).norm());
}

Eigen::Vector2cd source_gradient(double kappa, const Vec2& x, const Vec2& y0) {
  const Vec2 d = x - y0;
  const double r = d.norm();
  const cdouble factor = -0.25 * iunit * kappa * hankel1_1(kappa * r) / r;
  return factor * d;
}

}  // namespace

TEST_CASE("spectral differentiation matrix differentiates trigonometric modes") {
  const int n = 32;
  const auto& D = spectral_diff_matrix(n);
  Eigen::VectorXd f(n), g(n);
  for (int m : {1, 3, 7}) {
    for (int i = 0; i < n; ++i) {
      const double t = 2.0 * pi * i / n;
      f[i] = std::sin(m * t);
      g[i] = m * std::cos(m * t);
    }
    CHECK((D * f - g).norm() < 1e-10 * g.norm());
  }
}

TEST_CASE("log-singular quadrature weights reproduce Fourier integrals") {
  // int_0^{2pi} ln(4 sin^2((t-s)/2)) cos(m s) ds = -(2 pi / m) cos(m t)
  const int n = 64;
  const auto& R = kress_log_weights(n);
  for (int m : {0, 1, 2, 5, 11}) {
    const int i = 3;  // collocation at t_3
    const double t = 2.0 * pi * i / n;
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const double s = 2.0 * pi * j / n;
      const int k = std::abs(i - j);
      acc += R[k] * std::cos(m * s);
    }
    const double expect = (m == 0) ? 0.0 : -(2.0 * pi / m) * std::cos(m * t);
    CHECK(acc == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("manufactured transmission solution on an ellipse") {
  // Interior: plane wave at kappa_i (entire). Exterior: point source inside
  // the obstacle (radiating). Their traces define jump data that the solver
  // must reproduce exactly.
  const double ke = 12.56, ki = 15.12, beta = 1.7;
  const Vec2 center(0.2, -0.1);
  const Vec2 y0 = center + Vec2(0.03, 0.02);
  auto curve = discretize_ellipse(center, 0.2, 0.1, 96);
  const Vec2 dir = Vec2(1.0, 2.0).normalized();

  const int n = curve.size();
  Eigen::VectorXcd gD(n), gN(n), wi_exact(n), we_exact(n);
  for (int i = 0; i < n; ++i) {
    const Vec2 x = curve.q.col(i);
    const Vec2 nv = curve.normal.col(i);
    const cdouble wi = std::exp(iunit * ki * dir.dot(x));
    const Eigen::Vector2cd grad_wi = iunit * ki * wi * dir.cast<cdouble>();
    const cdouble we = source_value(ke, x, y0);
    const Eigen::Vector2cd grad_we = source_gradient(ke, x, y0);
    wi_exact[i] = wi;
    we_exact[i] = we;
    gD[i] = wi - we;
    gN[i] = beta * (grad_wi[0] * nv.x() + grad_wi[1] * nv.y()) -
            (grad_we[0] * nv.x() + grad_we[1] * nv.y());
  }

  TransmissionSolver solver({curve}, ke, ki, beta);
  auto sol = solver.solve({gD}, {gN});

  CHECK(rel_l2(sol.interior_dirichlet[0], wi_exact) < 1e-9);
  CHECK(rel_l2(sol.exterior_dirichlet[0], we_exact) < 1e-9);

  std::vector<Vec2> pts{{2.0, 1.0}, {-1.5, 0.7}, {0.0, 5.0}};
  Eigen::VectorXcd expect(3);
  for (int p = 0; p < 3; ++p) expect[p] = source_value(ke, pts[p], y0);
  CHECK(rel_l2(sol.evaluate_exterior(pts), expect) < 1e-9);
}

TEST_CASE("manufactured solution with two components") {
  const double ke = 12.56, ki = 15.12, beta = 1.0;
  std::vector<DiscretizedCurve> curves;
  curves.push_back(discretize(ComponentParams::circle(-0.6, 0.0, 0.2, 2), 64));
  curves.push_back(discretize_ellipse(Vec2(0.7, 0.3), 0.25, 0.15, 64));
  const std::vector<Vec2> sources{{-0.6, 0.0}, {0.72, 0.28}};
  const Vec2 dir = Vec2(0.0, 1.0);

  std::vector<Eigen::VectorXcd> gD(2), gN(2), we_exact(2);
  for (int b = 0; b < 2; ++b) {
    const auto& c = curves[b];
    gD[b].resize(c.size());
    gN[b].resize(c.size());
    we_exact[b].resize(c.size());
    for (int i = 0; i < c.size(); ++i) {
      const Vec2 x = c.q.col(i);
      const Vec2 nv = c.normal.col(i);
      const cdouble wi = std::exp(iunit * ki * dir.dot(x));
      const Eigen::Vector2cd grad_wi = iunit * ki * wi * dir.cast<cdouble>();
      cdouble we = 0.0;
      Eigen::Vector2cd grad_we = Eigen::Vector2cd::Zero();
      for (const auto& y0 : sources) {
        we += source_value(ke, x, y0);
        grad_we += source_gradient(ke, x, y0);
      }
      we_exact[b][i] = we;
      gD[b][i] = wi - we;
      gN[b][i] = beta * (grad_wi[0] * nv.x() + grad_wi[1] * nv.y()) -
                 (grad_we[0] * nv.x() + grad_we[1] * nv.y());
    }
  }

  TransmissionSolver solver(curves, ke, ki, beta);
  auto sol = solver.solve(gD, gN);
  CHECK(rel_l2(sol.exterior_dirichlet[0], we_exact[0]) < 1e-8);
  CHECK(rel_l2(sol.exterior_dirichlet[1], we_exact[1]) < 1e-8);

  std::vector<Vec2> pts{{0.0, 5.0}, {3.0, -2.0}};
  Eigen::VectorXcd expect(2);
  for (int p = 0; p < 2; ++p) {
    expect[p] = source_value(ke, pts[p], sources[0]) + source_value(ke, pts[p], sources[1]);
  }
  CHECK(rel_l2(sol.evaluate_exterior(pts), expect) < 1e-8);
}

TEST_CASE("zero contrast: total field equals the incident wave") {
  Scene sc = holography_scene(12.56, 12.56, 1.0);
  ShapeParams params;
  params.components.push_back(ComponentParams::circle(0, 0, 0.2, 5));
  auto sol = solve_transmission(params, sc, 128);
  auto u = eval_total_field(sol, sc, sc.detectors);
  double max_err = 0.0;
  for (int j = 0; j < u.size(); ++j)
    max_err = std::max(max_err, std::abs(u[j] - sc.u_inc(sc.detectors[j])));
  CHECK(max_err < 1e-10);
}

TEST_CASE("Mie reference: zero contrast and truncation self-consistency") {
  Scene sc = holography_scene(12.56, 12.56, 1.0);
  std::vector<Vec2> pts{{0.0, 5.0}, {1.7, 4.2}};
  auto u = mie_circle_reference(0.2, Vec2(0, 0), sc, pts);
  CHECK(std::abs(u[0] - sc.u_inc(pts[0])) < 1e-13);

  Scene sc2 = holography_scene();
  auto u_lo = mie_circle_reference(0.2, Vec2(0, 0), sc2, pts, 40);
  auto u_hi = mie_circle_reference(0.2, Vec2(0, 0), sc2, pts, 200);
  CHECK((u_lo - u_hi).norm() < 1e-12);
}

TEST_CASE("solver matches the Mie series on the reference circle") {
  Scene sc = holography_scene();
  ShapeParams params;
  params.components.push_back(ComponentParams::circle(0, 0, 0.2, 5));
  auto sol = solve_transmission(params, sc, 256);
  auto u_bem = eval_total_field(sol, sc, sc.detectors);
  auto u_mie = mie_circle_reference(0.2, Vec2(0, 0), sc, sc.detectors);
  CHECK(rel_l2(u_bem, u_mie) < 1e-6);
}

TEST_CASE("solver matches Mie for an off-center circle at high wavenumber") {
  Scene sc = holography_scene(20.56, 25.12, 1.0);
  ShapeParams params;
  params.components.push_back(ComponentParams::circle(0.4, -0.2, 0.3, 5));
  auto sol = solve_transmission(params, sc, 192);
  auto u_bem = eval_total_field(sol, sc, sc.detectors);
  auto u_mie = mie_circle_reference(0.3, Vec2(0.4, -0.2), sc, sc.detectors);
  CHECK(rel_l2(u_bem, u_mie) < 1e-6);
}

TEST_CASE("self-convergence when doubling the boundary resolution") {
  Scene sc = holography_scene(20.56, 25.12, 1.0);
  ShapeParams params;
  ComponentParams comp = ComponentParams::circle(0.1, 0.0, 0.25, 5);
  comp.cos_coef[2] = 0.02;
  comp.sin_coef[1] = 0.015;
  params.components.push_back(comp);
  auto u64 = eval_total_field(solve_transmission(params, sc, 96), sc, sc.detectors);
  auto u128 = eval_total_field(solve_transmission(params, sc, 192), sc, sc.detectors);
  CHECK(rel_l2(u64, u128) < 1e-7);
}

TEST_CASE("scattered field decays like 1/sqrt(r) along the detector direction") {
  Scene sc = holography_scene();
  ShapeParams params;
  params.components.push_back(ComponentParams::circle(0, 0, 0.1, 2));
  auto sol = solve_transmission(params, sc, 96);
  const double r1 = 40.0, r2 = 160.0;
  auto u = sol.evaluate_exterior({Vec2(0.0, r1), Vec2(0.0, r2)});
  const double decay = std::log(std::abs(u[0]) / std::abs(u[1])) / std::log(r2 / r1);
  CHECK(decay == doctest::Approx(0.5).epsilon(0.10));
}

TEST_CASE("linearity of the solve in the jump data") {
  const double ke = 12.56, ki = 15.12;
  auto curve = discretize(ComponentParams::circle(0, 0, 0.2, 3), 64);
  TransmissionSolver solver({curve}, ke, ki, 1.0);
  const int n = curve.size();
  Eigen::VectorXcd gD(n), gN(n);
  for (int i = 0; i < n; ++i) {
    gD[i] = cdouble(std::cos(curve.t[i]), std::sin(2 * curve.t[i]));
    gN[i] = cdouble(std::sin(curve.t[i]), 0.3);
  }
  const cdouble alpha(1.3, -0.7);
  auto s1 = solver.solve({gD}, {gN});
  auto s2 = solver.solve({Eigen::VectorXcd(alpha * gD)}, {Eigen::VectorXcd(alpha * gN)});
  CHECK((s2.interior_dirichlet[0] - alpha * s1.interior_dirichlet[0]).norm() <
        1e-12 * s1.interior_dirichlet[0].norm() * std::abs(alpha));
}

TEST_CASE("field evaluation rejects interior and near-boundary points") {
  Scene sc = holography_scene();
  ShapeParams params;
  params.components.push_back(ComponentParams::circle(0, 0, 0.2, 5));
  auto sol = solve_transmission(params, sc, 64);
  CHECK_THROWS_AS(eval_total_field(sol, sc, {Vec2(0.05, 0.0)}), std::invalid_argument);
  CHECK_THROWS_AS(eval_total_field(sol, sc, {Vec2(0.2005, 0.0)}), std::invalid_argument);
}
