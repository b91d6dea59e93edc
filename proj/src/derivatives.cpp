#include "iscat/derivatives.hpp"

#include <cmath>

#include "iscat/parallel.hpp"
#include "iscat/special_functions.hpp"

namespace iscat {

Eigen::VectorXcd arc_derivative(const DiscretizedCurve& curve, const Eigen::VectorXcd& f) {
  const Eigen::MatrixXd& D = spectral_diff_matrix(curve.size());
  Eigen::VectorXcd df = D.cast<cdouble>() * f;
  return df.cwiseQuotient(curve.speed.cast<cdouble>());
}

Eigen::Matrix2Xd direction_field(const DiscretizedCurve& curve, int param_index, int modes) {
  const int n = curve.size();
  Eigen::Matrix2Xd V(2, n);
  if (param_index == 0) {
    V.row(0).setOnes();
    V.row(1).setZero();
    return V;
  }
  if (param_index == 1) {
    V.row(0).setZero();
    V.row(1).setOnes();
    return V;
  }
  const int k = param_index - 2;  // 0 -> a_0, 1..M -> a_m, M+1..2M -> b_m
  for (int i = 0; i < n; ++i) {
    const double t = curve.t[i];  // already in [0, 2 pi)
    double amp;
    if (k == 0) {
      amp = 1.0;
    } else if (k <= modes) {
      amp = 2.0 * std::cos(k * t);
    } else {
      amp = 2.0 * std::sin((k - modes) * t);
    }
    V.col(i) = amp * Vec2(std::cos(t), std::sin(t));
  }
  return V;
}

FrechetJumps frechet_jumps(const BoundarySolution& forward, int comp_index,
                           const Eigen::Matrix2Xd& V) {
  const double beta = forward.beta;
  const double ke2 = forward.kappa_e * forward.kappa_e;
  const double ki2 = forward.kappa_i * forward.kappa_i;

  FrechetJumps jumps;
  const int L = static_cast<int>(forward.curves.size());
  jumps.gD.resize(L);
  jumps.gN.resize(L);
  for (int b = 0; b < L; ++b) {
    const int n = forward.curves[b].size();
    jumps.gD[b] = Eigen::VectorXcd::Zero(n);
    jumps.gN[b] = Eigen::VectorXcd::Zero(n);
  }

  const DiscretizedCurve& c = forward.curves[comp_index];
  const int n = c.size();
  Eigen::VectorXd vn(n);
  for (int i = 0; i < n; ++i) vn[i] = V.col(i).dot(c.normal.col(i));

  // On the boundary u- = u+ = phi and dn u+ = beta dn u-.
  const Eigen::VectorXcd& u = forward.interior_dirichlet[comp_index];
  const Eigen::VectorXcd& dnu = forward.interior_neumann[comp_index];

  jumps.gD[comp_index] = -(1.0 - beta) * vn.cast<cdouble>().cwiseProduct(dnu);

  const Eigen::VectorXcd du_ds = arc_derivative(c, u);
  Eigen::VectorXcd tang = (beta - 1.0) * vn.cast<cdouble>().cwiseProduct(du_ds);
  jumps.gN[comp_index] = arc_derivative(c, tang) +
                         (beta * ki2 - ke2) * vn.cast<cdouble>().cwiseProduct(u);
  return jumps;
}

Eigen::VectorXcd frechet_shape_solve(const TransmissionSolver& solver,
                                     const BoundarySolution& forward, int comp_index,
                                     const Eigen::Matrix2Xd& V,
                                     const std::vector<Vec2>& detectors) {
  const FrechetJumps jumps = frechet_jumps(forward, comp_index, V);
  const BoundarySolution lin = solver.solve(jumps.gD, jumps.gN);
  return lin.evaluate_exterior(detectors);
}

Eigen::VectorXcd frechet_kappa_column(const ShapeParams& params, const Scene& scene,
                                      int n_bem, double rel_step,
                                      const Eigen::VectorXcd& u_at_kappa) {
  const double t = rel_step * scene.kappa_i;
  Scene bumped = scene;
  bumped.kappa_i = scene.kappa_i + t;
  auto sol = solve_transmission(params, bumped, n_bem);
  const Eigen::VectorXcd u_plus = eval_total_field(sol, bumped, scene.detectors);
  return (u_plus - u_at_kappa) / t;
}

Eigen::MatrixXcd assemble_jacobian(const ShapeParams& params, const Scene& scene,
                                   int n_bem, bool kappa_column, double kappa_rel_step,
                                   int threads) {
  const int L = params.count();
  const int M = params.modes();
  const int per_comp = component_dim(M);
  const int n_shape = L * per_comp;
  const int n_cols = n_shape + (kappa_column ? 1 : 0);
  const int n_det = static_cast<int>(scene.detectors.size());

  TransmissionSolver solver(discretize_all(params, n_bem), scene.kappa_e, scene.kappa_i,
                            scene.beta);
  const BoundarySolution forward = solver.solve_incident(scene);

  Eigen::MatrixXcd jac(n_det, n_cols);
  parallel_for(
      n_shape,
      [&](std::size_t col) {
        const int comp = static_cast<int>(col) / per_comp;
        const int local = static_cast<int>(col) % per_comp;
        const Eigen::Matrix2Xd V = direction_field(forward.curves[comp], local, M);
        jac.col(col) = frechet_shape_solve(solver, forward, comp, V, scene.detectors);
      },
      threads);

  if (kappa_column) {
    Eigen::VectorXcd u_det = forward.evaluate_exterior(scene.detectors);
    for (int j = 0; j < n_det; ++j) u_det[j] += scene.u_inc(scene.detectors[j]);
    jac.col(n_shape) =
        frechet_kappa_column(params, scene, n_bem, kappa_rel_step, u_det);
  }
  return jac;
}

BoundarySolution adjoint_solve(const TransmissionSolver& solver,
                               const std::vector<Vec2>& detectors,
                               const Eigen::VectorXcd& chi) {
  const double ke = solver.kappa_e();
  const auto& curves = solver.curves();
  std::vector<Eigen::VectorXcd> gD(curves.size()), gN(curves.size());
  for (std::size_t b = 0; b < curves.size(); ++b) {
    const DiscretizedCurve& c = curves[b];
    gD[b].resize(c.size());
    gN[b].resize(c.size());
    for (int i = 0; i < c.size(); ++i) {
      const Vec2 x = c.q.col(i);
      cdouble val = 0.0;
      cdouble dn = 0.0;
      for (std::size_t j = 0; j < detectors.size(); ++j) {
        const Vec2 diff = x - detectors[j];
        const double r = diff.norm();
        val += hankel1_0(ke * r) * chi[j];
        dn += -ke * hankel1_1(ke * r) * (diff.dot(c.normal.col(i)) / r) * chi[j];
      }
      // Same sign convention as adjoint_incident_field: the incident part
      // solves the adjoint equation with +chi delta sources.
      gD[b][i] = -0.25 * iunit * val;
      gN[b][i] = -0.25 * iunit * dn;
    }
  }
  return solver.solve(gD, gN);
}

double shape_derivative_cost(const BoundarySolution& forward,
                             const BoundarySolution& adjoint, int comp_index,
                             const Eigen::Matrix2Xd& V) {
  const DiscretizedCurve& c = forward.curves[comp_index];
  const double beta = forward.beta;
  const double ke2 = forward.kappa_e * forward.kappa_e;
  const double ki2 = forward.kappa_i * forward.kappa_i;
  const int n = c.size();

  const Eigen::VectorXcd& u = forward.interior_dirichlet[comp_index];
  const Eigen::VectorXcd& dnu = forward.interior_neumann[comp_index];
  const Eigen::VectorXcd du_ds = arc_derivative(c, u);
  const Eigen::VectorXcd& p = adjoint.interior_dirichlet[comp_index];
  const Eigen::VectorXcd& dnp = adjoint.interior_neumann[comp_index];
  const Eigen::VectorXcd dp_ds = arc_derivative(c, p);

  cdouble acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double vn = V.col(i).dot(c.normal.col(i));
    const cdouble integrand = (1.0 - beta) * (beta * dnu[i] * dnp[i] + du_ds[i] * dp_ds[i]) +
                              (beta * ki2 - ke2) * u[i] * p[i];
    acc += integrand * vn * c.speed[i];
  }
  return std::real(acc) * 2.0 * pi / n;
}

MeasurementChain measurement_chain(const Eigen::VectorXcd& u_det, const DataVector& data) {
  if (data.op != Measurement::intensity)
    throw std::invalid_argument("measurement_chain: defined for intensity data only");
  if (u_det.size() != data.values.size())
    throw std::invalid_argument("measurement_chain: size mismatch");
  MeasurementChain chain;
  chain.mg = 2.0 * u_det;
  chain.mh.resize(u_det.size());
  for (Eigen::Index j = 0; j < u_det.size(); ++j)
    chain.mh[j] = 6.0 * std::norm(u_det[j]) - 2.0 * data.values[j].real();
  return chain;
}

}  // namespace iscat
