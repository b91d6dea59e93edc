#include "iscat/forward_solver.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "iscat/special_functions.hpp"

namespace iscat {

namespace {

constexpr double two_pi = 2.0 * pi;

// Boundary operators discretized on curve nodes; matrices act on nodal
// density values and include speed and quadrature factors.
struct OperatorSet {
  Eigen::MatrixXcd S;    // single layer
  Eigen::MatrixXcd K;    // double layer
  Eigen::MatrixXcd Kp;   // adjoint double layer
  Eigen::MatrixXcd Snn;  // single layer weighted by n(x).n(y), for Maue
};

// Kress splitting kernel = A * ln(4 sin^2((t-s)/2)) + B with analytic
// diagonal limits; spectrally accurate for smooth curves.
OperatorSet assemble_self(const DiscretizedCurve& c, double kappa) {
  const int n = c.size();
  const double w = two_pi / n;
  const Eigen::VectorXd& R = kress_log_weights(n);

  Eigen::VectorXd log4sin(n);  // ln(4 sin^2(pi k / n)), k = |i - j|
  for (int k = 1; k < n; ++k) {
    const double s = 2.0 * std::sin(pi * k / n);
    log4sin[k] = std::log(s * s);
  }

  OperatorSet ops;
  ops.S.resize(n, n);
  ops.K.resize(n, n);
  ops.Kp.resize(n, n);
  ops.Snn.resize(n, n);

  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if (i == j) {
        const double sp = c.speed[i];
        const cdouble s_diag =
            R[0] * (-sp / (4.0 * pi)) +
            w * sp *
                (iunit * 0.25 - euler_gamma / (2.0 * pi) -
                 std::log(0.5 * kappa * sp) / (2.0 * pi));
        ops.S(i, i) = s_diag;
        ops.Snn(i, i) = s_diag;
        const double curv = c.normal.col(i).dot(c.d2q.col(i)) / (4.0 * pi * sp);
        ops.K(i, i) = w * curv;
        ops.Kp(i, i) = w * curv;
        continue;
      }
      const Vec2 diff = c.q.col(j) - c.q.col(i);
      const double r = diff.norm();
      const double z = kappa * r;
      const cdouble h0 = hankel1_0(z);
      const cdouble h1 = hankel1_1(z);
      const double j0v = h0.real();
      const double j1v = h1.real();
      const double L = log4sin[j - i];

      auto split = [&](cdouble full, double logpart) {
        return cdouble(R[j - i] * logpart) + w * (full - logpart * L);
      };

      // single layer, both orientations share the kernel up to speed
      {
        const cdouble full_ij = 0.25 * iunit * h0 * c.speed[j];
        const double a_ij = -j0v * c.speed[j] / (4.0 * pi);
        ops.S(i, j) = split(full_ij, a_ij);
        const cdouble full_ji = 0.25 * iunit * h0 * c.speed[i];
        const double a_ji = -j0v * c.speed[i] / (4.0 * pi);
        ops.S(j, i) = split(full_ji, a_ji);
        const double f = c.normal.col(i).dot(c.normal.col(j));
        ops.Snn(i, j) = split(full_ij * f, a_ij * f);
        ops.Snn(j, i) = split(full_ji * f, a_ji * f);
      }
      // double layer and adjoint
      {
        const double d_ij = diff.dot(c.normal.col(j)) / r;   // source normal at j
        const double d_ji = -diff.dot(c.normal.col(i)) / r;  // source normal at i
        const cdouble fK_ij = -0.25 * iunit * kappa * h1 * d_ij * c.speed[j];
        const double aK_ij = kappa * j1v * d_ij * c.speed[j] / (4.0 * pi);
        ops.K(i, j) = split(fK_ij, aK_ij);
        const cdouble fK_ji = -0.25 * iunit * kappa * h1 * d_ji * c.speed[i];
        const double aK_ji = kappa * j1v * d_ji * c.speed[i] / (4.0 * pi);
        ops.K(j, i) = split(fK_ji, aK_ji);
        // Kp(i,j): kernel with target normal at i acting on (x_i - y_j)
        const double e_ij = -diff.dot(c.normal.col(i)) / r;
        const cdouble fKp_ij = -0.25 * iunit * kappa * h1 * e_ij * c.speed[j];
        const double aKp_ij = kappa * j1v * e_ij * c.speed[j] / (4.0 * pi);
        ops.Kp(i, j) = split(fKp_ij, aKp_ij);
        const double e_ji = diff.dot(c.normal.col(j)) / r;
        const cdouble fKp_ji = -0.25 * iunit * kappa * h1 * e_ji * c.speed[i];
        const double aKp_ji = kappa * j1v * e_ji * c.speed[i] / (4.0 * pi);
        ops.Kp(j, i) = split(fKp_ji, aKp_ji);
      }
    }
  }
  return ops;
}

// Smooth kernels between disjoint curves: plain trapezoid rule.
void assemble_cross(const DiscretizedCurve& ca, const DiscretizedCurve& cb,
                    double kappa, OperatorSet& ab, OperatorSet& ba) {
  const int na = ca.size(), nb = cb.size();
  const double wa = two_pi / na, wb = two_pi / nb;
  ab.S.resize(na, nb);
  ab.K.resize(na, nb);
  ab.Kp.resize(na, nb);
  ab.Snn.resize(na, nb);
  ba.S.resize(nb, na);
  ba.K.resize(nb, na);
  ba.Kp.resize(nb, na);
  ba.Snn.resize(nb, na);
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < nb; ++j) {
      const Vec2 diff = cb.q.col(j) - ca.q.col(i);
      const double r = diff.norm();
      const double z = kappa * r;
      const cdouble h0 = hankel1_0(z);
      const cdouble h1 = hankel1_1(z);
      const double f = ca.normal.col(i).dot(cb.normal.col(j));
      const cdouble s_base = 0.25 * iunit * h0;
      const cdouble k_base = -0.25 * iunit * kappa * h1 / r;

      ab.S(i, j) = wb * s_base * cb.speed[j];
      ab.Snn(i, j) = f * ab.S(i, j);
      ab.K(i, j) = wb * k_base * diff.dot(cb.normal.col(j)) * cb.speed[j];
      ab.Kp(i, j) = wb * k_base * (-diff.dot(ca.normal.col(i))) * cb.speed[j];

      ba.S(j, i) = wa * s_base * ca.speed[i];
      ba.Snn(j, i) = f * ba.S(j, i);
      ba.K(j, i) = wa * k_base * (-diff.dot(ca.normal.col(i))) * ca.speed[i];
      ba.Kp(j, i) = wa * k_base * diff.dot(cb.normal.col(j)) * ca.speed[i];
    }
  }
}

}  // namespace

const Eigen::VectorXd& kress_log_weights(int n) {
  static std::map<int, Eigen::VectorXd> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  Eigen::VectorXd R(n);
  const int half = n / 2;
  for (int k = 0; k < n; ++k) {
    double acc = 0.0;
    for (int m = 1; m < half; ++m) acc += std::cos(two_pi * m * k / n) / m;
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    R[k] = -(4.0 * pi / n) * acc - (4.0 * pi / (double(n) * n)) * sign;
  }
  return cache.emplace(n, std::move(R)).first->second;
}

struct TransmissionSolver::Impl {
  std::vector<DiscretizedCurve> curves;
  double kappa_e, kappa_i, beta;
  std::vector<int> offset;  // block offset of each curve in the unknown vector
  int total = 0;
  std::vector<OperatorSet> self_e, self_i;          // per curve
  std::vector<std::vector<OperatorSet>> cross_e;    // [target][source], empty on diagonal
  std::vector<Eigen::MatrixXd> ds;                  // arc-length differentiation
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu;
  double rcond = 1.0;

  // T g = d/ds S [dg/ds] + kappa^2 Snn g (Maue), as a matrix-free action.
  Eigen::VectorXcd apply_T(const OperatorSet& ops, const Eigen::MatrixXd& ds_target,
                           const Eigen::MatrixXd& ds_source, double kappa,
                           const Eigen::VectorXcd& g) const {
    return ds_target * (ops.S * (ds_source * g)) + kappa * kappa * (ops.Snn * g);
  }

  Eigen::MatrixXcd t_matrix(const OperatorSet& ops, const Eigen::MatrixXd& ds_target,
                            const Eigen::MatrixXd& ds_source, double kappa) const {
    return ds_target * ops.S * ds_source + kappa * kappa * ops.Snn;
  }
};

TransmissionSolver::TransmissionSolver(std::vector<DiscretizedCurve> curves,
                                       double kappa_e, double kappa_i, double beta)
    : impl_(std::make_unique<Impl>()) {
  if (curves.empty()) throw std::invalid_argument("TransmissionSolver: no boundaries");
  if (kappa_e <= 0.0 || kappa_i <= 0.0 || beta <= 0.0)
    throw std::invalid_argument("TransmissionSolver: wavenumbers and beta must be positive");
  Impl& s = *impl_;
  s.curves = std::move(curves);
  s.kappa_e = kappa_e;
  s.kappa_i = kappa_i;
  s.beta = beta;

  const int L = static_cast<int>(s.curves.size());
  s.offset.resize(L);
  for (int a = 0; a < L; ++a) {
    s.offset[a] = s.total;
    s.total += 2 * s.curves[a].size();
  }

  s.self_e.reserve(L);
  s.self_i.reserve(L);
  s.ds.reserve(L);
  for (int a = 0; a < L; ++a) {
    s.self_e.push_back(assemble_self(s.curves[a], kappa_e));
    s.self_i.push_back(assemble_self(s.curves[a], kappa_i));
    const Eigen::MatrixXd& D = spectral_diff_matrix(s.curves[a].size());
    s.ds.push_back(s.curves[a].speed.cwiseInverse().asDiagonal() * D);
  }
  s.cross_e.assign(L, std::vector<OperatorSet>(L));
  for (int a = 0; a < L; ++a)
    for (int b = a + 1; b < L; ++b)
      assemble_cross(s.curves[a], s.curves[b], kappa_e, s.cross_e[a][b], s.cross_e[b][a]);

  // Combined Calderon rows: first block row couples Dirichlet traces, the
  // second the fluxes with the hypersingular difference T_e - T_i.
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(s.total, s.total);
  for (int a = 0; a < L; ++a) {
    const int na = s.curves[a].size();
    const int ra = s.offset[a];
    auto id = Eigen::MatrixXcd::Identity(na, na);
    A.block(ra, ra, na, na) = id + s.self_i[a].K - s.self_e[a].K;
    A.block(ra, ra + na, na, na) = beta * s.self_e[a].S - s.self_i[a].S;
    A.block(ra + na, ra, na, na) =
        s.ds[a] * (s.self_e[a].S - s.self_i[a].S) * s.ds[a] +
        kappa_e * kappa_e * s.self_e[a].Snn - kappa_i * kappa_i * s.self_i[a].Snn;
    A.block(ra + na, ra + na, na, na) =
        -0.5 * (beta + 1.0) * id - beta * s.self_e[a].Kp + s.self_i[a].Kp;
    for (int b = 0; b < L; ++b) {
      if (b == a) continue;
      const int nb = s.curves[b].size();
      const int cb = s.offset[b];
      A.block(ra, cb, na, nb) = -s.cross_e[a][b].K;
      A.block(ra, cb + nb, na, nb) = beta * s.cross_e[a][b].S;
      A.block(ra + na, cb, na, nb) =
          s.t_matrix(s.cross_e[a][b], s.ds[a], s.ds[b], kappa_e);
      A.block(ra + na, cb + nb, na, nb) = -beta * s.cross_e[a][b].Kp;
    }
  }
  s.lu.compute(A);
  s.rcond = s.lu.rcond();
  if (!(s.rcond > 1e-13))
    throw SolverError("TransmissionSolver: boundary system is numerically singular", s.rcond);
}

TransmissionSolver::~TransmissionSolver() = default;
TransmissionSolver::TransmissionSolver(TransmissionSolver&&) noexcept = default;
TransmissionSolver& TransmissionSolver::operator=(TransmissionSolver&&) noexcept = default;

const std::vector<DiscretizedCurve>& TransmissionSolver::curves() const {
  return impl_->curves;
}

double TransmissionSolver::kappa_e() const { return impl_->kappa_e; }
double TransmissionSolver::kappa_i() const { return impl_->kappa_i; }
double TransmissionSolver::beta() const { return impl_->beta; }
double TransmissionSolver::rcond() const { return impl_->rcond; }

BoundarySolution TransmissionSolver::solve(const std::vector<Eigen::VectorXcd>& gD,
                                           const std::vector<Eigen::VectorXcd>& gN) const {
  const Impl& s = *impl_;
  const int L = static_cast<int>(s.curves.size());
  if (static_cast<int>(gD.size()) != L || static_cast<int>(gN.size()) != L)
    throw std::invalid_argument("TransmissionSolver::solve: jump data count mismatch");

  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(s.total);
  for (int a = 0; a < L; ++a) {
    const int na = s.curves[a].size();
    Eigen::VectorXcd r1 = 0.5 * gD[a] - s.self_e[a].K * gD[a] + s.self_e[a].S * gN[a];
    Eigen::VectorXcd r2 = s.apply_T(s.self_e[a], s.ds[a], s.ds[a], s.kappa_e, gD[a]) -
                          0.5 * gN[a] - s.self_e[a].Kp * gN[a];
    for (int b = 0; b < L; ++b) {
      if (b == a) continue;
      r1 += -s.cross_e[a][b].K * gD[b] + s.cross_e[a][b].S * gN[b];
      r2 += s.apply_T(s.cross_e[a][b], s.ds[a], s.ds[b], s.kappa_e, gD[b]) -
            s.cross_e[a][b].Kp * gN[b];
    }
    rhs.segment(s.offset[a], na) = r1;
    rhs.segment(s.offset[a] + na, na) = r2;
  }

  const Eigen::VectorXcd x = s.lu.solve(rhs);

  BoundarySolution sol;
  sol.kappa_e = s.kappa_e;
  sol.kappa_i = s.kappa_i;
  sol.beta = s.beta;
  sol.curves = s.curves;
  sol.rcond = s.rcond;
  sol.interior_dirichlet.resize(L);
  sol.interior_neumann.resize(L);
  sol.exterior_dirichlet.resize(L);
  sol.exterior_neumann.resize(L);
  for (int a = 0; a < L; ++a) {
    const int na = s.curves[a].size();
    sol.interior_dirichlet[a] = x.segment(s.offset[a], na);
    sol.interior_neumann[a] = x.segment(s.offset[a] + na, na);
    sol.exterior_dirichlet[a] = sol.interior_dirichlet[a] - gD[a];
    sol.exterior_neumann[a] = s.beta * sol.interior_neumann[a] - gN[a];
  }
  return sol;
}

BoundarySolution TransmissionSolver::solve_incident(const Scene& scene) const {
  const Impl& s = *impl_;
  std::vector<Eigen::VectorXcd> gD(s.curves.size()), gN(s.curves.size());
  for (std::size_t a = 0; a < s.curves.size(); ++a) {
    const DiscretizedCurve& c = s.curves[a];
    gD[a].resize(c.size());
    gN[a].resize(c.size());
    for (int i = 0; i < c.size(); ++i) {
      gD[a][i] = scene.u_inc(c.q.col(i));
      gN[a][i] = scene.dn_u_inc(c.q.col(i), c.normal.col(i));
    }
  }
  return solve(gD, gN);
}

Eigen::VectorXcd BoundarySolution::evaluate_exterior(const std::vector<Vec2>& points) const {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(points.size());
  for (std::size_t b = 0; b < curves.size(); ++b) {
    const DiscretizedCurve& c = curves[b];
    const double w = two_pi / c.size();
    for (std::size_t p = 0; p < points.size(); ++p) {
      cdouble acc = 0.0;
      for (int j = 0; j < c.size(); ++j) {
        const Vec2 diff = c.q.col(j) - points[p];
        const double r = diff.norm();
        const double z = kappa_e * r;
        const cdouble dlp =
            -0.25 * iunit * kappa_e * hankel1_1(z) * (diff.dot(c.normal.col(j)) / r);
        const cdouble slp = 0.25 * iunit * hankel1_0(z);
        acc += (dlp * exterior_dirichlet[b][j] - slp * exterior_neumann[b][j]) *
               c.speed[j];
      }
      out[p] += w * acc;
    }
  }
  return out;
}

BoundarySolution solve_transmission(const ShapeParams& params, const Scene& scene,
                                    int n_bem) {
  TransmissionSolver solver(discretize_all(params, n_bem), scene.kappa_e,
                            scene.kappa_i, scene.beta);
  return solver.solve_incident(scene);
}

Eigen::VectorXcd eval_total_field(const BoundarySolution& sol, const Scene& scene,
                                  const std::vector<Vec2>& points) {
  for (const auto& p : points) {
    for (const auto& c : sol.curves) {
      if (c.contains(p))
        throw std::invalid_argument("eval_total_field: point inside an obstacle");
      if (c.distance_to_nodes(p) < c.perimeter() / c.size())
        throw std::invalid_argument("eval_total_field: point too close to a boundary");
    }
  }
  Eigen::VectorXcd u = sol.evaluate_exterior(points);
  for (std::size_t p = 0; p < points.size(); ++p) u[p] += scene.u_inc(points[p]);
  return u;
}

}  // namespace iscat
