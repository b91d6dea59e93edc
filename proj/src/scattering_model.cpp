#include "iscat/scattering_model.hpp"

#include <atomic>
#include <mutex>
#include <unordered_map>

#include "iscat/derivatives.hpp"
#include "iscat/forward_solver.hpp"

namespace iscat {

namespace {

std::uint64_t fnv1a(const Eigen::VectorXd& v) {
  const auto* bytes = reinterpret_cast<const unsigned char*>(v.data());
  const std::size_t n = static_cast<std::size_t>(v.size()) * sizeof(double);
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

struct ScatteringModel::Impl {
  Scene scene;
  int count;
  int modes;
  int n_bem;
  bool infer_kappa;
  int threads;

  mutable std::mutex cache_mutex;
  mutable std::unordered_map<std::uint64_t, std::pair<Eigen::VectorXd, Eigen::VectorXcd>>
      cache;
  mutable std::atomic<std::uint64_t> solves{0};

  static constexpr std::size_t cache_cap = 4096;

  Eigen::VectorXcd solve_field(const Eigen::VectorXd& nu) const {
    ShapeParams params = unpack(nu, count, modes, infer_kappa);
    if (!is_admissible(params))
      throw InadmissibleError("ScatteringModel: inadmissible parameters");
    Scene sc = scene;
    if (infer_kappa) sc.kappa_i = *params.kappa_i;
    auto sol = solve_transmission(params, sc, n_bem);
    solves.fetch_add(1, std::memory_order_relaxed);
    return eval_total_field(sol, sc, sc.detectors);
  }
};

ScatteringModel::ScatteringModel(Scene scene, int count, int modes, int n_bem,
                                 bool infer_kappa, int threads)
    : impl_(std::make_unique<Impl>()) {
  impl_->scene = std::move(scene);
  impl_->count = count;
  impl_->modes = modes;
  impl_->n_bem = n_bem;
  impl_->infer_kappa = infer_kappa;
  impl_->threads = threads;
}

ScatteringModel::~ScatteringModel() = default;
ScatteringModel::ScatteringModel(ScatteringModel&&) noexcept = default;
ScatteringModel& ScatteringModel::operator=(ScatteringModel&&) noexcept = default;

Eigen::VectorXcd ScatteringModel::field(const Eigen::VectorXd& nu) const {
  const std::uint64_t key = fnv1a(nu);
  {
    std::lock_guard<std::mutex> lock(impl_->cache_mutex);
    auto it = impl_->cache.find(key);
    if (it != impl_->cache.end() && it->second.first == nu) return it->second.second;
  }
  Eigen::VectorXcd u = impl_->solve_field(nu);
  {
    std::lock_guard<std::mutex> lock(impl_->cache_mutex);
    if (impl_->cache.size() >= Impl::cache_cap) impl_->cache.clear();
    impl_->cache.emplace(key, std::make_pair(nu, u));
  }
  return u;
}

Eigen::MatrixXcd ScatteringModel::jacobian(const Eigen::VectorXd& nu) const {
  ShapeParams params = unpack_params(nu);
  if (!is_admissible(params))
    throw InadmissibleError("ScatteringModel: inadmissible parameters");
  Scene sc = scene_for(nu);
  return assemble_jacobian(params, sc, impl_->n_bem, impl_->infer_kappa, 1e-4,
                           impl_->threads);
}

bool ScatteringModel::admissible(const Eigen::VectorXd& nu) const {
  if (nu.size() != parameter_dim()) return false;
  return is_admissible(unpack_params(nu));
}

ShapeParams ScatteringModel::unpack_params(const Eigen::VectorXd& nu) const {
  return unpack(nu, impl_->count, impl_->modes, impl_->infer_kappa);
}

Scene ScatteringModel::scene_for(const Eigen::VectorXd& nu) const {
  Scene sc = impl_->scene;
  if (impl_->infer_kappa) {
    ShapeParams params = unpack_params(nu);
    sc.kappa_i = *params.kappa_i;
  }
  return sc;
}

int ScatteringModel::parameter_dim() const {
  return param_dim(impl_->count, impl_->modes, impl_->infer_kappa);
}

int ScatteringModel::detector_count() const {
  return static_cast<int>(impl_->scene.detectors.size());
}

int ScatteringModel::n_bem() const { return impl_->n_bem; }
bool ScatteringModel::infer_kappa() const { return impl_->infer_kappa; }
const Scene& ScatteringModel::scene() const { return impl_->scene; }

double ScatteringModel::self_convergence_error(const Eigen::VectorXd& nu) const {
  ShapeParams params = unpack_params(nu);
  Scene sc = scene_for(nu);
  auto u1 = eval_total_field(solve_transmission(params, sc, impl_->n_bem), sc, sc.detectors);
  auto u2 =
      eval_total_field(solve_transmission(params, sc, 2 * impl_->n_bem), sc, sc.detectors);
  return (u1 - u2).norm() / u2.norm();
}

std::uint64_t ScatteringModel::solve_count() const {
  return impl_->solves.load(std::memory_order_relaxed);
}

}  // namespace iscat
