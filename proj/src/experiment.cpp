#include "iscat/experiment.hpp"

#include <fstream>
#include <iostream>
#include <set>

#include "json.hpp"

#include "iscat/csv.hpp"
#include "iscat/forward_solver.hpp"
#include "iscat/laplace_sampler.hpp"
#include "iscat/parallel.hpp"
#include "iscat/rng.hpp"

namespace iscat {

using nlohmann::json;

namespace {

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("invalid value for '" + key + "': " + e.what());
  }
}

Vec2 get_vec2(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2)
    throw ConfigError(where + ": expected [x, y]");
  return {v[0].get<double>(), v[1].get<double>()};
}

TruthShape parse_truth(const json& v, int index) {
  const std::string where = "truth[" + std::to_string(index) + "]";
  require_keys(v, where,
               {"type", "center", "radius", "semi_x", "semi_y", "coefficients"});
  TruthShape shape;
  const std::string type = v.at("type").get<std::string>();
  if (v.contains("center")) shape.center = get_vec2(v.at("center"), where);
  if (type == "circle") {
    shape.kind = TruthShape::Kind::circle;
    shape.radius = v.at("radius").get<double>();
    if (shape.radius <= 0) throw ConfigError(where + ": radius must be positive");
  } else if (type == "ellipse") {
    shape.kind = TruthShape::Kind::ellipse;
    shape.semi_x = v.at("semi_x").get<double>();
    shape.semi_y = v.at("semi_y").get<double>();
    if (shape.semi_x <= 0 || shape.semi_y <= 0)
      throw ConfigError(where + ": semi-axes must be positive");
  } else if (type == "egg") {
    shape.kind = TruthShape::Kind::egg;
    shape.radius = v.at("radius").get<double>();
    if (shape.radius <= 0) throw ConfigError(where + ": radius must be positive");
  } else if (type == "fourier") {
    shape.kind = TruthShape::Kind::fourier;
    const auto& c = v.at("coefficients");
    if (!c.is_array() || c.size() % 2 != 1)
      throw ConfigError(where + ": coefficients must be (a_0..a_M, b_1..b_M)");
    shape.coefficients.resize(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) shape.coefficients[i] = c[i].get<double>();
  } else {
    throw ConfigError(where + ": unknown shape type '" + type + "'");
  }
  return shape;
}

ComponentParams truth_component(const TruthShape& shape, int modes) {
  switch (shape.kind) {
    case TruthShape::Kind::circle:
      return ComponentParams::circle(shape.center.x(), shape.center.y(), shape.radius,
                                     modes);
    case TruthShape::Kind::egg: {
      // r(t) = radius (1 + 0.15 cos 2 pi t + 0.05 cos 4 pi t)
      if (modes < 2) throw ConfigError("egg truth needs modes >= 2");
      ComponentParams c =
          ComponentParams::circle(shape.center.x(), shape.center.y(), shape.radius, modes);
      c.cos_coef[1] = 0.15 * shape.radius / 2.0;
      c.cos_coef[2] = 0.05 * shape.radius / 2.0;
      return c;
    }
    case TruthShape::Kind::fourier: {
      const int m = (static_cast<int>(shape.coefficients.size()) - 1) / 2;
      return ComponentParams(shape.center.x(), shape.center.y(),
                             shape.coefficients.head(m + 1), shape.coefficients.tail(m));
    }
    case TruthShape::Kind::ellipse:
      throw std::logic_error("ellipse truth is a parametric curve");
  }
  throw std::logic_error("unreachable");
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["scene"] = {{"kappa_e", c.kappa_e},
                {"kappa_i", c.kappa_i},
                {"beta", c.beta},
                {"modes", c.modes}};
  j["detectors"] = {{"count", c.detectors.count},
                    {"y", c.detectors.y},
                    {"x0", c.detectors.x0},
                    {"spacing", c.detectors.spacing}};
  j["truth"] = json::array();
  for (const auto& t : c.truth) {
    json s;
    s["center"] = {t.center.x(), t.center.y()};
    switch (t.kind) {
      case TruthShape::Kind::circle:
        s["type"] = "circle";
        s["radius"] = t.radius;
        break;
      case TruthShape::Kind::ellipse:
        s["type"] = "ellipse";
        s["semi_x"] = t.semi_x;
        s["semi_y"] = t.semi_y;
        break;
      case TruthShape::Kind::egg:
        s["type"] = "egg";
        s["radius"] = t.radius;
        break;
      case TruthShape::Kind::fourier:
        s["type"] = "fourier";
        s["coefficients"] = std::vector<double>(
            t.coefficients.data(), t.coefficients.data() + t.coefficients.size());
        break;
    }
    j["truth"].push_back(s);
  }
  j["data"] = {{"operator", c.op == Measurement::field ? "field" : "intensity"},
               {"noise_level", c.noise_level}};
  j["solver"] = {{"n_bem", c.n_bem}, {"self_check", c.self_check}};
  json prior = {{"s", c.prior_s},
                {"grid_halfwidth", c.grid_halfwidth},
                {"grid_spacing", c.grid_spacing},
                {"radius_rule",
                 c.radius_rule == RadiusRule::min_distance ? "min" : "avg"}};
  if (c.fixed_C0) prior["C0"] = *c.fixed_C0;
  if (c.target_count) prior["target_count"] = *c.target_count;
  j["prior"] = prior;
  j["kappa"] = {{"infer", c.infer_kappa},
                {"mean", c.kappa_mean},
                {"variance", c.kappa_variance}};
  j["map"] = {{"tau", c.lm.tau},
              {"max_iterations", c.lm.max_iterations},
              {"mu_factor", c.lm.mu_factor}};
  j["laplace"] = {{"enabled", c.laplace_enabled}, {"samples", c.laplace_samples}};
  j["mcmc"] = {{"enabled", c.mcmc_enabled},
               {"walkers", c.mcmc_walkers},
               {"steps", c.mcmc_steps},
               {"burn_in", c.mcmc_burn_in},
               {"stretch", c.mcmc_stretch}};
  j["evidence"] = {{"enabled", c.evidence_enabled},
                   {"counts", c.evidence_counts},
                   {"samples", c.evidence_samples}};
  j["stats"] = {{"bins", c.stats_bins},
                {"angles", c.stats_angles},
                {"grid_halfwidth", c.stats_grid_halfwidth},
                {"grid_spacing", c.stats_grid_spacing}};
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["output"] = c.output_dir;
  return j;
}

CsvTable data_table(const DataVector& d, const std::vector<Vec2>& detectors) {
  CsvTable t;
  t.header = {"index", "x", "y", "re", "im"};
  t.columns.resize(5);
  for (int j = 0; j < d.size(); ++j) {
    t.columns[0].push_back(j);
    t.columns[1].push_back(detectors[j].x());
    t.columns[2].push_back(detectors[j].y());
    t.columns[3].push_back(d.values[j].real());
    t.columns[4].push_back(d.values[j].imag());
  }
  return t;
}

void load_data_table(const std::filesystem::path& path, DataVector& d,
                     std::vector<Vec2>& detectors) {
  CsvTable t = read_csv(path);
  const std::size_t n = t.rows();
  d.values.resize(n);
  detectors.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    detectors[j] = Vec2(t.columns[1][j], t.columns[2][j]);
    d.values[j] = cdouble(t.columns[3][j], t.columns[4][j]);
  }
}

CsvTable sample_table(const SampleSet& set, const std::vector<long>& steps,
                      const std::vector<int>& walkers) {
  CsvTable t;
  t.header = {"step", "walker"};
  for (int i = 0; i < set.samples.rows(); ++i)
    t.header.push_back("nu_" + std::to_string(i));
  t.header.push_back("log_density");
  t.header.push_back("admissible");
  t.columns.resize(t.header.size());
  for (int s = 0; s < set.count; ++s) {
    std::size_t c = 0;
    t.columns[c++].push_back(static_cast<double>(steps[s]));
    t.columns[c++].push_back(static_cast<double>(walkers[s]));
    for (int i = 0; i < set.samples.rows(); ++i)
      t.columns[c++].push_back(set.samples(i, s));
    t.columns[c++].push_back(set.log_density[s]);
    t.columns[c++].push_back(set.admissible[s]);
  }
  return t;
}

SampleSet load_sample_table(const std::filesystem::path& path, int shapes, int modes,
                            bool has_kappa) {
  CsvTable t = read_csv(path);
  const int dim = static_cast<int>(t.cols()) - 4;
  SampleSet set;
  set.count = static_cast<int>(t.rows());
  set.shapes = shapes;
  set.modes = modes;
  set.has_kappa = has_kappa;
  set.samples.resize(dim, set.count);
  set.log_density.resize(set.count);
  set.admissible.resize(set.count);
  for (int s = 0; s < set.count; ++s) {
    for (int i = 0; i < dim; ++i) set.samples(i, s) = t.columns[2 + i][s];
    set.log_density[s] = t.columns[2 + dim][s];
    set.admissible[s] = t.columns[3 + dim][s] != 0.0;
  }
  return set;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("cannot parse config: ") + e.what());
  }
  require_keys(j, "config",
               {"scene", "detectors", "truth", "data", "solver", "prior", "kappa", "map",
                "laplace", "mcmc", "evidence", "stats", "seed", "threads", "output"});
  ExperimentConfig c;

  if (j.contains("scene")) {
    const auto& s = j["scene"];
    require_keys(s, "scene", {"kappa_e", "kappa_i", "beta", "modes"});
    c.kappa_e = get_or(s, "kappa_e", c.kappa_e);
    c.kappa_i = get_or(s, "kappa_i", c.kappa_i);
    c.beta = get_or(s, "beta", c.beta);
    c.modes = get_or(s, "modes", c.modes);
  }
  if (c.kappa_e <= 0 || c.kappa_i <= 0 || c.beta <= 0)
    throw ConfigError("scene: wavenumbers and beta must be positive");
  if (c.modes < 1 || c.modes > 31) throw ConfigError("scene: modes must be in [1, 31]");

  if (j.contains("detectors")) {
    const auto& s = j["detectors"];
    require_keys(s, "detectors", {"count", "y", "x0", "spacing"});
    c.detectors.count = get_or(s, "count", c.detectors.count);
    c.detectors.y = get_or(s, "y", c.detectors.y);
    c.detectors.x0 = get_or(s, "x0", c.detectors.x0);
    c.detectors.spacing = get_or(s, "spacing", c.detectors.spacing);
    if (c.detectors.count < 4 || c.detectors.spacing <= 0)
      throw ConfigError("detectors: need count >= 4 and positive spacing");
  }

  if (!j.contains("truth") || !j["truth"].is_array() || j["truth"].empty())
    throw ConfigError("truth: need at least one shape");
  for (std::size_t i = 0; i < j["truth"].size(); ++i)
    c.truth.push_back(parse_truth(j["truth"][i], static_cast<int>(i)));

  if (j.contains("data")) {
    const auto& s = j["data"];
    require_keys(s, "data", {"operator", "noise_level"});
    const std::string op = get_or<std::string>(s, "operator", "field");
    if (op == "field") {
      c.op = Measurement::field;
    } else if (op == "intensity") {
      c.op = Measurement::intensity;
    } else {
      throw ConfigError("data.operator must be 'field' or 'intensity'");
    }
    c.noise_level = get_or(s, "noise_level", c.noise_level);
    if (c.noise_level < 0) throw ConfigError("data.noise_level must be >= 0");
  }

  if (j.contains("solver")) {
    const auto& s = j["solver"];
    require_keys(s, "solver", {"n_bem", "self_check"});
    c.n_bem = get_or(s, "n_bem", c.n_bem);
    c.self_check = get_or(s, "self_check", c.self_check);
    if (c.n_bem < 16 || c.n_bem % 2 != 0)
      throw ConfigError("solver.n_bem must be even and >= 16");
  }

  if (j.contains("prior")) {
    const auto& s = j["prior"];
    require_keys(s, "prior",
                 {"s", "grid_halfwidth", "grid_spacing", "radius_rule", "C0",
                  "target_count"});
    c.prior_s = get_or(s, "s", c.prior_s);
    c.grid_halfwidth = get_or(s, "grid_halfwidth", c.grid_halfwidth);
    c.grid_spacing = get_or(s, "grid_spacing", c.grid_spacing);
    const std::string rule = get_or<std::string>(s, "radius_rule", "min");
    if (rule == "min") {
      c.radius_rule = RadiusRule::min_distance;
    } else if (rule == "avg") {
      c.radius_rule = RadiusRule::avg_min_max;
    } else {
      throw ConfigError("prior.radius_rule must be 'min' or 'avg'");
    }
    if (s.contains("C0")) c.fixed_C0 = s["C0"].get<double>();
    if (s.contains("target_count")) c.target_count = s["target_count"].get<int>();
    if (c.prior_s <= 0) throw ConfigError("prior.s must be positive");
  }

  if (j.contains("kappa")) {
    const auto& s = j["kappa"];
    require_keys(s, "kappa", {"infer", "mean", "variance"});
    c.infer_kappa = get_or(s, "infer", false);
    c.kappa_mean = get_or(s, "mean", 0.0);
    c.kappa_variance = get_or(s, "variance", c.kappa_variance);
    if (c.infer_kappa && c.kappa_variance <= 0)
      throw ConfigError("kappa.variance must be positive when inference is enabled");
  }
  if (c.infer_kappa && c.kappa_mean == 0.0) c.kappa_mean = c.kappa_i;

  if (j.contains("map")) {
    const auto& s = j["map"];
    require_keys(s, "map", {"tau", "max_iterations", "mu_factor"});
    c.lm.tau = get_or(s, "tau", c.lm.tau);
    c.lm.max_iterations = get_or(s, "max_iterations", c.lm.max_iterations);
    c.lm.mu_factor = get_or(s, "mu_factor", c.lm.mu_factor);
  }

  if (j.contains("laplace")) {
    const auto& s = j["laplace"];
    require_keys(s, "laplace", {"enabled", "samples"});
    c.laplace_enabled = get_or(s, "enabled", c.laplace_enabled);
    c.laplace_samples = get_or(s, "samples", c.laplace_samples);
    if (c.laplace_samples < 1) throw ConfigError("laplace.samples must be >= 1");
  }

  if (j.contains("mcmc")) {
    const auto& s = j["mcmc"];
    require_keys(s, "mcmc", {"enabled", "walkers", "steps", "burn_in", "stretch"});
    c.mcmc_enabled = get_or(s, "enabled", c.mcmc_enabled);
    c.mcmc_walkers = get_or(s, "walkers", c.mcmc_walkers);
    c.mcmc_steps = get_or(s, "steps", c.mcmc_steps);
    c.mcmc_burn_in = get_or(s, "burn_in", c.mcmc_burn_in);
    c.mcmc_stretch = get_or(s, "stretch", c.mcmc_stretch);
    if (c.mcmc_stretch <= 1.0) throw ConfigError("mcmc.stretch must exceed 1");
    const long total =
        static_cast<long>(c.mcmc_walkers) * (static_cast<long>(c.mcmc_steps) + 1);
    if (c.mcmc_burn_in < 0 || c.mcmc_burn_in >= total)
      throw ConfigError("mcmc.burn_in must lie in [0, walkers*(steps+1))");
  }

  if (j.contains("evidence")) {
    const auto& s = j["evidence"];
    require_keys(s, "evidence", {"enabled", "counts", "samples"});
    c.evidence_enabled = get_or(s, "enabled", c.evidence_enabled);
    if (s.contains("counts")) c.evidence_counts = s["counts"].get<std::vector<int>>();
    c.evidence_samples = get_or(s, "samples", c.evidence_samples);
    for (int m : c.evidence_counts)
      if (m < 1) throw ConfigError("evidence.counts must be positive");
    if (c.evidence_enabled && c.evidence_samples < 100)
      throw ConfigError("evidence.samples must be >= 100");
  }

  if (j.contains("stats")) {
    const auto& s = j["stats"];
    require_keys(s, "stats", {"bins", "angles", "grid_halfwidth", "grid_spacing"});
    c.stats_bins = get_or(s, "bins", c.stats_bins);
    c.stats_angles = get_or(s, "angles", c.stats_angles);
    c.stats_grid_halfwidth = get_or(s, "grid_halfwidth", c.stats_grid_halfwidth);
    c.stats_grid_spacing = get_or(s, "grid_spacing", c.stats_grid_spacing);
  }

  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  c.threads = get_or(j, "threads", c.threads);
  c.output_dir = get_or<std::string>(j, "output", c.output_dir);

  // inference stages need a positive noise level for the data weighting
  if (c.noise_level == 0.0 &&
      (c.laplace_enabled || c.mcmc_enabled || c.evidence_enabled))
    throw ConfigError("noise_level must be positive for inference stages");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string canonical = config_to_json(config).dump();
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(
                    fnv1a_bytes(canonical.data(), canonical.size())));
  return buf;
}

Scene make_scene(const ExperimentConfig& config) {
  Scene sc;
  sc.kappa_e = config.kappa_e;
  sc.kappa_i = config.kappa_i;
  sc.beta = config.beta;
  sc.detectors = detector_line(config.detectors.count, config.detectors.y,
                               config.detectors.x0, config.detectors.spacing);
  return sc;
}

std::vector<DiscretizedCurve> truth_curves(const ExperimentConfig& config, int n_bem) {
  std::vector<DiscretizedCurve> curves;
  for (const auto& shape : config.truth) {
    if (shape.kind == TruthShape::Kind::ellipse) {
      curves.push_back(
          discretize_ellipse(shape.center, shape.semi_x, shape.semi_y, n_bem));
    } else {
      curves.push_back(discretize(truth_component(shape, config.modes), n_bem));
    }
  }
  return curves;
}

ExperimentRun::ExperimentRun(ExperimentConfig config, std::filesystem::path out_dir)
    : config_(std::move(config)), dir_(std::move(out_dir)) {
  std::filesystem::create_directories(dir_);
}

void ExperimentRun::record(const std::string& file, const std::string& role) {
  for (auto& e : manifest_) {
    if (e.file == file) {
      e.role = role;
      e.checksum = file_checksum(dir_ / file);
      return;
    }
  }
  manifest_.push_back({file, role, file_checksum(dir_ / file)});
}

void ExperimentRun::run_generate() {
  Scene sc = make_scene(config_);
  const int n = config_.n_bem;
  auto curves = truth_curves(config_, n);
  TransmissionSolver solver(curves, sc.kappa_e, sc.kappa_i, sc.beta);
  Eigen::VectorXcd u = eval_total_field(solver.solve_incident(sc), sc, sc.detectors);
  if (config_.self_check) {
    auto fine = truth_curves(config_, 2 * n);
    TransmissionSolver fine_solver(fine, sc.kappa_e, sc.kappa_i, sc.beta);
    Eigen::VectorXcd u2 =
        eval_total_field(fine_solver.solve_incident(sc), sc, sc.detectors);
    if ((u - u2).norm() / u2.norm() > 1e-6) u = u2;  // keep the finer-grid data
  }

  DataVector clean = measure(u, config_.op);
  DataVector noisy = add_noise(clean, config_.noise_level, derive_seed(config_.seed, 1));
  split_ = split_interleaved(noisy, sc.detectors);

  write_csv(dir_ / "data_full.csv", data_table(noisy, sc.detectors));
  write_csv(dir_ / "data_invert.csv",
            data_table(split_->invert, split_->invert_detectors));
  write_csv(dir_ / "data_prior.csv", data_table(split_->prior, split_->prior_detectors));
  record("data_full.csv", "noisy detector data, full line");
  record("data_invert.csv", "inversion data (even subgrid)");
  record("data_prior.csv", "prior-construction data (odd subgrid)");

  json meta;
  meta["config_hash"] = config_hash(config_);
  meta["sigma_noise"] = noisy.sigma_noise;
  meta["seed"] = config_.seed;
  meta["operator"] = config_.op == Measurement::field ? "field" : "intensity";
  meta["config"] = config_to_json(config_);
  write_text_atomic(dir_ / "run_meta.json", meta.dump(2) + "\n");
  record("run_meta.json", "run metadata");
}

void ExperimentRun::ensure_data() {
  if (split_) return;
  if (!std::filesystem::exists(dir_ / "data_invert.csv")) {
    run_generate();
    return;
  }
  std::ifstream in(dir_ / "run_meta.json");
  if (!in) throw ConfigError("missing run_meta.json; run the generate stage first");
  json meta = json::parse(in);
  const double sigma = meta.at("sigma_noise").get<double>();
  DataSplit s;
  s.invert.op = s.prior.op = config_.op;
  s.invert.sigma_noise = s.prior.sigma_noise = sigma;
  load_data_table(dir_ / "data_invert.csv", s.invert, s.invert_detectors);
  load_data_table(dir_ / "data_prior.csv", s.prior, s.prior_detectors);
  split_ = std::move(s);
}

void ExperimentRun::run_prior() {
  ensure_data();
  Scene sc = make_scene(config_);

  PriorOptions opt;
  opt.grid.xmin = opt.grid.ymin = -config_.grid_halfwidth;
  opt.grid.xmax = opt.grid.ymax = config_.grid_halfwidth;
  opt.grid.spacing = config_.grid_spacing;
  opt.s = config_.prior_s;
  opt.target_count = config_.prior_target();
  opt.modes = config_.modes;
  opt.n_bem = std::min(config_.n_bem, 96);  // circle fits do not need full resolution
  opt.rule = config_.radius_rule;
  opt.fixed_C0 = config_.fixed_C0;
  opt.infer_kappa = config_.infer_kappa;
  opt.kappa_mean = config_.kappa_mean;
  opt.kappa_variance = config_.kappa_variance;

  auto result = build_topological_prior(split_->prior, split_->prior_detectors, sc, opt);
  prior_ = result.spec;

  CsvTable field;
  field.header = {"x", "y", "value"};
  field.columns.resize(3);
  const GridSpec& grid = result.field.grid;
  for (int iy = 0; iy < grid.ny(); ++iy) {
    for (int ix = 0; ix < grid.nx(); ++ix) {
      const Vec2 p = grid.point(ix, iy);
      field.columns[0].push_back(p.x());
      field.columns[1].push_back(p.y());
      field.columns[2].push_back(result.field.values(ix, iy));
    }
  }
  write_csv(dir_ / "topo_field.csv", field);
  record("topo_field.csv", "topological derivative field");

  json pj;
  pj["C0"] = prior_->C0;
  pj["s"] = prior_->s;
  pj["count"] = static_cast<int>(prior_->nu0.components.size());
  pj["modes"] = config_.modes;
  pj["infer_kappa"] = config_.infer_kappa;
  const Eigen::VectorXd mean = prior_->mean();
  pj["mean"] = std::vector<double>(mean.data(), mean.data() + mean.size());
  pj["variance"] = std::vector<double>(
      prior_->variance.data(), prior_->variance.data() + prior_->variance.size());
  write_text_atomic(dir_ / "prior.json", pj.dump(2) + "\n");
  record("prior.json", "Gaussian prior from the topological pipeline");
}

void ExperimentRun::ensure_prior() {
  if (prior_) return;
  if (!std::filesystem::exists(dir_ / "prior.json")) {
    run_prior();
    return;
  }
  std::ifstream in(dir_ / "prior.json");
  json pj = json::parse(in);
  const int count = pj.at("count").get<int>();
  const int modes = pj.at("modes").get<int>();
  const bool has_kappa = pj.at("infer_kappa").get<bool>();
  const auto mean = pj.at("mean").get<std::vector<double>>();
  const auto var = pj.at("variance").get<std::vector<double>>();
  PriorSpec spec;
  spec.nu0 = unpack(Eigen::Map<const Eigen::VectorXd>(mean.data(), mean.size()), count,
                    modes, has_kappa);
  spec.variance = Eigen::Map<const Eigen::VectorXd>(var.data(), var.size());
  spec.s = pj.at("s").get<double>();
  spec.C0 = pj.at("C0").get<double>();
  prior_ = std::move(spec);
}

const ScatteringModel& ExperimentRun::inversion_model() {
  if (!model_) {
    ensure_data();
    ensure_prior();
    Scene sc = make_scene(config_);
    sc.detectors = split_->invert_detectors;
    const int count = static_cast<int>(prior_->nu0.components.size());
    model_.emplace(sc, count, config_.modes, config_.n_bem, config_.infer_kappa,
                   config_.threads <= 0 ? default_thread_count() : config_.threads);
  }
  return *model_;
}

void ExperimentRun::run_map() {
  ensure_data();
  ensure_prior();
  const ScatteringModel& model = inversion_model();
  CostModel cm = make_cost_model(model, split_->invert, *prior_);
  const LmResult res = lm_solve(cm, prior_->mean(), config_.lm);
  nu_map_ = res.nu_map;
  map_converged_ = res.converged;

  CsvTable trace;
  trace.header = {"k", "lambda", "mu", "cost", "step_norm", "accepted"};
  trace.columns.resize(6);
  for (const auto& it : res.trace) {
    trace.columns[0].push_back(it.k);
    trace.columns[1].push_back(it.lambda);
    trace.columns[2].push_back(it.mu);
    trace.columns[3].push_back(it.cost);
    trace.columns[4].push_back(it.step_norm);
    trace.columns[5].push_back(it.accepted);
  }
  write_csv(dir_ / "map_trace.csv", trace);
  record("map_trace.csv", "optimizer iteration trace");

  json mj;
  mj["nu"] =
      std::vector<double>(res.nu_map.data(), res.nu_map.data() + res.nu_map.size());
  mj["converged"] = res.converged;
  mj["iterations"] = res.iterations;
  mj["final_cost"] = res.final_cost;
  mj["initial_gradient_norm"] = res.initial_gradient_norm;
  mj["final_gradient_norm"] = res.final_gradient_norm;
  const ShapeParams shape = model.unpack_params(res.nu_map);
  json stats = json::array();
  for (const auto& comp : shape.components) {
    const ShapeStats st = shape_stats(comp, 512);
    stats.push_back({{"area", st.area},
                     {"center_of_mass", {st.center_of_mass.x(), st.center_of_mass.y()}},
                     {"deviation", st.deviation},
                     {"r_avg", st.r_avg},
                     {"r_min", st.r_min},
                     {"r_max", st.r_max},
                     {"dir_min", st.dir_min},
                     {"dir_max", st.dir_max}});
  }
  mj["component_stats"] = stats;
  if (config_.infer_kappa) mj["kappa_i"] = *shape.kappa_i;
  write_text_atomic(dir_ / "map.json", mj.dump(2) + "\n");
  record("map.json", "MAP point and its shape statistics");
}

void ExperimentRun::ensure_map() {
  if (nu_map_) return;
  if (!std::filesystem::exists(dir_ / "map.json")) {
    run_map();
    return;
  }
  std::ifstream in(dir_ / "map.json");
  json mj = json::parse(in);
  const auto nu = mj.at("nu").get<std::vector<double>>();
  nu_map_ = Eigen::Map<const Eigen::VectorXd>(nu.data(), nu.size());
  map_converged_ = mj.at("converged").get<bool>();
}

void ExperimentRun::export_sample_products(const SampleSet& samples,
                                           const std::string& prefix) {
  const int components = samples.shapes;
  CsvTable per_sample;
  per_sample.header = {"sample", "component", "area",  "deviation", "com_x", "com_y",
                       "r_avg",  "r_min",     "r_max", "dir_min",   "dir_max"};
  per_sample.columns.resize(per_sample.header.size());
  for (int s = 0; s < samples.count; ++s) {
    if (!samples.admissible[s]) continue;
    const ShapeParams shape = samples.shape_at(s);
    for (int c = 0; c < components; ++c) {
      const ShapeStats st = shape_stats(shape.components[c], 256);
      std::size_t k = 0;
      per_sample.columns[k++].push_back(s);
      per_sample.columns[k++].push_back(c);
      per_sample.columns[k++].push_back(st.area);
      per_sample.columns[k++].push_back(st.deviation);
      per_sample.columns[k++].push_back(st.center_of_mass.x());
      per_sample.columns[k++].push_back(st.center_of_mass.y());
      per_sample.columns[k++].push_back(st.r_avg);
      per_sample.columns[k++].push_back(st.r_min);
      per_sample.columns[k++].push_back(st.r_max);
      per_sample.columns[k++].push_back(st.dir_min);
      per_sample.columns[k++].push_back(st.dir_max);
    }
  }
  write_csv(dir_ / (prefix + "_stats.csv"), per_sample);
  record(prefix + "_stats.csv", "per-sample shape statistics");

  for (int c = 0; c < components; ++c) {
    const auto tables = stats_histograms(samples, c, config_.stats_bins);
    for (const auto& table : tables) {
      CsvTable ht;
      ht.header = {"bin_lo", "bin_hi", "count"};
      ht.columns.resize(3);
      for (int b = 0; b < table.counts.size(); ++b) {
        ht.columns[0].push_back(table.edges[b]);
        ht.columns[1].push_back(table.edges[b + 1]);
        ht.columns[2].push_back(table.counts[b]);
      }
      const std::string name =
          prefix + "_hist_c" + std::to_string(c) + "_" + table.name + ".csv";
      write_csv(dir_ / name, ht);
      record(name, "histogram of " + table.name);
    }

    const AngularQuantiles aq = boundary_marginals(samples, c, config_.stats_angles);
    CsvTable ct;
    ct.header = {"angle", "q05", "q25", "q50", "q75", "q95"};
    ct.columns.resize(6);
    for (int a = 0; a < aq.angles.size(); ++a) {
      ct.columns[0].push_back(aq.angles[a]);
      for (int q = 0; q < 5; ++q) ct.columns[q + 1].push_back(aq.quantiles(q, a));
    }
    const std::string name = prefix + "_contour_c" + std::to_string(c) + ".csv";
    write_csv(dir_ / name, ct);
    record(name, "per-angle boundary quantiles");
  }

  GridSpec grid;
  grid.xmin = grid.ymin = -config_.stats_grid_halfwidth;
  grid.xmax = grid.ymax = config_.stats_grid_halfwidth;
  grid.spacing = config_.stats_grid_spacing;
  // center single-object grids on the prior mean so small objects stay resolved
  if (components == 1 && prior_) {
    const auto& c0 = prior_->nu0.components[0];
    grid.xmin += c0.cx;
    grid.xmax += c0.cx;
    grid.ymin += c0.cy;
    grid.ymax += c0.cy;
  }
  const Eigen::MatrixXd prob = inside_probability_grid(samples, grid, -1, 128);
  CsvTable pt;
  pt.header = {"x", "y", "probability"};
  pt.columns.resize(3);
  for (int iy = 0; iy < grid.ny(); ++iy) {
    for (int ix = 0; ix < grid.nx(); ++ix) {
      const Vec2 p = grid.point(ix, iy);
      pt.columns[0].push_back(p.x());
      pt.columns[1].push_back(p.y());
      pt.columns[2].push_back(prob(ix, iy));
    }
  }
  write_csv(dir_ / (prefix + "_inside.csv"), pt);
  record(prefix + "_inside.csv", "probability of lying inside the object");
}

void ExperimentRun::run_laplace() {
  ensure_data();
  ensure_prior();
  ensure_map();
  const ScatteringModel& model = inversion_model();
  CostModel cm = make_cost_model(model, split_->invert, *prior_);
  const Eigen::VectorXcd u = model.field(*nu_map_);
  const Eigen::MatrixXcd jac = model.jacobian(*nu_map_);
  const Eigen::MatrixXd h = gn_hessian(cm, u, jac, 1.0);
  const LaplacePosterior post = posterior_covariance(*nu_map_, h);

  const int count = static_cast<int>(prior_->nu0.components.size());
  SampleSet samples =
      sample_laplace(post, config_.laplace_samples, derive_seed(config_.seed, 2), count,
                     config_.modes, config_.infer_kappa);
  if (samples.discard_fraction() > laplace_discard_warning_fraction) {
    std::cerr << "warning: " << 100.0 * samples.discard_fraction()
              << "% of Laplace samples are inadmissible; the Gaussian approximation "
                 "may be inadequate\n";
  }

  std::vector<long> steps(samples.count);
  std::vector<int> walkers(samples.count, -1);
  for (int s = 0; s < samples.count; ++s) steps[s] = s;
  write_csv(dir_ / "laplace_samples.csv", sample_table(samples, steps, walkers));
  record("laplace_samples.csv", "Laplace posterior samples");
  export_sample_products(samples, "laplace");
}

void ExperimentRun::run_mcmc() {
  ensure_data();
  ensure_prior();
  const ScatteringModel& model = inversion_model();
  auto target = make_log_posterior(model, split_->invert, *prior_);
  ChainConfig cc;
  cc.walkers = config_.mcmc_walkers;
  cc.steps = config_.mcmc_steps;
  cc.burn_in = config_.mcmc_burn_in;
  cc.stretch = config_.mcmc_stretch;
  cc.seed = derive_seed(config_.seed, 3);
  cc.threads = config_.threads <= 0 ? default_thread_count() : config_.threads;
  const Ensemble ens = run_ensemble(target, make_truncated_prior_sampler(*prior_), cc);

  const int count = static_cast<int>(prior_->nu0.components.size());
  SampleSet samples = to_sample_set(ens, config_.mcmc_burn_in, count, config_.modes,
                                    config_.infer_kappa);
  std::vector<long> steps(samples.count);
  std::vector<int> walkers(samples.count);
  for (int s = 0; s < samples.count; ++s) {
    const long flat = config_.mcmc_burn_in + s;
    steps[s] = flat / ens.walkers;
    walkers[s] = static_cast<int>(flat % ens.walkers);
  }
  write_csv(dir_ / "mcmc_samples.csv", sample_table(samples, steps, walkers));
  record("mcmc_samples.csv", "retained ensemble samples");

  int discard =
      std::min(ens.steps / 2, static_cast<int>(config_.mcmc_burn_in / ens.walkers));
  discard = std::min(discard, std::max(0, ens.steps + 1 - 10));
  const GelmanRubin gr = gelman_rubin(ens, discard);
  CsvTable rt;
  rt.header = {"parameter", "rhat", "degenerate"};
  rt.columns.resize(3);
  for (int p = 0; p < gr.rhat.size(); ++p) {
    rt.columns[0].push_back(p);
    rt.columns[1].push_back(gr.rhat[p]);
    rt.columns[2].push_back(gr.degenerate[p]);
  }
  write_csv(dir_ / "mcmc_rhat.csv", rt);
  record("mcmc_rhat.csv", "potential scale reduction per parameter");

  json mj;
  mj["acceptance_rate"] = ens.acceptance_rate();
  mj["retained"] = samples.count;
  mj["walkers"] = ens.walkers;
  mj["steps"] = ens.steps;
  write_text_atomic(dir_ / "mcmc_meta.json", mj.dump(2) + "\n");
  record("mcmc_meta.json", "sampler summary");

  export_sample_products(samples, "mcmc");
}

void ExperimentRun::run_evidence() {
  ensure_data();
  Scene sc = make_scene(config_);
  Scene inv_sc = sc;
  inv_sc.detectors = split_->invert_detectors;

  PriorOptions opt;
  opt.grid.xmin = opt.grid.ymin = -config_.grid_halfwidth;
  opt.grid.xmax = opt.grid.ymax = config_.grid_halfwidth;
  opt.grid.spacing = config_.grid_spacing;
  opt.s = config_.prior_s;
  opt.modes = config_.modes;
  opt.n_bem = std::min(config_.n_bem, 96);
  opt.rule = config_.radius_rule;

  std::vector<EvidenceEstimate> estimates;
  for (int m : config_.evidence_counts) {
    opt.target_count = m;
    PriorSpec prior_m =
        build_topological_prior(split_->prior, split_->prior_detectors, sc, opt).spec;
    if (static_cast<int>(prior_m.nu0.components.size()) != m) {
      // thresholding could not isolate m wells; fall back to replicating the
      // strongest component with jittered centers
      Rng jitter(derive_seed(config_.seed, 50 + m));
      while (static_cast<int>(prior_m.nu0.components.size()) > m)
        prior_m.nu0.components.pop_back();
      while (static_cast<int>(prior_m.nu0.components.size()) < m) {
        ComponentParams extra = prior_m.nu0.components[0];
        extra.cx += 0.5 * (2.0 * jitter.uniform() - 1.0);
        extra.cy += 0.5 * (2.0 * jitter.uniform() - 1.0);
        prior_m.nu0.components.push_back(extra);
      }
      prior_m.variance = build_prior_covariance(m, config_.modes, config_.prior_s);
    }

    const int threads = config_.threads <= 0 ? default_thread_count() : config_.threads;
    ScatteringModel model_m(inv_sc, m, config_.modes, config_.n_bem, false, threads);
    estimates.push_back(evidence(model_m, split_->invert, prior_m, m,
                                 config_.evidence_samples,
                                 derive_seed(config_.seed, 100 + m), threads));
  }

  CsvTable et;
  et.header = {"m", "log_evidence", "log_se", "samples"};
  et.columns.resize(4);
  for (const auto& e : estimates) {
    et.columns[0].push_back(e.object_count);
    et.columns[1].push_back(e.log_mean);
    et.columns[2].push_back(e.log_se);
    et.columns[3].push_back(static_cast<double>(e.samples));
  }
  write_csv(dir_ / "evidence.csv", et);
  record("evidence.csv", "evidence estimates per object count");

  const ModelChoice choice = select_model(estimates);
  json ej;
  ej["selected"] = choice.selected;
  ej["unclear"] = choice.unclear;
  write_text_atomic(dir_ / "evidence_choice.json", ej.dump(2) + "\n");
  record("evidence_choice.json", "selected object count");
}

void ExperimentRun::run_stats() {
  ensure_prior();
  const int count = static_cast<int>(prior_->nu0.components.size());
  for (const std::string prefix : {"laplace", "mcmc"}) {
    const auto path = dir_ / (prefix + "_samples.csv");
    if (!std::filesystem::exists(path)) continue;
    SampleSet samples = load_sample_table(path, count, config_.modes, config_.infer_kappa);
    export_sample_products(samples, prefix);
  }
}

void ExperimentRun::run_all(const std::vector<std::string>& skip) {
  auto skipped = [&](const std::string& stage) {
    for (const auto& s : skip)
      if (s == stage) return true;
    return false;
  };
  try {
    if (!skipped("generate")) run_generate();
    if (!skipped("prior")) run_prior();
    if (!skipped("map")) run_map();
    if (config_.laplace_enabled && !skipped("laplace")) run_laplace();
    if (config_.mcmc_enabled && !skipped("mcmc")) run_mcmc();
    if (config_.evidence_enabled && !skipped("evidence")) run_evidence();
  } catch (...) {
    // keep whatever artifacts completed, then report the failure
    write_manifest();
    throw;
  }
  write_manifest();
}

void ExperimentRun::write_manifest() {
  json mj;
  mj["config_hash"] = config_hash(config_);
  mj["seed"] = config_.seed;
  json files = json::array();
  for (const auto& e : manifest_)
    files.push_back({{"file", e.file}, {"role", e.role}, {"checksum", e.checksum}});
  mj["files"] = files;
  write_text_atomic(dir_ / "manifest.json", mj.dump(2) + "\n");
}

}  // namespace iscat
