// Command-line front end for the inverse-scattering pipeline: synthetic data
// generation, topological prior construction, MAP estimation, Laplace and
// ensemble-MCMC posterior sampling, and evidence-based model selection.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "iscat/experiment.hpp"

namespace {

enum ExitCode {
  exit_ok = 0,
  exit_config = 2,
  exit_solver = 3,
  exit_nonconvergence = 4,
  exit_sampler_init = 5,
};

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D Bayesian inverse scattering with topological priors"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the verb

  std::string config_path;
  std::string out_override;
  std::string skip_csv;
  std::int64_t seed_override = -1;

  app.add_option("--config", config_path, "experiment configuration file (JSON)")
      ->required();
  app.add_option("--seed", seed_override, "override the configured seed");
  app.add_option("--out", out_override, "override the configured output directory");
  app.add_option("--stage-skip", skip_csv,
                 "comma-separated stages to skip when running 'all'");

  const std::vector<std::string> verbs = {"generate", "prior",    "map",  "laplace",
                                          "mcmc",     "evidence", "stats", "all"};
  for (const auto& v : verbs) app.add_subcommand(v);

  CLI11_PARSE(app, argc, argv);
  const std::string verb = app.get_subcommands().front()->get_name();

  try {
    iscat::ExperimentConfig config = iscat::load_config(config_path);
    if (seed_override >= 0) config.seed = static_cast<std::uint64_t>(seed_override);
    if (!out_override.empty()) config.output_dir = out_override;

    iscat::ExperimentRun run(config, config.output_dir);
    if (verb == "generate") {
      run.run_generate();
    } else if (verb == "prior") {
      run.run_prior();
    } else if (verb == "map") {
      run.run_map();
    } else if (verb == "laplace") {
      run.run_laplace();
    } else if (verb == "mcmc") {
      run.run_mcmc();
    } else if (verb == "evidence") {
      run.run_evidence();
    } else if (verb == "stats") {
      run.run_stats();
    } else if (verb == "all") {
      run.run_all(split_list(skip_csv));
    }
    run.write_manifest();

    if ((verb == "map" || verb == "all") && !run.map_converged()) {
      std::cerr << "MAP optimization did not meet the convergence tolerance\n";
      return exit_nonconvergence;
    }
  } catch (const iscat::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return exit_config;
  } catch (const iscat::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << " (rcond " << e.rcond() << ")\n";
    return exit_solver;
  } catch (const iscat::SamplerInitError& e) {
    std::cerr << "sampler initialization failure: " << e.what() << "\n";
    return exit_sampler_init;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_ok;
}
