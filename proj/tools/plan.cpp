#include <CLI11.hpp>

#include <cstdio>
#include <exception>

#include "tmm/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"stability-constrained mobile manipulation planner"};
  std::string scenario;
  app.add_option("scenario", scenario, "scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  tmm::RunOptions opts;
  std::uint64_t seed = 0;
  int samples = 0;
  auto* seed_opt = app.add_option("--seed", seed, "override the RNG seed");
  auto* samples_opt =
      app.add_option("--samples", samples, "override the Monte Carlo sample count");
  app.add_option("--out", opts.out_dir, "output directory");
  app.add_flag("--no-smooth", opts.no_smooth, "skip trajectory smoothing");
  app.add_flag("--no-traction-opt", opts.no_traction_opt,
               "disable the traction deviation constraint");
  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) opts.seed = seed;
  if (*samples_opt) opts.samples = samples;

  try {
    return tmm::run_scenario(scenario, opts);
  } catch (const tmm::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
}
