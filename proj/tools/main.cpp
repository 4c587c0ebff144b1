#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "equilib/equilib.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Minimum-energy problems with external fields on finite point "
               "sets: capacities, equilibrium measures, balayage"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  double tol = 0;
  std::string out_dir;
  bool have_seed = false, have_tol = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "path to the experiment config")
        ->required();
    sub->add_option("--seed", seed, "override the config seed")
        ->each([&](const std::string&) { have_seed = true; });
    sub->add_option("--tol", tol, "override the solver KKT tolerance")
        ->each([&](const std::string&) { have_tol = true; });
  };

  CLI::App* run = app.add_subcommand("run", "run the experiment in a config");
  add_common(run);
  run->add_option("--out-dir", out_dir,
                  "output directory (also via EQUILIB_OUT_DIR)");

  CLI::App* validate =
      app.add_subcommand("validate", "parse and validate a config only");
  add_common(validate);

  CLI11_PARSE(app, argc, argv);

  equilib::cli::Overrides ov;
  if (have_seed) ov.seed = seed;
  if (have_tol) ov.tol = tol;
  if (!out_dir.empty()) ov.out_dir = out_dir;

  try {
    if (validate->parsed()) {
      equilib::cli::parse_config_file(config_path, ov);
      std::cout << "ok: " << config_path << "\n";
      return 0;
    }
    for (const std::string& path : equilib::cli::run_config(config_path, ov))
      std::cout << "wrote " << path << "\n";
    return 0;
  } catch (const equilib::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const equilib::PdError& e) {
    std::cerr << "positive-definiteness failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
