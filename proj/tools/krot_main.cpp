#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "krot/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Noisy generalized eigenvalue experiments with rotated thresholding"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = ".";
  std::string theta_mode = "none";
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 1;
  bool print_schema = false;

  app.add_option("--config", config_path, "JSON experiment configuration");
  app.add_option("--seed", seed, "override master_seed")->each([&](const std::string&) {
    seed_given = true;
  });
  app.add_option("--out", out_dir, "output directory (default .)");
  app.add_option("--theta-mode", theta_mode,
                 "final-solve angle policy: none, oracle, heuristic, fixed:<radians>");
  app.add_option("--threads", threads, "worker threads for the grid sweep");
  app.add_flag("--print-schema", print_schema, "print the config schema and exit");

  CLI::App* toy = app.add_subcommand("toy", "three-state demonstration tables");
  CLI::App* grid = app.add_subcommand("grid", "noise x threshold method sweep");
  CLI::App* krylov =
      app.add_subcommand("krylov", "single pipeline run with history dump");
  CLI::App* scan = app.add_subcommand("scan", "rotated-overlap spectrum scan");
  CLI::App* project =
      app.add_subcommand("project", "project a matrix onto the physical overlap set");
  std::string project_in;
  std::string project_out;
  project->add_option("input", project_in, "dense-matrix JSON to project")->required();
  project->add_option("output", project_out, "path for the projected matrix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (print_schema) {
    std::cout << krot::config_schema();
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 2;
  }

  krot::ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg = krot::load_config(config_path);
    if (seed_given) cfg.master_seed = seed;
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (toy->parsed()) return krot::cmd_toy(cfg, out_dir);
    if (grid->parsed()) return krot::cmd_grid(cfg, out_dir, threads);
    if (krylov->parsed()) return krot::cmd_krylov(cfg, out_dir, theta_mode);
    if (scan->parsed()) return krot::cmd_scan(cfg, out_dir);
    if (project->parsed()) return krot::cmd_project(project_in, project_out);
  } catch (const krot::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
