#pragma once

#include <string>

#include "krot/experiment.hpp"

namespace krot {

// Subcommand bodies behind the CLI. Each writes its output files under
// out_dir and returns the process exit code: 0 on success, 3 when some work
// failed but partial results were written. Configuration problems throw
// ParseError, which the CLI maps to exit code 2.

// Fixed three-state demonstration: rotated-overlap spectrum sweep, the
// noiseless threshold-vs-rotation comparison, and per-seed noisy angle
// optima.
int cmd_toy(const ExperimentConfig& cfg, const std::string& out_dir);

// Full noise x threshold sweep. Emits grid.csv, ratios.csv,
// best_by_noise.csv, failures.csv, and a timestamped manifest.json.
int cmd_grid(const ExperimentConfig& cfg, const std::string& out_dir, int threads);

// One pipeline run at the first configured (noise_level, tau) with a full
// history dump, then a final aggregate solve under theta_mode: "none",
// "oracle", "heuristic", or "fixed:<radians>".
int cmd_krylov(const ExperimentConfig& cfg, const std::string& out_dir,
               const std::string& theta_mode);

// Rotated-overlap eigenvalue scan of the configured model's noiseless
// pencil at its largest dimension.
int cmd_scan(const ExperimentConfig& cfg, const std::string& out_dir);

// Project a dense-matrix JSON file onto the nearest physical overlap.
int cmd_project(const std::string& in_path, const std::string& out_path);

}  // namespace krot
