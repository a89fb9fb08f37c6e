#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "krot/angle.hpp"
#include "krot/krylov.hpp"
#include "krot/noise.hpp"
#include "krot/types.hpp"

namespace krot {

enum class Method { kNaive, kRotatedOracle, kRotatedHeuristic, kTikhonov };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct ModelSpec {
  enum class Kind { kToy, kRandom, kFile };
  Kind kind = Kind::kToy;
  ToyParams toy;
  Eigen::Index random_dim = 20;
  std::uint64_t random_seed = 97;
  double random_gap_scale = 4.0;
  std::string file_path;
};

struct ExperimentConfig {
  ModelSpec model;
  Eigen::Index max_dim = 33;
  double dt = 0.0;  // nonpositive selects pi / spectral_range automatically
  NoiseConfig noise;
  std::vector<double> noise_levels = {1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2};
  std::vector<double> taus = {1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
  std::vector<Method> methods = {Method::kNaive, Method::kRotatedOracle,
                                 Method::kRotatedHeuristic, Method::kTikhonov};
  ConvergenceConfig convergence;
  AngleSearchConfig angle;
  std::uint64_t master_seed = 42;
  double chemical_accuracy = 1.6e-3;

  void validate() const;
};

// Strict parse of the JSON config format; unknown keys are errors so typos
// cannot silently fall back to defaults. Missing keys take defaults.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string config_schema();

struct GridCellRecord {
  double noise_level = 0.0;
  double tau = 0.0;
  Method method = Method::kNaive;
  double abs_error = 0.0;
  Eigen::Index kept_dim_delta = 0;  // states kept beyond the unrotated solve
  double theta = 0.0;
  double sigma = 0.0;
  Eigen::Index converged_dim = 0;
  bool within_chemical_accuracy = false;
};

struct CellFailure {
  double noise_level = 0.0;
  double tau = 0.0;
  Method method = Method::kNaive;
  std::string reason;
};

struct ExperimentGrid {
  std::vector<GridCellRecord> records;
  std::vector<CellFailure> failures;
};

// The configured model resolved into a truth source plus its exact ground
// energy. The Hamiltonian lives behind a stable pointer because the Krylov
// truth source keeps a reference to it.
struct ResolvedModel {
  std::unique_ptr<HamiltonianModel> model;
  std::unique_ptr<TruthSource> truth;
  KrylovConfig krylov;
  double reference = 0.0;
};

ResolvedModel resolve_model(const ExperimentConfig& cfg);

// One grid cell: iterative basis construction at the cell's noise level and
// threshold, then a final aggregate solve under the method's angle policy.
// The construction seed depends on (master_seed, noise_level, tau) but not
// on the method, so every method sees the identical batch set.
GridCellRecord run_cell(const ExperimentConfig& cfg, double noise_level, double tau,
                        Method method);

// Every admissible cell (noise_level <= tau) for every configured method.
// Cells are dispatched to `threads` workers; records come back in canonical
// order (noise, tau, method) regardless of scheduling. Failed cells land in
// `failures` instead of aborting the sweep.
ExperimentGrid run_grid(const ExperimentConfig& cfg, int threads = 1);

// CSV table bodies for an evaluated grid, in canonical order. Headers are
// fixed; see the schema constants below.
std::string grid_csv(const ExperimentGrid& grid);
std::string ratios_csv(const ExperimentGrid& grid);
std::string best_by_noise_csv(const ExperimentGrid& grid);
std::string failures_csv(const ExperimentGrid& grid);

inline constexpr const char* kGridHeader =
    "noise_level,tau,method,abs_error,kept_dim_delta,theta,sigma,converged_dim,"
    "within_chemical_accuracy";
inline constexpr const char* kRatiosHeader =
    "noise_level,tau,method,error_ratio,kept_dim_delta";
inline constexpr const char* kBestByNoiseHeader =
    "noise_level,method,best_tau,best_abs_error";
inline constexpr const char* kFailuresHeader = "noise_level,tau,method,reason";

}  // namespace krot
