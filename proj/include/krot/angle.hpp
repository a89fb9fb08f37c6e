#pragma once

#include <utility>
#include <vector>

#include "krot/noise.hpp"
#include "krot/pencil.hpp"
#include "krot/types.hpp"

namespace krot {

// Coarse-to-fine search over rotation angles. The coarse stage evaluates
// grid_points equally spaced angles on the half-open domain [lo, hi); the
// fine stage runs refine_iters golden-section steps inside the cell
// bracketing the coarse minimizer.
struct AngleSearchConfig {
  int grid_points = 181;
  int refine_iters = 40;
  double lo = 0.0;
  double hi = 3.14159265358979323846;

  void validate() const;
};

struct AngleScanRow {
  double theta = 0.0;
  double objective = 0.0;      // +infinity marks an unusable angle
  Eigen::Index kept_dim = 0;   // kept dimension of the aggregate solve, 0 on failure
};

struct AngleResult {
  double theta = 0.0;
  double objective = 0.0;
  double estimate = 0.0;                 // ground-energy estimate at theta
  std::vector<Eigen::Index> kept_dims;   // per-batch kept dimensions at theta
  std::vector<AngleScanRow> scan_table;  // the coarse grid, ascending theta
};

// Eigenvalues of the rotated overlap S cos(theta) + H sin(theta), ascending,
// for each requested angle.
std::vector<std::pair<double, RealVector>> scan_overlap_spectrum(
    const PencilXcd& p, const std::vector<double>& thetas);

// Reference-guided search: minimizes |ground(aggregate, theta) - e_ref|.
// Angles where the aggregate solve fails or drops an eigenvalue to infinity
// score +infinity. Objectives tied within 1e-10 prefer the angle with the
// smaller ground-state sensitivity, then the smaller angle; a tie against
// theta = 0 resolves to theta = 0.
AngleResult optimize_theta_oracle(const BatchSet& batches, double tau, double e_ref,
                                  const AngleSearchConfig& cfg = {});

// Reference-free search: minimizes the variance of the per-batch ground
// energies. Angles where fewer than two batches survive score +infinity.
// Equal objectives resolve to the smallest angle.
AngleResult optimize_theta_heuristic(const BatchSet& batches, double tau,
                                     const AngleSearchConfig& cfg = {});

}  // namespace krot
