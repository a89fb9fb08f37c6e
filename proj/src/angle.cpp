#include "krot/angle.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace krot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTieTol = 1e-10;

struct AngleEval {
  double objective = kInf;
  double sensitivity = kInf;
  double estimate = 0.0;
  Eigen::Index kept_dim = 0;
};

// Objective, sensitivity, and kept dimension of the aggregate solve at one
// angle. Any drop to infinity poisons the angle: the pole sits inside the
// kept subspace and the ground value there is not trustworthy.
AngleEval eval_oracle(const PencilXcd& aggregate, double theta, double tau,
                      double e_ref) {
  AngleEval ev;
  RitzXcd sol;
  try {
    sol = solve_rotated(aggregate, theta, tau);
  } catch (const Error&) {
    return ev;
  }
  ev.kept_dim = sol.kept_dim;
  if (sol.dropped_at_infinity > 0) return ev;
  ev.estimate = sol.values[0];
  ev.objective = std::abs(sol.values[0] - e_ref);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const Matrix s_theta = aggregate.s.mat() * c + aggregate.h.mat() * s;
  try {
    ev.sensitivity = detail::sensitivity_norm(Vector(sol.vectors.col(0)), s_theta);
  } catch (const Error&) {
    ev.sensitivity = kInf;
  }
  return ev;
}

// The winning angle's energy is reported from the aggregate pencil, so an
// angle where the aggregate solve fails or loses its ground value to the
// back-transform pole is not selectable no matter how small the batch
// variance looks there.
AngleEval eval_heuristic(const BatchSet& batches, const PencilXcd& aggregate,
                         double theta, double tau) {
  AngleEval ev;
  try {
    RitzXcd agg_sol = solve_rotated(aggregate, theta, tau);
    if (agg_sol.dropped_at_infinity > 0) return ev;
    ev.kept_dim = agg_sol.kept_dim;
  } catch (const Error&) {
    return ev;
  }
  const BatchEnergies energies = batch_ground_energies(batches, tau, theta);
  if (energies.values.size() < 2) return ev;
  const auto [mean, sigma] = weighted_mean_and_sigma(energies.values, energies.weights);
  ev.objective = sigma * sigma;
  ev.estimate = mean;
  ev.sensitivity = 0.0;
  return ev;
}

// Golden-section minimization of `eval` on [a, b], seeded with the incumbent
// best. Accepts a probe only on strict improvement, so flat valleys keep the
// coarse-stage winner and its tie-breaks.
void refine_bracket(const std::function<AngleEval(double)>& eval, double a, double b,
                    int iters, double& best_theta, AngleEval& best) {
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - ratio * (b - a);
  double x2 = a + ratio * (b - a);
  AngleEval f1 = eval(x1);
  AngleEval f2 = eval(x2);
  for (int k = 0; k < iters; ++k) {
    if (f1.objective < best.objective) {
      best = f1;
      best_theta = x1;
    }
    if (f2.objective < best.objective) {
      best = f2;
      best_theta = x2;
    }
    if (f1.objective <= f2.objective) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = eval(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = eval(x2);
    }
  }
}

AngleResult run_search(const BatchSet& batches, double tau,
                       const AngleSearchConfig& cfg,
                       const std::function<AngleEval(double)>& eval,
                       bool sensitivity_ties) {
  cfg.validate();
  const int g = cfg.grid_points;
  const double step = (cfg.hi - cfg.lo) / static_cast<double>(g);

  AngleResult result;
  result.scan_table.reserve(g);

  int best_k = -1;
  AngleEval best;
  for (int k = 0; k < g; ++k) {
    const double theta = cfg.lo + step * static_cast<double>(k);
    const AngleEval ev = eval(theta);
    result.scan_table.push_back({theta, ev.objective, ev.kept_dim});
    bool take = false;
    if (ev.objective < best.objective - kTieTol) {
      take = true;
    } else if (sensitivity_ties && ev.objective <= best.objective + kTieTol &&
               ev.objective < kInf && ev.sensitivity < best.sensitivity) {
      take = true;
    } else if (!sensitivity_ties && ev.objective < best.objective) {
      take = true;
    }
    if (take) {
      best = ev;
      best_k = k;
    }
  }
  if (best_k < 0 || !(best.objective < kInf))
    throw AllAnglesEmpty("no angle in [" + std::to_string(cfg.lo) + ", " +
                         std::to_string(cfg.hi) + ") admits a usable solve");

  double best_theta = result.scan_table[static_cast<std::size_t>(best_k)].theta;
  const double lo_br = (best_k > 0) ? result.scan_table[best_k - 1].theta : best_theta;
  const double hi_br =
      (best_k + 1 < g) ? result.scan_table[best_k + 1].theta : best_theta;
  if (cfg.refine_iters > 0 && hi_br > lo_br)
    refine_bracket(eval, lo_br, hi_br, cfg.refine_iters, best_theta, best);

  // An angle of exactly zero means no rotation at all; prefer it whenever it
  // ties the winner.
  if (cfg.lo == 0.0) {
    const AngleScanRow& zero = result.scan_table.front();
    const double tol = sensitivity_ties ? kTieTol : 0.0;
    if (zero.objective <= best.objective + tol && zero.objective < kInf &&
        best_theta != 0.0) {
      best_theta = 0.0;
      best = eval(0.0);
    }
  }

  result.theta = best_theta;
  result.objective = best.objective;
  result.estimate = best.estimate;
  result.kept_dims.reserve(batches.batch_pencils.size());
  for (const PencilXcd& batch : batches.batch_pencils) {
    try {
      result.kept_dims.push_back(solve_rotated(batch, best_theta, tau).kept_dim);
    } catch (const Error&) {
      result.kept_dims.push_back(0);
    }
  }
  return result;
}

}  // namespace

void AngleSearchConfig::validate() const {
  if (grid_points < 8)
    throw std::invalid_argument("grid_points must be at least 8");
  if (refine_iters < 0)
    throw std::invalid_argument("refine_iters must be nonnegative");
  if (!(hi > lo)) throw std::invalid_argument("angle domain is empty");
}

std::vector<std::pair<double, RealVector>> scan_overlap_spectrum(
    const PencilXcd& p, const std::vector<double>& thetas) {
  std::vector<std::pair<double, RealVector>> rows;
  rows.reserve(thetas.size());
  for (double theta : thetas) {
    const PencilXcd rotated = rotate_pencil(p, theta);
    rows.emplace_back(theta, eigh_values(rotated.s));
  }
  return rows;
}

AngleResult optimize_theta_oracle(const BatchSet& batches, double tau, double e_ref,
                                  const AngleSearchConfig& cfg) {
  const PencilXcd aggregate = aggregate_pencil(batches);
  return run_search(
      batches, tau, cfg,
      [&](double theta) { return eval_oracle(aggregate, theta, tau, e_ref); },
      true);
}

AngleResult optimize_theta_heuristic(const BatchSet& batches, double tau,
                                     const AngleSearchConfig& cfg) {
  const PencilXcd aggregate = aggregate_pencil(batches);
  return run_search(
      batches, tau, cfg,
      [&](double theta) { return eval_heuristic(batches, aggregate, theta, tau); },
      false);
}

}  // namespace krot
