#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "krot/krylov.hpp"
#include "krot/pencil.hpp"
#include "krot/rng.hpp"
#include "krot/types.hpp"

namespace krot {

// Measurement-noise simulation parameters. `level` is the per-element
// Gaussian variance. Each of the n_batches batch averages pools per_batch
// independent noisy measurements of every matrix element.
//
// literal = false uses the distributional shortcut: a mean of per_batch
// i.i.d. Gaussian perturbations is itself Gaussian with variance
// level / per_batch, so one draw at the reduced variance replaces
// per_batch draws. The literal mode materializes every draw and exists to
// validate the shortcut.
struct NoiseConfig {
  double level = 0.0;
  int n_batches = 100;
  int per_batch = 1250;
  std::uint64_t seed = 0;
  bool literal = false;

  void validate() const;
};

// n batch-averaged pencils with their weights. Overlaps have already been
// replaced by their nearest physical projections; projection_warning marks
// batches whose projection hit the iteration cap.
struct BatchSet {
  std::vector<PencilXcd> batch_pencils;
  std::vector<double> weights;
  std::vector<char> projection_warning;
  NoiseConfig noise;
  Eigen::Index dim = 0;

  int size() const { return static_cast<int>(batch_pencils.size()); }
};

// Stop rule parameters for the iterative basis construction: the loop ends
// when the ground-energy move falls below gamma times the larger of the two
// most recent batch standard deviations, or below the absolute hard floor.
struct ConvergenceConfig {
  double gamma = 1.0;
  double hard_floor = 1e-4;
  int max_iterations = 34;
};

struct PipelineIteration {
  Eigen::Index dim = 0;
  double mu0_bar = 0.0;
  double sigma = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;   // |mu0_bar - previous mu0_bar|; 0 on the first iteration
};

struct PipelineResult {
  Eigen::Index converged_dim = 0;
  double mu0_bar = 0.0;
  double sigma = 0.0;
  PencilXcd aggregate;
  std::vector<PipelineIteration> history;
  BatchSet batches;      // batch set of the final dimension, pre-aggregation
  bool converged = false;
  // "statistical" or "hard_floor" when converged; "basis_exhausted" when the
  // truth source ran out of dimensions first; "max_iterations" when the
  // iteration budget did.
  std::string stop_reason;
};

// Ground energies of a batch set solved at (theta, tau). Batches whose kept
// subspace is empty are excluded and counted; weights track the survivors.
struct BatchEnergies {
  std::vector<double> values;
  std::vector<double> weights;
  int excluded = 0;
};

// One noisy measurement of a pencil: independent Hermitian Gaussian
// perturbations of per-element variance `variance` added to H and to S, in
// that draw order.
PencilXcd sample_noisy_pencil(const PencilXcd& truth, double variance,
                              rng::Stream& stream);

// Batch averages of noisy measurements of `truth`, one stream per batch
// derived from cfg.seed, each overlap projected back to the physical set.
BatchSet batch_averages(const PencilXcd& truth, const NoiseConfig& cfg);

BatchEnergies batch_ground_energies(const BatchSet& batches, double tau, double theta);

// Weighted batch statistics: mu0_bar = (1/n) sum w_q e_q and
// sigma = sqrt((1/n) sum (e_q - mu0_bar)^2).
std::pair<double, double> weighted_mean_and_sigma(const std::vector<double>& energies,
                                                  const std::vector<double>& weights);

// gamma * max(sigma_j, sigma_jm1).
double convergence_epsilon(double sigma_j, double sigma_jm1, double gamma);

// Weighted average of the batch pencils, overlap re-projected to physical.
PencilXcd aggregate_pencil(const BatchSet& batches);

// Source of nested truth pencils indexed by subspace dimension. The Krylov
// source grows a real-time basis; the toy source exposes leading principal
// subpencils of its fixed 3x3 problem so the same growth loop drives both.
class TruthSource {
 public:
  virtual ~TruthSource() = default;
  virtual PencilXcd pencil_at(Eigen::Index d) const = 0;
  virtual Eigen::Index max_dim() const = 0;
};

class KrylovTruth final : public TruthSource {
 public:
  KrylovTruth(const HamiltonianModel& model, KrylovConfig cfg)
      : model_(model), cfg_(std::move(cfg)) {}
  PencilXcd pencil_at(Eigen::Index d) const override {
    return build_subspace_pencil(model_, cfg_, d);
  }
  Eigen::Index max_dim() const override { return cfg_.max_dim; }

 private:
  const HamiltonianModel& model_;
  KrylovConfig cfg_;
};

class ToyTruth final : public TruthSource {
 public:
  explicit ToyTruth(const ToyParams& params) : full_(build_toy_pencil(params)) {}
  PencilXcd pencil_at(Eigen::Index d) const override {
    return PencilXcd(HermitianXcd::from_upper(full_.h.mat().topLeftCorner(d, d)),
                     HermitianXcd::from_upper(full_.s.mat().topLeftCorner(d, d)));
  }
  Eigen::Index max_dim() const override { return full_.dim(); }

 private:
  PencilXcd full_;
};

// Noise-aware iterative basis construction.
//
// Starting at dimension 2, each iteration rebuilds the truth pencil at the
// next dimension, draws fresh batch averages, computes the weighted ground
// statistics, and stops once the energy move |mu0_bar_j - mu0_bar_{j-1}|
// drops below the statistical epsilon or below the hard floor. Per-batch
// solves run unrotated at threshold tau. Iteration j uses batch streams
// derived from (seed, dim tag, j, batch tag, q), so schedules and thread
// counts cannot change the draws.
PipelineResult iterative_basis_construction(const TruthSource& truth,
                                            const NoiseConfig& ncfg,
                                            const ConvergenceConfig& ccfg,
                                            double tau = 1e-12);

// Convenience overload for Krylov-grown models.
PipelineResult iterative_basis_construction(const HamiltonianModel& model,
                                            const KrylovConfig& kcfg,
                                            const NoiseConfig& ncfg,
                                            const ConvergenceConfig& ccfg,
                                            double tau = 1e-12);

}  // namespace krot
