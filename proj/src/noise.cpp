#include "krot/noise.hpp"

#include <cmath>
#include <stdexcept>

#include "krot/psd_projection.hpp"

namespace krot {

void NoiseConfig::validate() const {
  if (level < 0.0) throw std::invalid_argument("noise level must be nonnegative");
  if (n_batches < 2) throw InsufficientBatches("need at least 2 batches, got " +
                                               std::to_string(n_batches));
  if (per_batch < 1) throw std::invalid_argument("per_batch must be at least 1");
}

PencilXcd sample_noisy_pencil(const PencilXcd& truth, double variance,
                              rng::Stream& stream) {
  const Eigen::Index d = truth.dim();
  Matrix h = truth.h.mat() + rng::hermitian_noise(d, variance, stream);
  Matrix s = truth.s.mat() + rng::hermitian_noise(d, variance, stream);
  return PencilXcd(HermitianXcd::from_upper(h), HermitianXcd::from_upper(s));
}

namespace {

PencilXcd batch_average_literal(const PencilXcd& truth, double variance, int p,
                                rng::Stream& stream) {
  const Eigen::Index d = truth.dim();
  Matrix h_sum = Matrix::Zero(d, d);
  Matrix s_sum = Matrix::Zero(d, d);
  for (int k = 0; k < p; ++k) {
    PencilXcd sample = sample_noisy_pencil(truth, variance, stream);
    h_sum += sample.h.mat();
    s_sum += sample.s.mat();
  }
  const double inv = 1.0 / static_cast<double>(p);
  return PencilXcd(HermitianXcd::from_upper(h_sum * inv),
                   HermitianXcd::from_upper(s_sum * inv));
}

}  // namespace

BatchSet batch_averages(const PencilXcd& truth, const NoiseConfig& cfg) {
  cfg.validate();
  BatchSet out;
  out.noise = cfg;
  out.dim = truth.dim();
  out.batch_pencils.reserve(cfg.n_batches);
  out.weights.assign(cfg.n_batches, 1.0);
  out.projection_warning.assign(cfg.n_batches, 0);
  for (int q = 0; q < cfg.n_batches; ++q) {
    rng::Stream stream(cfg.seed, {rng::kTagBatch, static_cast<std::uint64_t>(q)});
    PencilXcd batch =
        cfg.literal
            ? batch_average_literal(truth, cfg.level, cfg.per_batch, stream)
            : sample_noisy_pencil(truth, cfg.level / cfg.per_batch, stream);
    ProjectionReport<Complex> report = nearest_physical_overlap(batch.s);
    if (!report.converged) out.projection_warning[q] = 1;
    out.batch_pencils.emplace_back(batch.h, report.projected);
  }
  return out;
}

BatchEnergies batch_ground_energies(const BatchSet& batches, double tau, double theta) {
  BatchEnergies out;
  out.values.reserve(batches.batch_pencils.size());
  out.weights.reserve(batches.batch_pencils.size());
  for (std::size_t q = 0; q < batches.batch_pencils.size(); ++q) {
    try {
      RitzSolution<Complex> sol = solve_rotated(batches.batch_pencils[q], theta, tau);
      out.values.push_back(sol.values[0]);
      out.weights.push_back(batches.weights[q]);
    } catch (const Error&) {
      ++out.excluded;
    }
  }
  if (out.excluded > 0 && !out.weights.empty()) {
    double total = 0.0;
    for (double w : out.weights) total += w;
    if (total > 0.0) {
      const double scale = static_cast<double>(out.weights.size()) / total;
      for (double& w : out.weights) w *= scale;
    }
  }
  return out;
}

std::pair<double, double> weighted_mean_and_sigma(const std::vector<double>& energies,
                                                  const std::vector<double>& weights) {
  if (energies.size() != weights.size())
    throw DimensionMismatch("energies and weights differ in length");
  const std::size_t n = energies.size();
  if (n < 2)
    throw InsufficientBatches("need at least 2 batch energies, got " + std::to_string(n));
  double mean = 0.0;
  for (std::size_t q = 0; q < n; ++q) mean += weights[q] * energies[q];
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t q = 0; q < n; ++q) {
    const double d = energies[q] - mean;
    var += d * d;
  }
  var /= static_cast<double>(n);
  return {mean, std::sqrt(var)};
}

double convergence_epsilon(double sigma_j, double sigma_jm1, double gamma) {
  return gamma * std::max(sigma_j, sigma_jm1);
}

PencilXcd aggregate_pencil(const BatchSet& batches) {
  const int n = batches.size();
  if (n < 1) throw InsufficientBatches("cannot aggregate an empty batch set");
  const Eigen::Index d = batches.dim;
  Matrix h = Matrix::Zero(d, d);
  Matrix s = Matrix::Zero(d, d);
  for (int q = 0; q < n; ++q) {
    h += batches.weights[q] * batches.batch_pencils[q].h.mat();
    s += batches.weights[q] * batches.batch_pencils[q].s.mat();
  }
  const double inv = 1.0 / static_cast<double>(n);
  HermitianXcd s_mean = HermitianXcd::from_upper(s * inv);
  ProjectionReport<Complex> report = nearest_physical_overlap(s_mean);
  return PencilXcd(HermitianXcd::from_upper(h * inv), report.projected);
}

PipelineResult iterative_basis_construction(const TruthSource& truth,
                                            const NoiseConfig& ncfg,
                                            const ConvergenceConfig& ccfg,
                                            double tau) {
  ncfg.validate();
  if (ccfg.max_iterations < 1)
    throw std::invalid_argument("max_iterations must be at least 1");

  PipelineResult result;
  const Eigen::Index d_cap =
      std::min<Eigen::Index>(truth.max_dim(), 1 + ccfg.max_iterations);

  double prev_mu = 0.0;
  double prev_sigma = 0.0;
  for (Eigen::Index d = 2; d <= d_cap; ++d) {
    PencilXcd pencil = truth.pencil_at(d);

    NoiseConfig cfg_d = ncfg;
    cfg_d.seed = rng::fold(rng::fold(ncfg.seed, rng::kTagDim),
                           static_cast<std::uint64_t>(d));
    BatchSet batches = batch_averages(pencil, cfg_d);

    BatchEnergies energies = batch_ground_energies(batches, tau, 0.0);
    auto [mu, sigma] = weighted_mean_and_sigma(energies.values, energies.weights);

    PipelineIteration it;
    it.dim = d;
    it.mu0_bar = mu;
    it.sigma = sigma;
    const bool first = result.history.empty();
    it.epsilon = convergence_epsilon(sigma, first ? sigma : prev_sigma, ccfg.gamma);
    it.delta = first ? 0.0 : std::abs(mu - prev_mu);
    result.history.push_back(it);

    result.converged_dim = d;
    result.mu0_bar = mu;
    result.sigma = sigma;
    result.batches = std::move(batches);

    if (!first) {
      if (it.delta < it.epsilon) {
        result.converged = true;
        result.stop_reason = "statistical";
        break;
      }
      if (it.delta < ccfg.hard_floor) {
        result.converged = true;
        result.stop_reason = "hard_floor";
        break;
      }
    }
    prev_mu = mu;
    prev_sigma = sigma;
  }

  if (result.history.empty())
    throw std::invalid_argument("basis construction needs room for dimension 2");
  if (!result.converged) {
    // Running out of basis vectors is a natural terminal state; running out
    // of iteration budget is not.
    result.stop_reason =
        (result.converged_dim >= truth.max_dim()) ? "basis_exhausted" : "max_iterations";
  }
  result.aggregate = aggregate_pencil(result.batches);
  return result;
}

PipelineResult iterative_basis_construction(const HamiltonianModel& model,
                                            const KrylovConfig& kcfg,
                                            const NoiseConfig& ncfg,
                                            const ConvergenceConfig& ccfg,
                                            double tau) {
  KrylovTruth truth(model, kcfg);
  return iterative_basis_construction(truth, ncfg, ccfg, tau);
}

}  // namespace krot
