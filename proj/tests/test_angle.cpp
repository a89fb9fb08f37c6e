#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "krot/angle.hpp"
#include "krot/krylov.hpp"
#include "krot/noise.hpp"
#include "krot/pencil.hpp"
#include "oracles.hpp"

using namespace krot;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

BatchSet single_batch(const PencilXcd& p) {
  BatchSet b;
  b.dim = p.dim();
  b.batch_pencils.push_back(p);
  b.weights = {1.0};
  b.projection_warning = {0};
  return b;
}

BatchSet repeated_batches(const PencilXcd& p, int n) {
  BatchSet b;
  b.dim = p.dim();
  for (int q = 0; q < n; ++q) {
    b.batch_pencils.push_back(p);
    b.weights.push_back(1.0);
    b.projection_warning.push_back(0);
  }
  return b;
}

// Overlap [[1,1],[1,1]] is physical but singular; the null direction carries
// Hamiltonian weight, so its generalized eigenvalue sits at infinity. Every
// rotation moves that direction into the kept subspace and the back-transform
// hits the pole, so only theta = 0 (where thresholding removes it) is usable.
PencilXcd pole_pencil() {
  Matrix s(2, 2);
  s << Complex(1, 0), Complex(1, 0), Complex(1, 0), Complex(1, 0);
  return PencilXcd(HermitianXcd(Matrix::Identity(2, 2)), HermitianXcd(s));
}

}  // namespace

TEST_CASE("angle search config validation") {
  AngleSearchConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.grid_points = 7;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = AngleSearchConfig{};
  cfg.refine_iters = -1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = AngleSearchConfig{};
  cfg.hi = cfg.lo;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("overlap spectrum scan interpolates between S and H") {
  const PencilXcd toy = build_toy_pencil(ToyParams{});
  const auto rows = scan_overlap_spectrum(toy, {0.0, M_PI / 2.0});
  REQUIRE(rows.size() == 2);

  CHECK(rows[0].first == 0.0);
  for (int i = 0; i < 3; ++i)
    CHECK(std::abs(rows[0].second(i) - oracle::kToyOverlapEigs[i]) < 1e-12);

  const RealVector h_eigs = eigh_values(toy.h);
  for (int i = 0; i < 3; ++i)
    CHECK(std::abs(rows[1].second(i) - h_eigs(i)) < 1e-12);
}

TEST_CASE("toy kept dimension follows the frozen angle windows") {
  const PencilXcd toy = build_toy_pencil(ToyParams{});
  const double tau = 1.05;
  const double pad = 0.01;

  CHECK(solve_rotated(toy, oracle::kAllKeptLo - pad, tau).kept_dim == 2);
  CHECK(solve_rotated(toy, oracle::kAllKeptLo + pad, tau).kept_dim == 3);
  CHECK(solve_rotated(toy, oracle::kAllKeptHi - pad, tau).kept_dim == 3);
  CHECK(solve_rotated(toy, oracle::kAllKeptHi + pad, tau).kept_dim == 2);
  CHECK(solve_rotated(toy, oracle::kKeptTwoToOneEdge - pad, tau).kept_dim == 2);
  CHECK(solve_rotated(toy, oracle::kKeptTwoToOneEdge + pad, tau).kept_dim == 1);
}

TEST_CASE("oracle search recovers the reference on the noiseless toy") {
  const BatchSet batches = single_batch(build_toy_pencil(ToyParams{}));
  const AngleResult r = optimize_theta_oracle(batches, 1.05, oracle::kToyReference);

  CHECK(r.theta > 1.3);
  CHECK(r.theta < 1.5);
  CHECK(r.objective <= 1e-8);
  CHECK(std::abs(r.estimate - oracle::kToyReference) <= 1e-8);
  CHECK(r.scan_table.size() == 181);
  REQUIRE(r.kept_dims.size() == 1);
  CHECK(r.kept_dims[0] == 3);

  // Unrotated thresholding at this tau keeps one direction and lands far
  // from the reference; the rotation recovers it.
  const AngleScanRow& zero = r.scan_table.front();
  CHECK(zero.kept_dim == 1);
  CHECK(zero.objective > 1.0);
}

TEST_CASE("scan table covers the domain on an ascending grid") {
  const BatchSet batches = single_batch(build_toy_pencil(ToyParams{}));
  AngleSearchConfig cfg;
  cfg.grid_points = 64;
  const AngleResult r = optimize_theta_oracle(batches, 1.05, 11.0, cfg);
  REQUIRE(r.scan_table.size() == 64);
  const double step = (cfg.hi - cfg.lo) / 64.0;
  for (std::size_t k = 0; k < r.scan_table.size(); ++k)
    CHECK(std::abs(r.scan_table[k].theta - (cfg.lo + step * k)) < 1e-12);
}

TEST_CASE("positive definite overlap at tau zero ties back to no rotation") {
  const BatchSet batches = single_batch(build_toy_pencil(ToyParams{}));
  const AngleResult r = optimize_theta_oracle(batches, 0.0, oracle::kToyReference);
  CHECK(r.theta == 0.0);
  CHECK(r.objective <= 1e-10);
  CHECK(std::abs(r.estimate - oracle::kToyReference) <= 1e-8);
}

TEST_CASE("a pole inside the kept subspace poisons the angle") {
  const BatchSet batches = single_batch(pole_pencil());

  const AngleResult r = optimize_theta_oracle(batches, 1e-12, 0.5);
  CHECK(r.theta == 0.0);
  CHECK(r.objective <= 1e-12);
  for (std::size_t k = 1; k < r.scan_table.size(); ++k)
    CHECK(r.scan_table[k].objective == kInf);

  AngleSearchConfig away;
  away.lo = 0.1;
  CHECK_THROWS_AS(optimize_theta_oracle(batches, 1e-12, 0.5, away), AllAnglesEmpty);
}

TEST_CASE("heuristic with identical batches settles on the smallest angle") {
  const BatchSet batches = repeated_batches(build_toy_pencil(ToyParams{}), 2);
  const AngleResult r = optimize_theta_heuristic(batches, 1.05);
  CHECK(r.theta == 0.0);
  CHECK(r.objective == 0.0);
  REQUIRE(r.kept_dims.size() == 2);
  CHECK(r.kept_dims[0] == 1);
}

TEST_CASE("heuristic variance objective decreases relative to no rotation") {
  NoiseConfig cfg;
  cfg.level = 1e-4;
  cfg.n_batches = 20;
  cfg.seed = 33;
  const BatchSet batches = batch_averages(build_toy_pencil(ToyParams{}), cfg);

  AngleSearchConfig acfg;
  acfg.grid_points = 90;
  acfg.refine_iters = 12;
  const AngleResult r = optimize_theta_heuristic(batches, 1.05, acfg);

  CHECK(r.objective < kInf);
  CHECK(r.theta >= 0.0);
  CHECK(r.theta < acfg.hi);
  CHECK(r.kept_dims.size() == 20);
  CHECK(r.objective <= r.scan_table.front().objective);

  const BatchEnergies at_best = batch_ground_energies(batches, 1.05, r.theta);
  const auto [mean, sigma] =
      weighted_mean_and_sigma(at_best.values, at_best.weights);
  CHECK(std::abs(r.objective - sigma * sigma) < 1e-12);
  CHECK(std::abs(r.estimate - mean) < 1e-12);
}

TEST_CASE("heuristic with no usable angle reports the failure") {
  const BatchSet batches = repeated_batches(build_toy_pencil(ToyParams{}), 2);
  CHECK_THROWS_AS(optimize_theta_heuristic(batches, 1e6), AllAnglesEmpty);
}
