#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "krot/hermitian.hpp"
#include "krot/pencil.hpp"
#include "krot/rng.hpp"
#include "krot/types.hpp"

namespace krot {

// Ground-truth Hamiltonian with its exact eigendecomposition cached.
// The cache is what makes real-time evolution exact: applying
// exp(-i H t) reduces to per-mode phases in the eigenbasis.
struct HamiltonianModel {
  HermitianXcd matrix;
  RealVector spectrum;   // ascending
  Matrix eigenbasis;     // orthonormal columns matching spectrum
};

inline HamiltonianModel make_hamiltonian_model(HermitianXcd matrix) {
  EighResult<Complex> es = eigh(matrix);
  return {std::move(matrix), std::move(es.values), std::move(es.vectors)};
}

// Parameters of the 3x3 toy pencil: a Hamiltonian diagonal in the overlap
// eigenbasis, with one eigenvalue tied to the smallest overlap direction so
// that thresholding visibly discards the true ground state.
struct ToyParams {
  double xi = 1.1;
  double delta = 0.1;
  double big_delta = 2.0;
  double s = 0.9;

  void validate() const {
    if (!(xi > 0.0) || !(delta > 0.0) || !(big_delta > 0.0))
      throw std::invalid_argument("ToyParams: xi, delta, big_delta must be positive");
    if (!(s >= 0.0 && s < 1.0))
      throw std::invalid_argument("ToyParams: s must lie in [0, 1)");
  }

  // Exact generalized ground value xi / (1 - s).
  double reference_energy() const { return xi / (1.0 - s); }
};

struct KrylovConfig {
  double dt = 0.0;
  Eigen::Index max_dim = 2;
  Vector psi0;
};

// The 3x3 toy pencil. Overlap couples the last two basis states with
// strength s; the Hamiltonian is diagonal in the overlap eigenbasis
// e- = (psi1 - psi2)/sqrt(2), e0 = psi0, e+ = (psi1 + psi2)/sqrt(2) with
// entries xi, xi/(1-s) + delta, and (1+s) xi/(1-s) + big_delta.
inline PencilXcd build_toy_pencil(const ToyParams& params) {
  params.validate();
  Matrix s0 = Matrix::Identity(3, 3);
  s0(1, 2) = params.s;
  s0(2, 1) = params.s;

  Vector em(3), e0(3), ep(3);
  const double r = 1.0 / std::sqrt(2.0);
  em << 0.0, r, -r;
  e0 << 1.0, 0.0, 0.0;
  ep << 0.0, r, r;
  const double le = params.xi;
  const double l0 = params.xi / (1.0 - params.s) + params.delta;
  const double lp = (1.0 + params.s) * params.xi / (1.0 - params.s) + params.big_delta;
  Matrix h0 = le * (em * em.adjoint()) + l0 * (e0 * e0.adjoint()) + lp * (ep * ep.adjoint());

  return PencilXcd(HermitianXcd::from_upper(h0), HermitianXcd::from_upper(s0));
}

// Synthetic stand-in for a chemistry Hamiltonian: a seeded Hermitian
// Gaussian ensemble draw rescaled so the spectral range equals gap_scale.
// Deterministic per (dim, seed).
inline HamiltonianModel random_hamiltonian(Eigen::Index dim, std::uint64_t seed,
                                           double gap_scale) {
  if (dim < 2) throw std::invalid_argument("random_hamiltonian: dim must be >= 2");
  rng::Stream stream(seed, {rng::kTagModel});
  const Matrix raw = rng::hermitian_noise(dim, 1.0, stream);
  const EighResult<Complex> es = eigh(HermitianXcd::from_upper(raw));
  const double range = es.values[dim - 1] - es.values[0];
  const double factor = gap_scale / range;
  HamiltonianModel model;
  model.matrix = HermitianXcd::from_upper(raw * factor);
  model.spectrum = es.values * factor;
  model.eigenbasis = es.vectors;
  return model;
}

// Time step resolving the full spectral range: dt = pi / (lambda_max - lambda_min).
inline double select_dt(const HamiltonianModel& model) {
  const Eigen::Index n = model.spectrum.size();
  const double range = model.spectrum[n - 1] - model.spectrum[0];
  if (range < 1e-12)
    throw DegenerateSpectrum("select_dt: spectral range " + std::to_string(range));
  return std::numbers::pi / range;
}

// Deterministic reference state with nonzero overlap on every eigenvector:
// coefficient 1 on the ground mode and seeded coefficients in
// [0.3, 0.35) on the rest, normalized. Stands in for a mean-field guess
// that is ground-dominated but spectrally complete.
inline Vector default_psi0(const HamiltonianModel& model, std::uint64_t seed) {
  const Eigen::Index n = model.spectrum.size();
  rng::Stream stream(seed, {rng::kTagPsi0});
  RealVector a(n);
  a[0] = 1.0;
  for (Eigen::Index k = 1; k < n; ++k) a[k] = 0.3 + 0.05 * stream.uniform01();
  Vector psi = model.eigenbasis * a.cast<Complex>();
  psi /= psi.norm();
  return psi;
}

// State after j exact evolution steps: exp(-i H j dt) psi0, applied as
// per-mode phases in the cached eigenbasis. Unitary, so the norm is
// preserved.
inline Vector krylov_state(const HamiltonianModel& model, const KrylovConfig& cfg,
                           Eigen::Index j) {
  if (j < 0 || j > cfg.max_dim)
    throw std::invalid_argument("krylov_state: j must lie in [0, max_dim]");
  const Vector coeff = model.eigenbasis.adjoint() * cfg.psi0;
  Vector phased(coeff.size());
  const double t = static_cast<double>(j) * cfg.dt;
  for (Eigen::Index k = 0; k < coeff.size(); ++k) {
    const double phase = -model.spectrum[k] * t;
    phased[k] = coeff[k] * Complex(std::cos(phase), std::sin(phase));
  }
  return model.eigenbasis * phased;
}

// Subspace pencil over the first d Krylov states: H = V' Hhat V, S = V' V,
// computed on the upper triangle and mirrored so both are exactly Hermitian.
inline PencilXcd build_subspace_pencil(const HamiltonianModel& model,
                                       const KrylovConfig& cfg, Eigen::Index d) {
  if (d < 1 || d > cfg.max_dim + 1)
    throw std::invalid_argument("build_subspace_pencil: d must lie in [1, max_dim + 1]");
  Matrix v(cfg.psi0.size(), d);
  for (Eigen::Index j = 0; j < d; ++j) v.col(j) = krylov_state(model, cfg, j);
  const Matrix h = v.adjoint() * model.matrix.mat() * v;
  const Matrix s = v.adjoint() * v;
  return PencilXcd(HermitianXcd::from_upper(h), HermitianXcd::from_upper(s));
}

// File I/O for the dense-matrix JSON format: an object with fields `dim`
// and `entries`, the latter a row-major list of [re, im] pairs of length
// dim squared. Readers validate Hermiticity to 1e-12.
HamiltonianModel load_hamiltonian(const std::string& path);
void save_hamiltonian(const HermitianXcd& matrix, const std::string& path);
std::string hamiltonian_to_json(const HermitianXcd& matrix);
HamiltonianModel hamiltonian_from_json(const std::string& text);

}  // namespace krot
