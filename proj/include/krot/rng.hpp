#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

#include "krot/hermitian.hpp"
#include "krot/types.hpp"

namespace krot::rng {

// Deterministic, schedule-independent randomness.
//
// Every consumer of random numbers derives its own Stream from the master
// seed plus a path of integer tags (for example master -> cell -> batch).
// Streams never share state, so the same configuration produces the same
// numbers no matter how work is distributed across threads.
//
// Mixing function: the splitmix64 finalizer. Stream derivation folds each
// tag into the seed as  s' = mix(s XOR mix(tag XOR GOLDEN)).
// Draws step the state by the golden-ratio increment and finalize.
//
// Gaussians use Box-Muller, two uniforms per draw, no caching; uniforms map
// the top 53 bits into the open interval (0, 1). The draw order is part of
// the contract: reference vectors are pinned in the test suite.

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fold(std::uint64_t seed, std::uint64_t tag) {
  return mix(seed ^ mix(tag ^ kGolden));
}

// Tag registry for stream paths. Values are arbitrary but frozen: changing
// them changes every derived stream.
inline constexpr std::uint64_t kTagModel = 1;
inline constexpr std::uint64_t kTagPsi0 = 2;
inline constexpr std::uint64_t kTagCell = 3;
inline constexpr std::uint64_t kTagBatch = 4;
inline constexpr std::uint64_t kTagToySeed = 5;
inline constexpr std::uint64_t kTagDim = 6;

class Stream {
 public:
  explicit Stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags = {})
      : state_(seed) {
    for (std::uint64_t t : tags) state_ = fold(state_, t);
  }

  Stream derive(std::initializer_list<std::uint64_t> tags) const {
    Stream s(state_);
    for (std::uint64_t t : tags) s.state_ = fold(s.state_, t);
    return s;
  }

  std::uint64_t next_u64() {
    state_ += kGolden;
    return mix(state_);
  }

  // Uniform on (0, 1), both endpoints excluded.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; consumes exactly two uniforms.
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

// Hermitian Gaussian perturbation with per-element variance `variance`:
// diagonal entries are real N(0, variance); each off-diagonal entry has
// independent real and imaginary parts N(0, variance/2), mirrored by
// conjugation. Draw order is pinned: full diagonal first (i ascending), then
// the strict upper triangle row-major, real part before imaginary part.
// A zero variance consumes no draws.
inline Matrix hermitian_noise(Eigen::Index dim, double variance, Stream& stream) {
  Matrix a = Matrix::Zero(dim, dim);
  if (variance == 0.0) return a;
  const double sd = std::sqrt(variance);
  const double sh = std::sqrt(variance / 2.0);
  for (Eigen::Index i = 0; i < dim; ++i) a(i, i) = sd * stream.normal();
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = i + 1; j < dim; ++j) {
      const double re = sh * stream.normal();
      const double im = sh * stream.normal();
      a(i, j) = Complex(re, im);
      a(j, i) = Complex(re, -im);
    }
  }
  return a;
}

}  // namespace krot::rng
