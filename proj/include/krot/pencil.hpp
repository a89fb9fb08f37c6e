#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "krot/hermitian.hpp"
#include "krot/types.hpp"

namespace krot {

// Back-transformed eigenvalues with |cos(theta) - mu_theta sin(theta)| at or
// below this are treated as lying on the projective ray beta = 0 (infinity).
inline constexpr double kPoleTolerance = 1e-12;

// Rayleigh-quotient denominators c'Sc at or below this cannot normalize a
// sensitivity estimate.
inline constexpr double kNormalizationFloor = 1e-12;

// The pair (H, S) defining the generalized eigenvalue problem H v = mu S v.
template <class Scalar>
struct MatrixPencil {
  Hermitian<Scalar> h;
  Hermitian<Scalar> s;

  MatrixPencil() = default;
  MatrixPencil(Hermitian<Scalar> h_in, Hermitian<Scalar> s_in)
      : h(std::move(h_in)), s(std::move(s_in)) {
    if (h.dim() != s.dim())
      throw DimensionMismatch("MatrixPencil: H is dim " + std::to_string(h.dim()) +
                              " but S is dim " + std::to_string(s.dim()));
  }

  Eigen::Index dim() const { return h.dim(); }
};

using PencilXcd = MatrixPencil<Complex>;
using PencilXd = MatrixPencil<double>;

// Projective representation (alpha, beta) of a generalized eigenvalue
// mu = alpha / beta. Rotations act linearly on rays, which is what makes the
// eigenvalue back-transform a Mobius map.
struct EigenRay {
  double alpha = 0.0;
  double beta = 1.0;
};

// Solution of a (possibly rotated, possibly thresholded) pencil problem.
// `values` are ascending and live in the original, unrotated eigenvalue
// coordinates; `vectors` are unit-norm coefficient vectors in the original
// pencil basis with the first nonzero component made real and positive.
// kept_dim counts the returned eigenpairs. dropped_at_infinity counts kept
// directions whose back-transformed eigenvalue fell on the beta = 0 ray and
// was excluded from `values`.
template <class Scalar>
struct RitzSolution {
  RealVector values;
  MatrixX<Scalar> vectors;
  Eigen::Index kept_dim = 0;
  double theta = 0.0;
  double tau = 0.0;
  int dropped_at_infinity = 0;
};

using RitzXcd = RitzSolution<Complex>;
using RitzXd = RitzSolution<double>;

namespace detail {

// Unit-normalize each column and rotate its global phase so the first
// component with magnitude above 1e-12 is real and positive.
template <class Scalar>
void fix_phase(MatrixX<Scalar>& vectors) {
  for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
    auto col = vectors.col(k);
    const double nrm = col.norm();
    if (nrm > 0.0) col /= nrm;
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      const double mag = std::abs(col(i));
      if (mag > 1e-12) {
        col *= Eigen::numext::conj(col(i)) / Scalar(mag);
        break;
      }
    }
  }
}

}  // namespace detail

// Whitening basis of the overlap eigenspace at or above tau.
//
// Columns are u_k / sqrt(lambda_k) for each eigenpair of s with
// lambda_k >= tau, in ascending eigenvalue order, so that W' s W = I(k).
// The input may be indefinite (rotated overlaps routinely are); k = 0 is a
// legitimate result the caller must handle.
template <class Scalar>
MatrixX<Scalar> threshold_basis(const Hermitian<Scalar>& s, double tau) {
  const EighResult<Scalar> es = eigh(s);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < es.values.size(); ++i)
    if (es.values[i] >= tau) ++k;
  MatrixX<Scalar> w(s.dim(), k);
  Eigen::Index c = 0;
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    if (es.values[i] >= tau)
      w.col(c++) = es.vectors.col(i) / std::sqrt(es.values[i]);
  }
  return w;
}

// Thresholded generalized eigenvalue solve (canonical orthogonalization).
//
// Discards the overlap eigenspace below tau, solves the whitened standard
// problem W' H W, and maps eigenvectors back to pencil coordinates.
template <class Scalar>
RitzSolution<Scalar> solve_gevp_thresholded(const MatrixPencil<Scalar>& p, double tau) {
  const MatrixX<Scalar> w = threshold_basis(p.s, tau);
  if (w.cols() == 0)
    throw EmptySubspace("solve_gevp_thresholded: threshold " + std::to_string(tau) +
                        " removed every overlap direction");
  const Hermitian<Scalar> reduced =
      Hermitian<Scalar>::from_upper(w.adjoint() * p.h.mat() * w);
  const EighResult<Scalar> es = eigh(reduced);
  RitzSolution<Scalar> sol;
  sol.values = es.values;
  sol.vectors = w * es.vectors;
  detail::fix_phase(sol.vectors);
  sol.kept_dim = w.cols();
  sol.theta = 0.0;
  sol.tau = tau;
  return sol;
}

// SO(2) mixing of the pencil:
//   H_theta = H cos(theta) - S sin(theta)
//   S_theta = S cos(theta) + H sin(theta)
// Real-linear combinations of Hermitian matrices, so the outputs are
// Hermitian exactly. Generalized eigenvectors are invariant; eigenvalues
// move by the Mobius map inverted in back_transform.
template <class Scalar>
MatrixPencil<Scalar> rotate_pencil(const MatrixPencil<Scalar>& p, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  MatrixPencil<Scalar> out;
  out.h = Hermitian<Scalar>::from_upper(p.h.mat() * c - p.s.mat() * s);
  out.s = Hermitian<Scalar>::from_upper(p.s.mat() * c + p.h.mat() * s);
  return out;
}

// Eigenvalue of the rotated problem for a given original eigenvalue mu.
// Derived by rotating the ray (mu, 1) forward and projectivizing.
inline double forward_transform(double mu, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double den = c + mu * s;
  if (std::abs(den) <= kPoleTolerance)
    throw AtInfinity("forward_transform: ray maps to beta = 0");
  return (mu * c - s) / den;
}

// Original-coordinate eigenvalue recovered from a rotated one: the ray
// (mu_theta, 1) rotated by -theta and projectivized.
inline double back_transform(double mu_theta, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double den = c - mu_theta * s;
  if (std::abs(den) <= kPoleTolerance)
    throw AtInfinity("back_transform: ray maps to beta = 0");
  return (mu_theta * c + s) / den;
}

// Rotated thresholding: rotate, threshold-solve, then return eigenvalues to
// the original coordinates.
//
// The Mobius back-transform can reorder eigenvalues, so values are re-sorted
// ascending (vectors permuted along with them); the ground state is the
// minimum finite back-transformed value. Directions whose eigenvalue lands
// on the beta = 0 ray are excluded and counted in dropped_at_infinity.
// Eigenvectors need no back-transform: a rotated pencil has the same
// generalized eigenvectors.
template <class Scalar>
RitzSolution<Scalar> solve_rotated(const MatrixPencil<Scalar>& p, double theta,
                                   double tau) {
  const MatrixPencil<Scalar> rotated = rotate_pencil(p, theta);
  RitzSolution<Scalar> raw = solve_gevp_thresholded(rotated, tau);

  const double c = std::cos(theta);
  const double s = std::sin(theta);
  std::vector<double> finite;
  std::vector<Eigen::Index> keep;
  finite.reserve(raw.values.size());
  int dropped = 0;
  for (Eigen::Index i = 0; i < raw.values.size(); ++i) {
    if (std::abs(c - raw.values[i] * s) <= kPoleTolerance) {
      ++dropped;
      continue;
    }
    finite.push_back((raw.values[i] * c + s) / (c - raw.values[i] * s));
    keep.push_back(i);
  }
  if (finite.empty())
    throw EmptySubspace("solve_rotated: every kept eigenvalue is at infinity");

  std::vector<Eigen::Index> order(finite.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return finite[a] < finite[b]; });

  RitzSolution<Scalar> sol;
  sol.values.resize(static_cast<Eigen::Index>(finite.size()));
  sol.vectors.resize(raw.vectors.rows(), static_cast<Eigen::Index>(finite.size()));
  for (std::size_t k = 0; k < order.size(); ++k) {
    sol.values[static_cast<Eigen::Index>(k)] = finite[order[k]];
    sol.vectors.col(static_cast<Eigen::Index>(k)) = raw.vectors.col(keep[order[k]]);
  }
  sol.kept_dim = sol.values.size();
  sol.theta = theta;
  sol.tau = tau;
  sol.dropped_at_infinity = dropped;
  return sol;
}

// Baseline comparator: regularize the overlap by eps and solve without
// thresholding. Keeps the full dimension.
template <class Scalar>
RitzSolution<Scalar> tikhonov_solve(const MatrixPencil<Scalar>& p, double eps) {
  MatrixX<Scalar> shifted = p.s.mat();
  shifted += eps * MatrixX<Scalar>::Identity(p.dim(), p.dim());
  const Hermitian<Scalar> s_shifted = Hermitian<Scalar>::from_upper(shifted);
  if (eigh_values(s_shifted).minCoeff() <= 0.0)
    throw NotPositiveDefinite("tikhonov_solve: shifted overlap is not positive definite");
  MatrixPencil<Scalar> reg(p.h, s_shifted);
  RitzSolution<Scalar> sol = solve_gevp_thresholded(reg, 0.0);
  sol.tau = 0.0;
  return sol;
}

// Noise magnitude sqrt(|E|^2 + |F|^2) in spectral norms, where E and F are
// the Hamiltonian and overlap perturbations.
template <class Scalar>
double noise_magnitude(const MatrixPencil<Scalar>& truth, const MatrixPencil<Scalar>& noisy) {
  if (truth.dim() != noisy.dim())
    throw DimensionMismatch("noise_magnitude: pencils have dims " +
                            std::to_string(truth.dim()) + " and " +
                            std::to_string(noisy.dim()));
  const double e = spectral_norm(Hermitian<Scalar>::from_upper(noisy.h.mat() - truth.h.mat()));
  const double f = spectral_norm(Hermitian<Scalar>::from_upper(noisy.s.mat() - truth.s.mat()));
  return std::sqrt(e * e + f * f);
}

namespace detail {

// Euclidean norm of c rescaled so that c' s c = 1. For a unit-norm input
// this is 1/sqrt(c' s c). Large values flag ground states dominated by
// small overlap directions, where element noise is amplified most.
template <class Scalar>
double sensitivity_norm(const VectorX<Scalar>& c, const MatrixX<Scalar>& s) {
  const double snorm = std::real(c.dot(s * c));
  if (snorm <= kNormalizationFloor)
    throw DegenerateNormalization("sensitivity: c'Sc is " + std::to_string(snorm));
  return c.norm() / std::sqrt(snorm);
}

}  // namespace detail

// Sensitivity of the thresholded ground state: the norm of its Ritz vector
// after S-normalization, evaluated on the pencil the solve used.
template <class Scalar>
double ground_sensitivity(const MatrixPencil<Scalar>& p, double tau) {
  const RitzSolution<Scalar> sol = solve_gevp_thresholded(p, tau);
  const VectorX<Scalar> c = sol.vectors.col(0);
  return detail::sensitivity_norm(c, p.s.mat());
}

}  // namespace krot
