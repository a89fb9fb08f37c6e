#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace krot {

using Complex = std::complex<double>;

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<Complex>;
using Vector = VectorX<Complex>;
using RealVector = Eigen::VectorXd;

// Error hierarchy. Every failure the library can signal derives from Error,
// so callers that orchestrate many solves (the grid harness) can catch one
// type and record the reason string.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Input violates the conjugate-symmetry invariant beyond tolerance.
class NotHermitian : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

// Thresholding removed every overlap direction; the solve has no subspace.
class EmptySubspace : public Error {
 public:
  using Error::Error;
};

// A back-transformed eigenvalue sits on the projective ray beta = 0.
class AtInfinity : public Error {
 public:
  using Error::Error;
};

class DegenerateNormalization : public Error {
 public:
  using Error::Error;
};

class DegenerateSpectrum : public Error {
 public:
  using Error::Error;
};

class InsufficientBatches : public Error {
 public:
  using Error::Error;
};

// Every candidate rotation angle produced an empty kept subspace.
class AllAnglesEmpty : public Error {
 public:
  using Error::Error;
};

class DecompositionFailure : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace krot
