#pragma once

#include <string>
#include <utility>

#include <Eigen/Dense>

#include "krot/types.hpp"

namespace krot {

// Maximum absolute asymmetry |a(i,j) - conj(a(j,i))| over all element pairs.
template <class Derived>
double max_asymmetry(const Eigen::MatrixBase<Derived>& a) {
  return (a.derived() - a.derived().adjoint()).cwiseAbs().maxCoeff();
}

template <class Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& a, double tol = 1e-12) {
  if (a.rows() != a.cols()) return false;
  return max_asymmetry(a) <= tol;
}

// Symmetrize by averaging with the adjoint. Used wherever a product is
// Hermitian in exact arithmetic but carries roundoff skew.
template <class Derived>
MatrixX<typename Derived::Scalar> hermitianize(const Eigen::MatrixBase<Derived>& a) {
  return ((a.derived() + a.derived().adjoint()) * 0.5).eval();
}

// Mirror the upper triangle (diagonal included, imaginary parts of the
// diagonal discarded) onto the lower triangle.
template <class Derived>
MatrixX<typename Derived::Scalar> mirror_upper(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  MatrixX<Scalar> m = a.derived();
  const Eigen::Index n = m.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = Scalar(std::real(m(i, i)));
    for (Eigen::Index j = i + 1; j < n; ++j) m(j, i) = Eigen::numext::conj(m(i, j));
  }
  return m;
}

// Dense square matrix with conjugate symmetry enforced at construction.
//
// The wrapper stores an exactly Hermitian matrix: construction validates the
// input against `tol` and then mirrors the upper triangle so that downstream
// eigensolvers never see roundoff skew. Carrier for Hamiltonians, overlaps,
// and noise matrices alike.
template <class Scalar>
class Hermitian {
 public:
  Hermitian() = default;

  explicit Hermitian(MatrixX<Scalar> m, double tol = 1e-12) {
    if (m.rows() != m.cols())
      throw DimensionMismatch("Hermitian: matrix is " + std::to_string(m.rows()) + "x" +
                              std::to_string(m.cols()));
    if (m.rows() < 1) throw DimensionMismatch("Hermitian: dim must be >= 1");
    const double skew = max_asymmetry(m);
    if (!(skew <= tol))
      throw NotHermitian("Hermitian: max asymmetry " + std::to_string(skew) +
                         " exceeds tolerance " + std::to_string(tol));
    mat_ = mirror_upper(m);
  }

  // Accept any matrix and force symmetry instead of validating it.
  static Hermitian from_upper(const MatrixX<Scalar>& m) {
    Hermitian h;
    if (m.rows() != m.cols() || m.rows() < 1)
      throw DimensionMismatch("Hermitian::from_upper: not a square matrix of dim >= 1");
    h.mat_ = mirror_upper(m);
    return h;
  }

  static Hermitian identity(Eigen::Index dim) {
    Hermitian h;
    h.mat_ = MatrixX<Scalar>::Identity(dim, dim);
    return h;
  }

  Eigen::Index dim() const { return mat_.rows(); }
  const MatrixX<Scalar>& mat() const { return mat_; }

 private:
  MatrixX<Scalar> mat_;
};

using HermitianXcd = Hermitian<Complex>;
using HermitianXd = Hermitian<double>;

template <class Scalar>
struct EighResult {
  RealVector values;         // ascending
  MatrixX<Scalar> vectors;   // orthonormal columns, vectors.col(k) pairs with values[k]
};

// Dense Hermitian eigendecomposition, ascending eigenvalues.
template <class Scalar>
EighResult<Scalar> eigh(const Hermitian<Scalar>& a) {
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(a.mat());
  if (es.info() != Eigen::Success)
    throw DecompositionFailure("eigh: solver did not converge on dim " +
                               std::to_string(a.dim()));
  return {es.eigenvalues(), es.eigenvectors()};
}

template <class Scalar>
RealVector eigh_values(const Hermitian<Scalar>& a) {
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(a.mat(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw DecompositionFailure("eigh: solver did not converge on dim " +
                               std::to_string(a.dim()));
  return es.eigenvalues();
}

// Spectral norm of a Hermitian matrix: largest absolute eigenvalue.
template <class Scalar>
double spectral_norm(const Hermitian<Scalar>& a) {
  return eigh_values(a).cwiseAbs().maxCoeff();
}

}  // namespace krot
