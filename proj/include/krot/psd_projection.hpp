#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "krot/hermitian.hpp"
#include "krot/types.hpp"

namespace krot {

inline constexpr int kProjectionMaxIter = 500;
inline constexpr double kProjectionTol = 1e-10;
inline constexpr double kPsdTol = 1e-9;
inline constexpr double kDiagTol = 1e-10;

template <class Scalar>
struct ProjectionReport {
  Hermitian<Scalar> projected;
  double frobenius_distance = 0.0;
  int iterations = 0;
  bool converged = false;
};

// True when s satisfies the physical-overlap constraints: unit diagonal
// within diag_tol and minimum eigenvalue at least -psd_tol.
template <class Scalar>
bool is_physical_overlap(const Hermitian<Scalar>& s, double psd_tol = kPsdTol,
                         double diag_tol = kDiagTol) {
  for (Eigen::Index i = 0; i < s.dim(); ++i)
    if (std::abs(s.mat()(i, i) - Scalar(1)) > diag_tol) return false;
  return eigh_values(s).minCoeff() >= -psd_tol;
}

namespace detail {

template <class Scalar>
MatrixX<Scalar> clip_to_psd(const MatrixX<Scalar>& m) {
  const EighResult<Scalar> es = eigh(Hermitian<Scalar>::from_upper(m));
  const RealVector clipped = es.values.cwiseMax(0.0);
  return mirror_upper(es.vectors * clipped.asDiagonal() * es.vectors.adjoint());
}

template <class Scalar>
void overwrite_unit_diagonal(MatrixX<Scalar>& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, i) = Scalar(1);
}

}  // namespace detail

// Frobenius-nearest physical overlap matrix: Hermitian, positive
// semidefinite, unit diagonal.
//
// Alternating projections between the PSD cone (eigenvalue clipping) and the
// unit-diagonal affine set, with Dykstra's correction applied to the cone
// step. The correction is what makes the iteration converge to the true
// nearest point of the intersection rather than just any point in it; the
// affine step needs none. Converged when successive iterates differ by at
// most tol in Frobenius norm; on max_iter exhaustion the best iterate is
// returned with converged = false and the caller decides whether to proceed.
template <class Scalar>
ProjectionReport<Scalar> nearest_physical_overlap(const Hermitian<Scalar>& s,
                                                  int max_iter = kProjectionMaxIter,
                                                  double tol = kProjectionTol) {
  MatrixX<Scalar> y = s.mat();
  MatrixX<Scalar> dual = MatrixX<Scalar>::Zero(s.dim(), s.dim());

  ProjectionReport<Scalar> report;
  for (int it = 1; it <= max_iter; ++it) {
    const MatrixX<Scalar> r = y - dual;
    const MatrixX<Scalar> x = detail::clip_to_psd(r);
    dual = x - r;
    MatrixX<Scalar> y_next = x;
    detail::overwrite_unit_diagonal(y_next);
    const double step = (y_next - y).norm();
    y = std::move(y_next);
    report.iterations = it;
    if (step <= tol) {
      report.converged = true;
      break;
    }
  }
  report.projected = Hermitian<Scalar>::from_upper(y);
  report.frobenius_distance = (y - s.mat()).norm();
  return report;
}

}  // namespace krot
