#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "krot/hermitian.hpp"
#include "krot/krylov.hpp"
#include "krot/pencil.hpp"
#include "krot/rng.hpp"
#include "oracles.hpp"

using namespace krot;

namespace {

PencilXcd toy() { return build_toy_pencil(ToyParams{}); }

// A random pencil with positive definite overlap.
PencilXcd random_pd_pencil(Eigen::Index dim, std::uint64_t seed) {
  rng::Stream s(seed, {});
  const Matrix h = rng::hermitian_noise(dim, 1.0, s);
  const Matrix b = rng::hermitian_noise(dim, 1.0, s);
  const Matrix g = b * b.adjoint() + 0.5 * Matrix::Identity(dim, dim);
  return PencilXcd(HermitianXcd::from_upper(h), HermitianXcd::from_upper(g));
}

}  // namespace

TEST_CASE("hermitian wrapper validates symmetry") {
  Matrix m(2, 2);
  m << Complex(1, 0), Complex(0, 1), Complex(0, -1), Complex(2, 0);
  CHECK(is_hermitian(m));
  CHECK_NOTHROW(HermitianXcd{m});

  m(0, 1) = Complex(0.5, 0);
  CHECK_FALSE(is_hermitian(m));
  CHECK_THROWS_AS(HermitianXcd{m}, NotHermitian);

  CHECK_THROWS_AS(HermitianXcd{Matrix::Zero(2, 3)}, DimensionMismatch);
}

TEST_CASE("from_upper mirrors the strict upper triangle") {
  Matrix m(2, 2);
  m << Complex(1, 1e-15), Complex(0.3, 0.4), Complex(99, 99), Complex(2, 0);
  const HermitianXcd h = HermitianXcd::from_upper(m);
  CHECK(h.mat()(0, 0) == Complex(1, 0));
  CHECK(h.mat()(1, 0) == Complex(0.3, -0.4));
  CHECK((h.mat() - h.mat().adjoint()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("eigh reproduces a known spectrum") {
  const PencilXcd p = toy();
  const RealVector eigs = eigh_values(p.s);
  REQUIRE(eigs.size() == 3);
  for (int i = 0; i < 3; ++i)
    CHECK(eigs(i) == doctest::Approx(oracle::kToyOverlapEigs[i]).epsilon(1e-12));
  CHECK(spectral_norm(p.s) == doctest::Approx(1.9).epsilon(1e-12));
}

TEST_CASE("threshold solve recovers the exact triple when everything is kept") {
  const RitzXcd sol = solve_gevp_thresholded(toy(), 1e-12);
  REQUIRE(sol.kept_dim == 3);
  for (int i = 0; i < 3; ++i)
    CHECK(sol.values(i) == doctest::Approx(oracle::kToyGevp[i]).epsilon(1e-9));
  for (Eigen::Index i = 0; i + 1 < sol.values.size(); ++i)
    CHECK(sol.values(i) <= sol.values(i + 1));
}

TEST_CASE("threshold solve keeps one state at tau above the middle eigenvalue") {
  const RitzXcd sol = solve_gevp_thresholded(toy(), 1.05);
  CHECK(sol.kept_dim == 1);
  CHECK(sol.values(0) == doctest::Approx(oracle::kToyGevp[2]).epsilon(1e-9));
}

TEST_CASE("eigenvalues exactly at tau are kept") {
  Matrix h = Matrix::Identity(2, 2);
  Matrix s(2, 2);
  s << Complex(0.5, 0), Complex(0, 0), Complex(0, 0), Complex(1, 0);
  const PencilXcd p{HermitianXcd(h), HermitianXcd(s)};
  CHECK(solve_gevp_thresholded(p, 0.5).kept_dim == 2);
  CHECK(solve_gevp_thresholded(p, 0.5 + 1e-12).kept_dim == 1);
}

TEST_CASE("thresholding everything raises EmptySubspace") {
  CHECK_THROWS_AS(solve_gevp_thresholded(toy(), 5.0), EmptySubspace);
}

TEST_CASE("eigenvector phase is fixed to a real positive leading component") {
  const RitzXcd sol = solve_gevp_thresholded(toy(), 1e-12);
  for (Eigen::Index k = 0; k < sol.kept_dim; ++k) {
    CHECK(sol.vectors.col(k).norm() == doctest::Approx(1.0).epsilon(1e-12));
    for (Eigen::Index i = 0; i < sol.vectors.rows(); ++i) {
      const Complex c = sol.vectors(i, k);
      if (std::abs(c) > 1e-12) {
        CHECK(c.real() > 0.0);
        CHECK(std::abs(c.imag()) < 1e-12);
        break;
      }
    }
  }
}

TEST_CASE("rotation mixes the pencil with the documented signs") {
  const PencilXcd p = toy();
  const double theta = 0.7;
  const PencilXcd r = rotate_pencil(p, theta);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  CHECK((r.h.mat() - (p.h.mat() * c - p.s.mat() * s)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((r.s.mat() - (p.s.mat() * c + p.h.mat() * s)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("rotation is 2 pi periodic and pi-shift negates both matrices") {
  const PencilXcd p = toy();
  const double theta = 0.9;
  const PencilXcd r = rotate_pencil(p, theta);
  const PencilXcd r2pi = rotate_pencil(p, theta + 2.0 * M_PI);
  CHECK((r.h.mat() - r2pi.h.mat()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((r.s.mat() - r2pi.s.mat()).cwiseAbs().maxCoeff() < 1e-14);

  const PencilXcd rpi = rotate_pencil(p, theta + M_PI);
  CHECK((rpi.h.mat() + r.h.mat()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((rpi.s.mat() + r.s.mat()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("forward and back transforms are inverse on finite rays") {
  const double theta = 0.7;
  const double fwd = forward_transform(11.0, theta);
  CHECK(fwd == doctest::Approx(oracle::kForwardOfEleven).epsilon(1e-12));
  CHECK(back_transform(fwd, theta) == doctest::Approx(11.0).epsilon(1e-9));

  const double pole = std::cos(theta) / std::sin(theta);
  CHECK_THROWS_AS(back_transform(pole, theta), AtInfinity);
}

TEST_CASE("unthresholded rotated solve matches the unrotated one") {
  // The rotated overlap stays positive definite only while
  // cos(theta) + mu sin(theta) > 0 for every eigenvalue mu; outside that
  // window the tau = 0 solve rightly loses directions, so equivalence is
  // checked strictly inside it.
  const PencilXcd p = random_pd_pencil(5, 31);
  const RitzXcd base = solve_gevp_thresholded(p, 0.0);
  const double hi = std::atan(base.values(0)) + M_PI / 2.0;
  for (double frac : {0.2, 0.5, 0.9}) {
    const double theta = frac * hi;
    const RitzXcd rot = solve_rotated(p, theta, 0.0);
    REQUIRE(rot.kept_dim == base.kept_dim);
    for (Eigen::Index i = 0; i < base.values.size(); ++i) {
      const double scale = std::max(1.0, std::abs(base.values(i)));
      CHECK(std::abs(rot.values(i) - base.values(i)) / scale < 1e-8);
    }
  }
}

TEST_CASE("outside the positive definite window directions drop out") {
  const PencilXcd p = random_pd_pencil(5, 31);
  const RitzXcd base = solve_gevp_thresholded(p, 0.0);
  const double hi = std::atan(base.values(0)) + M_PI / 2.0;
  const RitzXcd rot = solve_rotated(p, hi + 0.05, 0.0);
  CHECK(rot.kept_dim < base.kept_dim);
}

TEST_CASE("rotation inside the all-kept window recovers the discarded ground state") {
  const PencilXcd p = toy();
  const double mid = 0.5 * (oracle::kAllKeptLo + oracle::kAllKeptHi);
  const RitzXcd sol = solve_rotated(p, mid, 1.05);
  CHECK(sol.kept_dim == 3);
  CHECK(sol.values(0) == doctest::Approx(oracle::kToyReference).epsilon(1e-9));

  CHECK(solve_rotated(p, oracle::kAllKeptLo - 0.01, 1.05).kept_dim < 3);
  CHECK(solve_rotated(p, oracle::kAllKeptLo + 0.01, 1.05).kept_dim == 3);
  CHECK(solve_rotated(p, oracle::kAllKeptHi - 0.01, 1.05).kept_dim == 3);
  CHECK(solve_rotated(p, oracle::kAllKeptHi + 0.01, 1.05).kept_dim < 3);
}

TEST_CASE("back-transformed values come out ascending") {
  const RitzXcd sol = solve_rotated(toy(), 1.4, 1.05);
  for (Eigen::Index i = 0; i + 1 < sol.values.size(); ++i)
    CHECK(sol.values(i) <= sol.values(i + 1));
}

TEST_CASE("rays through the pole are dropped and counted") {
  const double theta = 0.7;
  Matrix hq(2, 2);
  hq << Complex(std::cos(theta) / std::sin(theta), 0), Complex(0, 0), Complex(0, 0),
      Complex(1, 0);
  const PencilXcd q{HermitianXcd(hq), HermitianXcd(Matrix::Identity(2, 2))};
  const PencilXcd p = rotate_pencil(q, -theta);

  const RitzXcd sol = solve_rotated(p, theta, 0.0);
  CHECK(sol.dropped_at_infinity == 1);
  CHECK(sol.kept_dim == 1);
  CHECK(sol.values(0) == doctest::Approx(back_transform(1.0, theta)).epsilon(1e-9));
}

TEST_CASE("overlap regularization reproduces the shifted exact triple") {
  const RitzXcd sol = tikhonov_solve(toy(), 0.01);
  REQUIRE(sol.kept_dim == 3);
  for (int i = 0; i < 3; ++i)
    CHECK(sol.values(i) == doctest::Approx(oracle::kTikhonovTriple[i]).epsilon(1e-9));
}

TEST_CASE("regularization refuses an overlap it cannot make positive definite") {
  Matrix s(2, 2);
  s << Complex(-0.02, 0), Complex(0, 0), Complex(0, 0), Complex(1, 0);
  const PencilXcd p{HermitianXcd(Matrix::Identity(2, 2)), HermitianXcd(s)};
  CHECK_THROWS_AS(tikhonov_solve(p, 0.01), NotPositiveDefinite);
}

TEST_CASE("noise magnitude combines both perturbations in spectral norm") {
  const PencilXcd p = random_pd_pencil(3, 8);
  Matrix e = Matrix::Zero(3, 3);
  e(0, 0) = Complex(0.1, 0);
  const PencilXcd h_only(HermitianXcd::from_upper(p.h.mat() + e), p.s);
  CHECK(noise_magnitude(p, h_only) == doctest::Approx(0.1).epsilon(1e-12));
  const PencilXcd both(HermitianXcd::from_upper(p.h.mat() + e),
                       HermitianXcd::from_upper(p.s.mat() + e));
  CHECK(noise_magnitude(p, both) == doctest::Approx(std::sqrt(0.02)).epsilon(1e-12));
}

TEST_CASE("ground sensitivity is one for an orthonormal overlap") {
  Matrix h(2, 2);
  h << Complex(2, 0), Complex(0, 0), Complex(0, 0), Complex(1, 0);
  const PencilXcd p{HermitianXcd(h), HermitianXcd(Matrix::Identity(2, 2))};
  CHECK(ground_sensitivity(p, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sensitivity refuses a degenerate normalization") {
  Matrix s(2, 2);
  s << Complex(1e-14, 0), Complex(0, 0), Complex(0, 0), Complex(1, 0);
  Vector c(2);
  c << Complex(1, 0), Complex(0, 0);
  CHECK_THROWS_AS(detail::sensitivity_norm(c, s), DegenerateNormalization);
}
