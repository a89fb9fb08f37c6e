#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "krot/rng.hpp"
#include "oracles.hpp"

using namespace krot;

TEST_CASE("fold is reproducible") {
  CHECK(rng::fold(42, 7) == oracle::kFoldA);
  CHECK(rng::fold(rng::fold(42, 7), 3) == oracle::kFoldAB);
  CHECK(rng::fold(42, 7) != rng::fold(7, 42));
}

TEST_CASE("stream produces the pinned 64-bit sequence") {
  rng::Stream s(oracle::kStreamSeed, {oracle::kStreamTagA, oracle::kStreamTagB});
  for (std::uint64_t expected : oracle::kU64Sequence) CHECK(s.next_u64() == expected);
}

TEST_CASE("derive equals folding the tag into the constructor") {
  rng::Stream direct(42, {7, 3});
  rng::Stream derived = rng::Stream(42, {7}).derive({3});
  for (int i = 0; i < 8; ++i) CHECK(direct.next_u64() == derived.next_u64());
}

TEST_CASE("uniform draws match the pinned sequence and stay inside (0,1)") {
  rng::Stream s(42, {7, 3});
  for (double expected : oracle::kUniformSequence) CHECK(s.uniform01() == expected);

  rng::Stream t(1234, {});
  for (int i = 0; i < 100000; ++i) {
    const double u = t.uniform01();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal draws match the pinned sequence") {
  rng::Stream s(42, {7, 3});
  for (double expected : oracle::kNormalSequence)
    CHECK(s.normal() == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("normal draws have unit variance and zero mean") {
  rng::Stream s(7, {});
  const int n = 100000;
  double sum = 0.0;
  double sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = s.normal();
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("identical streams agree, sibling streams do not") {
  rng::Stream a(9, {1, 2});
  rng::Stream b(9, {1, 2});
  rng::Stream c(9, {2, 1});
  bool saw_difference = false;
  for (int i = 0; i < 16; ++i) {
    const std::uint64_t va = a.next_u64();
    CHECK(va == b.next_u64());
    if (va != c.next_u64()) saw_difference = true;
  }
  CHECK(saw_difference);
}

TEST_CASE("hermitian noise draws in the documented order") {
  const double variance = 0.04;
  const Eigen::Index d = 3;
  rng::Stream s(11, {5});
  const Matrix noise = rng::hermitian_noise(d, variance, s);

  rng::Stream mirror(11, {5});
  Matrix expected = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    expected(i, i) = Complex(mirror.normal() * std::sqrt(variance), 0.0);
  const double off = std::sqrt(variance / 2.0);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const double re = mirror.normal() * off;
      const double im = mirror.normal() * off;
      expected(i, j) = Complex(re, im);
      expected(j, i) = Complex(re, -im);
    }
  }
  CHECK((noise - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("hermitian noise output is exactly Hermitian with real diagonal") {
  rng::Stream s(3, {});
  const Matrix noise = rng::hermitian_noise(5, 1.0, s);
  CHECK((noise - noise.adjoint()).cwiseAbs().maxCoeff() == 0.0);
  for (Eigen::Index i = 0; i < 5; ++i) CHECK(noise(i, i).imag() == 0.0);
}

TEST_CASE("zero variance consumes no draws and returns zero") {
  rng::Stream s(21, {4});
  const Matrix noise = rng::hermitian_noise(4, 0.0, s);
  CHECK(noise.cwiseAbs().maxCoeff() == 0.0);
  rng::Stream untouched(21, {4});
  CHECK(s.next_u64() == untouched.next_u64());
}

TEST_CASE("hermitian noise element variances scale as documented") {
  rng::Stream s(17, {});
  const double variance = 0.25;
  const int n = 20000;
  double diag_sq = 0.0;
  double off_re_sq = 0.0;
  double off_im_sq = 0.0;
  for (int k = 0; k < n; ++k) {
    const Matrix m = rng::hermitian_noise(2, variance, s);
    diag_sq += m(0, 0).real() * m(0, 0).real();
    off_re_sq += m(0, 1).real() * m(0, 1).real();
    off_im_sq += m(0, 1).imag() * m(0, 1).imag();
  }
  CHECK(diag_sq / n == doctest::Approx(variance).epsilon(0.05));
  CHECK(off_re_sq / n == doctest::Approx(variance / 2.0).epsilon(0.05));
  CHECK(off_im_sq / n == doctest::Approx(variance / 2.0).epsilon(0.05));
}
