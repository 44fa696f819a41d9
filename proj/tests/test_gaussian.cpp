#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "ngc/gaussian.hpp"
#include "test_util.hpp"

using namespace ngc;
using ngc_test::random_pd;

static GaussianState make_state(const Vector& mean, const Matrix& cov) {
  return {mean, SymMatrix(cov)};
}

TEST_CASE("state validation") {
  GaussianState g = make_state(Vector::Zero(2), Matrix::Identity(3, 3));
  CHECK_THROWS_AS(g.validate(), DimensionMismatch);
  Matrix indef(2, 2);
  indef << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(make_state(Vector::Zero(2), indef).validate(), InvalidConfig);
  CHECK_NOTHROW(make_state(Vector::Zero(2), Matrix::Identity(2, 2)).validate());
}

TEST_CASE("sampling is deterministic given the seed") {
  GaussianState g = make_state(Vector::Ones(3), random_pd(3, 9).mat());
  auto a = sample(g, 42, 50);
  auto b = sample(g, 42, 50);
  REQUIRE(a.size() == 50);
  for (int i = 0; i < 50; ++i) CHECK((a[i] - b[i]).norm() == 0.0);
  auto c = sample(g, 43, 50);
  CHECK((a[0] - c[0]).norm() > 0.0);
}

TEST_CASE("sample count must be at least one") {
  GaussianState g = make_state(Vector::Zero(1), Matrix::Identity(1, 1));
  CHECK_THROWS_AS(sample(g, 1, 0), InvalidConfig);
  CHECK_THROWS_AS(sample(g, 1, -5), InvalidConfig);
  CHECK(sample(g, 1, 1).size() == 1);
}

TEST_CASE("empirical moments at 1e5 samples") {
  Matrix cov = Matrix::Zero(2, 2);
  cov(0, 0) = 1.0;
  cov(1, 1) = 4.0;
  Vector mean(2);
  mean << -1.0, 2.0;
  GaussianState g = make_state(mean, cov);
  const int count = 100000;
  auto xs = sample(g, 7, count);

  Vector m = Vector::Zero(2);
  for (const auto& x : xs) m += x;
  m /= count;
  CHECK((m - mean).norm() <= 0.03);

  Matrix c = Matrix::Zero(2, 2);
  for (const auto& x : xs) c += (x - m) * (x - m).transpose();
  c /= (count - 1.0);
  CHECK(std::abs(c(0, 0) - 1.0) <= 0.02);
  CHECK(std::abs(c(1, 1) - 4.0) <= 0.08);  // 2% relative
  CHECK(std::abs(c(0, 1)) <= 0.05);
}

TEST_CASE("score matches finite differences of log_density in the mean") {
  GaussianState g = make_state(Vector::Ones(3), random_pd(3, 17).mat());
  NormalStream s(23);
  const double h = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    Vector x = g.mean + s.next_vector(3);
    Vector sc = score(x, g);
    for (int i = 0; i < 3; ++i) {
      GaussianState gp = g, gm = g;
      gp.mean[i] += h;
      gm.mean[i] -= h;
      const double fd =
          (log_density(x, gp) - log_density(x, gm)) / (2.0 * h);
      CHECK(std::abs(fd - sc[i]) <= 1e-6);
    }
  }
  CHECK_THROWS_AS(score(Vector::Zero(2), g), DimensionMismatch);
}

TEST_CASE("fim is the precision matrix") {
  Matrix cov = Matrix::Zero(2, 2);
  cov(0, 0) = 2.0;
  cov(1, 1) = 5.0;
  SymMatrix f = fim(make_state(Vector::Zero(2), cov));
  CHECK(f(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f(1, 1) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(std::abs(f(0, 1)) <= 1e-14);

  GaussianState g = make_state(Vector::Zero(3), random_pd(3, 29).mat());
  CHECK((fim(g).mat() * g.cov.mat() - Matrix::Identity(3, 3)).norm() <= 1e-12);
}

TEST_CASE("mc_fim_estimate converges to fim within 2% at 1e5 samples") {
  GaussianState g = make_state(Vector::Ones(2), random_pd(2, 31).mat());
  SymMatrix exact = fim(g);
  SymMatrix est = mc_fim_estimate(g, 11, 100000);
  CHECK((est.mat() - exact.mat()).norm() <= 0.02 * exact.mat().norm());
  CHECK_THROWS_AS(mc_fim_estimate(g, 11, 999), InvalidConfig);
}

TEST_CASE("log_density closed-form spot checks") {
  GaussianState g1 = make_state(Vector::Zero(1), Matrix::Identity(1, 1));
  CHECK(log_density(Vector::Zero(1), g1) ==
        doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-14));
  CHECK(log_density(Vector::Ones(1), g1) ==
        doctest::Approx(-0.5 - 0.5 * std::log(2.0 * M_PI)).epsilon(1e-14));

  GaussianState g2 = make_state(Vector::Zero(2), Matrix::Identity(2, 2));
  CHECK(log_density(Vector::Zero(2), g2) ==
        doctest::Approx(-std::log(2.0 * M_PI)).epsilon(1e-14));

  // variance scaling shifts the normalizer by -0.5 log 4
  GaussianState g3 = make_state(Vector::Zero(1), 4.0 * Matrix::Identity(1, 1));
  CHECK(log_density(Vector::Zero(1), g3) ==
        doctest::Approx(-0.5 * std::log(2.0 * M_PI) - 0.5 * std::log(4.0))
            .epsilon(1e-14));
  CHECK_THROWS_AS(log_density(Vector::Zero(2), g1), DimensionMismatch);
}

TEST_CASE("density integrates to one (trapezoid quadrature)") {
  GaussianState g = make_state(Vector::Constant(1, 0.3),
                               0.7 * Matrix::Identity(1, 1));
  const double sd = std::sqrt(0.7);
  const double lo = 0.3 - 8.0 * sd, hi = 0.3 + 8.0 * sd;
  const int steps = 20000;
  const double dx = (hi - lo) / steps;
  double acc = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double x = lo + i * dx;
    const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
    acc += w * std::exp(log_density(Vector::Constant(1, x), g));
  }
  CHECK(std::abs(acc * dx - 1.0) <= 1e-4);
}

TEST_CASE("scaling equivariance of sampling is exact") {
  // chol(4 Sigma) = 2 chol(Sigma) holds exactly in IEEE arithmetic, so
  // zero-mean samples with covariance 4 Sigma are bitwise twice the
  // covariance-Sigma samples under the same seed.
  SymMatrix sigma = random_pd(3, 41);
  GaussianState g1 = make_state(Vector::Zero(3), sigma.mat());
  GaussianState g4 = make_state(Vector::Zero(3), 4.0 * sigma.mat());
  auto a = sample(g1, 77, 25);
  auto b = sample(g4, 77, 25);
  for (int i = 0; i < 25; ++i) CHECK((2.0 * a[i] - b[i]).norm() == 0.0);
}
