#pragma once

// Gaussian state-distribution tooling: seeded sampling, score function,
// Fisher information and its Monte Carlo estimate.

#include <cstdint>
#include <random>
#include <vector>

#include "ngc/matcore.hpp"

namespace ngc {

// Deterministic standard-normal stream. Box-Muller over a seeded 64-bit
// Mersenne engine: reproducibility given the seed is the contract, the
// transform keeps the byte stream identical across standard libraries.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : eng_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  Vector next_vector(int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = next();
    return v;
  }

 private:
  double uniform01() {
    // 53-bit mantissa from the raw engine output
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

struct GaussianState {
  Vector mean;
  SymMatrix cov;

  int dim() const { return static_cast<int>(mean.size()); }

  void validate(const NumericPolicy& pol = {}) const {
    if (cov.dim() != mean.size())
      throw DimensionMismatch("GaussianState: mean/cov dimensions differ");
    if (min_eig(cov, pol) <= 0.0)
      throw InvalidConfig("GaussianState: covariance must be positive definite");
  }
};

// samples = mean + L z with L L^T = cov and z from the seeded stream.
inline std::vector<Vector> sample(const GaussianState& g, std::uint64_t seed,
                                  int count, const NumericPolicy& pol = {}) {
  if (count < 1) throw InvalidConfig("sample: count must be >= 1");
  const Matrix l = cholesky(g.cov, pol);
  NormalStream stream(seed);
  std::vector<Vector> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i)
    out.push_back(g.mean + l * stream.next_vector(g.dim()));
  return out;
}

// Score of the mean parameter: Sigma^{-1} (x - mu).
inline Vector score(const Vector& x, const GaussianState& g,
                    const NumericPolicy& pol = {}) {
  if (x.size() != g.mean.size()) throw DimensionMismatch("score");
  return chol_solve(g.cov, Matrix(x - g.mean), pol);
}

// Fisher information of the mean parameter: the precision matrix.
inline SymMatrix fim(const GaussianState& g, const NumericPolicy& pol = {}) {
  return chol_inverse(g.cov, pol);
}

// Empirical E[score score^T]; converges to fim(g) as count grows.
inline SymMatrix mc_fim_estimate(const GaussianState& g, std::uint64_t seed,
                                 int count, const NumericPolicy& pol = {}) {
  if (count < 1000) throw InvalidConfig("mc_fim_estimate: count must be >= 1000");
  const int n = g.dim();
  Matrix acc = Matrix::Zero(n, n);
  const Matrix l = cholesky(g.cov, pol);
  NormalStream stream(seed);
  for (int i = 0; i < count; ++i) {
    const Vector x = g.mean + l * stream.next_vector(n);
    const Vector s = score(x, g, pol);
    acc += s * s.transpose();
  }
  return SymMatrix(acc / static_cast<double>(count));
}

inline double log_density(const Vector& x, const GaussianState& g,
                          const NumericPolicy& pol = {}) {
  if (x.size() != g.mean.size()) throw DimensionMismatch("log_density");
  const Matrix l = cholesky(g.cov, pol);
  const Vector d = x - g.mean;
  const Vector y = l.triangularView<Eigen::Lower>().solve(d);
  double logdet = 0.0;
  for (int i = 0; i < g.dim(); ++i) logdet += 2.0 * std::log(l(i, i));
  return -0.5 * y.squaredNorm() -
         0.5 * (logdet + g.dim() * std::log(2.0 * M_PI));
}

}  // namespace ngc
