#pragma once

// Shared fixtures for the test suite: seeded random matrices and the
// benchmark plant used across modules.

#include <cstdint>

#include "ngc/gaussian.hpp"
#include "ngc/matcore.hpp"
#include "ngc/system.hpp"

namespace ngc_test {

inline ngc::Matrix random_matrix(int rows, int cols, std::uint64_t seed) {
  ngc::NormalStream s(seed);
  ngc::Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = s.next();
  return m;
}

inline ngc::SymMatrix random_pd(int n, std::uint64_t seed) {
  ngc::Matrix a = random_matrix(n, n, seed);
  return ngc::SymMatrix(a * a.transpose() + ngc::Matrix::Identity(n, n));
}

inline ngc::LinearSystem quanser(double w_scale = 1e-4) {
  ngc::LinearSystem sys;
  sys.name = "quanser-qube-servo2";
  sys.Ts = 0.01;
  sys.A.resize(4, 4);
  sys.A << 1.0, 0.0073, 0.0094, 0.0,
           0.0, 1.012, -0.0006, 0.01,
           0.0, 1.43, 0.89, 0.0026,
           0.0, 2.55, -0.12, 1.0;
  sys.B.resize(4, 1);
  sys.B << 0.0024, 0.0024, 0.48, 0.47;
  sys.W = ngc::SymMatrix(w_scale * ngc::Matrix::Identity(4, 4));
  return sys;
}

inline ngc::LinearSystem scalar_system(double a, double b, double w,
                                       double ts = 1.0) {
  ngc::LinearSystem sys;
  sys.name = "scalar";
  sys.Ts = ts;
  sys.A = ngc::Matrix::Constant(1, 1, a);
  sys.B = ngc::Matrix::Constant(1, 1, b);
  sys.W = ngc::SymMatrix(ngc::Matrix::Constant(1, 1, w));
  return sys;
}

// Independent scalar feasibility oracle: grid search over (y, sigma, m)
// with f eliminated through the equality a y + b f = y - 2 alpha sigma.
// The Schur blocks are evaluated in closed form.
inline bool scalar_grid_feasible(double a, double b, double w, double alpha,
                                 double lambda, int points = 50,
                                 double lo = 1e-3, double hi = 1e3) {
  if (b == 0.0) {
    // equality forces sigma = (1 - a) y / (2 alpha); feasibility needs
    // y > 0 and sigma > 0 simultaneously
    if ((1.0 - a) <= 0.0) return false;
  }
  auto min_eig2 = [](double p, double q, double r) {
    // symmetric [[p, q], [q, r]]
    const double tr = p + r;
    const double disc = std::sqrt((p - r) * (p - r) + 4.0 * q * q);
    return 0.5 * (tr - disc);
  };
  const double step = std::pow(hi / lo, 1.0 / (points - 1));
  for (double y = lo; y <= hi * 1.0001; y *= step) {
    for (double s = lo; s <= hi * 1.0001; s *= step) {
      if (b == 0.0) {
        const double s_req = (1.0 - a) * y / (2.0 * alpha);
        if (std::abs(s - s_req) > 0.05 * s_req) continue;
      }
      const double g = y - 2.0 * alpha * s;
      const double e1 = min_eig2(lambda * y, g, y);
      if (e1 <= 0.0) continue;
      for (double m = lo; m <= hi * 1.0001; m *= step) {
        const double e2 = min_eig2(s - w, g, m);
        if (e2 <= 0.0) continue;
        const double e3 = min_eig2(m, y, s);
        if (e3 <= 0.0) continue;
        return true;
      }
    }
  }
  return false;
}

}  // namespace ngc_test
