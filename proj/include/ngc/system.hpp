#pragma once

#include <string>

#include "ngc/matcore.hpp"

namespace ngc {

// Discrete-time stochastic plant x_{k+1} = A x_k + B u_k + w_k,
// w_k ~ N(0, W). Ts is metadata for reporting and CSV time stamps.
struct LinearSystem {
  Matrix A;
  Matrix B;
  SymMatrix W;
  double Ts = 1.0;
  std::string name;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }

  void validate(const NumericPolicy& pol = {}) const {
    if (A.rows() != A.cols() || A.rows() < 1)
      throw InvalidConfig("LinearSystem: A must be square");
    if (B.rows() != A.rows() || B.cols() < 1)
      throw InvalidConfig("LinearSystem: B row count must match A");
    if (W.dim() != A.rows())
      throw InvalidConfig("LinearSystem: W dimension must match A");
    if (min_eig(W, pol) <= 0.0)
      throw InvalidConfig("LinearSystem: W must be positive definite");
    if (!(Ts > 0.0)) throw InvalidConfig("LinearSystem: Ts must be positive");
  }
};

}  // namespace ngc
