#pragma once

// Discrete-time infinite-horizon LQR baseline.

#include "ngc/matcore.hpp"
#include "ngc/system.hpp"

namespace ngc {

struct LqrConfig {
  SymMatrix Q;
  SymMatrix R;
  long iteration_cap = 100000;
  double tolerance = 1e-12;

  void validate(int n, int m, const NumericPolicy& pol = {}) const {
    if (Q.dim() != n) throw InvalidConfig("LqrConfig: Q must be n x n");
    if (R.dim() != m) throw InvalidConfig("LqrConfig: R must be m x m");
    if (min_eig(Q, pol) < -1e-10) throw InvalidConfig("LqrConfig: Q must be PSD");
    if (min_eig(R, pol) <= 0.0) throw InvalidConfig("LqrConfig: R must be PD");
  }
};

// Fixed-point iteration on the Riccati recursion from P0 = Q. Simple and
// adequate at this scale; the cap makes divergence detectable.
inline SymMatrix solve_dare(const LinearSystem& sys, const LqrConfig& cfg,
                            const NumericPolicy& pol = {}) {
  cfg.validate(sys.n(), sys.m(), pol);
  if (controllability_rank(sys.A, sys.B, pol) != sys.n())
    throw Uncontrollable("solve_dare: (A, B) is not controllable");
  const Matrix& A = sys.A;
  const Matrix& B = sys.B;
  Matrix p = cfg.Q.mat();
  for (long it = 0; it < cfg.iteration_cap; ++it) {
    const Matrix btp = B.transpose() * p;
    const SymMatrix gram(cfg.R.mat() + btp * B);
    const Matrix gain_term = chol_solve(gram, btp * A, pol);
    Matrix next = A.transpose() * p * A -
                  (btp * A).transpose() * gain_term + cfg.Q.mat();
    next = 0.5 * (next + next.transpose().eval());
    const double inc = (next - p).norm();
    p = next;
    if (inc <= cfg.tolerance * (1.0 + p.norm())) return SymMatrix(p);
  }
  throw ConvergenceFailure("solve_dare: iteration cap reached");
}

// K = -(R + B^T P B)^{-1} B^T P A; u = K x carries the minus sign.
inline Matrix lqr_gain(const LinearSystem& sys, const SymMatrix& p_plus,
                       const LqrConfig& cfg, const NumericPolicy& pol = {}) {
  const Matrix btp = sys.B.transpose() * p_plus.mat();
  SymMatrix gram(cfg.R.mat() + btp * sys.B);
  Matrix k;
  try {
    k = -chol_solve(gram, btp * sys.A, pol);
  } catch (const NotPositiveDefinite&) {
    throw Singularity("lqr_gain: R + B^T P B is not positive definite");
  }
  // certify the closed loop through a convergent Lyapunov solve
  solve_dlyap(sys.A + sys.B * k, SymMatrix::identity(sys.n()), pol);
  return k;
}

inline double dare_residual(const LinearSystem& sys, const LqrConfig& cfg,
                            const SymMatrix& p_plus,
                            const NumericPolicy& pol = {}) {
  const Matrix& A = sys.A;
  const Matrix& B = sys.B;
  const Matrix& p = p_plus.mat();
  const Matrix btp = B.transpose() * p;
  const SymMatrix gram(cfg.R.mat() + btp * B);
  const Matrix res = A.transpose() * p * A - p -
                     (btp * A).transpose() * chol_solve(gram, btp * A, pol) +
                     cfg.Q.mat();
  return res.norm();
}

}  // namespace ngc
