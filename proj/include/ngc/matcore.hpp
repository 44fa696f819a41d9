#pragma once

// Dense symmetric-matrix numerics shared by every other module.
// All routines are pure functions; tolerances come from NumericPolicy.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ngc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NotPositiveDefinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConvergenceFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct Divergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct Singularity : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidConfig : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct Uncontrollable : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Central tolerance record. Every module reads its knobs from here so a
// single object pins the numeric behavior of a whole run.
struct NumericPolicy {
  double chol_pivot_tol = 1e-12;       // pivot at or below this => not PD
  double eig_residual_tol = 1e-9;      // sym_eig reconstruction bound
  int jacobi_max_sweeps = 100;
  double dlyap_increment_tol = 1e-14;  // doubling stop
  int dlyap_divergence_streak = 8;
  double rank_rel_tol = 1e-9;          // controllability rank pivots
  double gelfand_rel_tol = 1e-4;
  int gelfand_max_doublings = 20;
  double sym_input_rel_tol = 1e-8;     // asymmetry beyond this on ingest is an error
  // conic solver
  double feas_margin_eps = 1e-7;       // t* above this => Feasible
  double eq_residual_tol = 1e-7;
  int solver_iteration_cap = 500;
  double margin_cap = 1.0;             // see conic_solver.hpp
  double trace_bound = 1e6;            // barrier bound on sym-block traces
  double ipm_tau_factor = 50.0;
  double ipm_gap_tol = 1e-11;
  double ipm_newton_tol = 1e-9;
  int projection_iteration_cap = 200000;
  double projection_feas_tol = 1e-10;
  int projection_stagnation_window = 2000;
  double projection_probe_level = 1e-4;   // margin level for the strict phase
  double projection_strict_tol = 1e-9;    // "strictly positive" block margin
  int projection_strict_window = 30000;   // strict-phase improvement window
  double bisect_tol = 2e-5;
  // DARE
  double dare_increment_tol = 1e-12;
  long dare_iteration_cap = 100000;
};

// Symmetric n x n matrix. Construction symmetrizes once, (S + S^T)/2,
// after which entries(i,j) == entries(j,i) exactly.
class SymMatrix {
 public:
  SymMatrix() = default;

  explicit SymMatrix(const Matrix& s) {
    if (s.rows() != s.cols() || s.rows() < 1)
      throw DimensionMismatch("SymMatrix: square matrix of dim >= 1 required");
    m_ = 0.5 * (s + s.transpose().eval());
  }

  static SymMatrix identity(int n) { return SymMatrix(Matrix::Identity(n, n)); }
  static SymMatrix zero(int n) { return SymMatrix(Matrix::Zero(n, n)); }

  // Ingest path: rejects asymmetry beyond the policy tolerance, averages below it.
  static SymMatrix from_input(const Matrix& s, const NumericPolicy& pol = {}) {
    if (s.rows() != s.cols() || s.rows() < 1)
      throw DimensionMismatch("SymMatrix: square matrix of dim >= 1 required");
    const double asym = (s - s.transpose()).norm();
    if (asym > pol.sym_input_rel_tol * (1.0 + s.norm()))
      throw InvalidConfig("matrix input is not symmetric");
    return SymMatrix(s);
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& mat() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

 private:
  Matrix m_;
};

inline double frob(const Matrix& m) { return m.norm(); }

// Lower-triangular Cholesky factor L with L L^T = S. Throws
// NotPositiveDefinite when a pivot at or below the policy threshold appears.
inline Matrix cholesky(const SymMatrix& s, const NumericPolicy& pol = {}) {
  const int n = s.dim();
  const Matrix& a = s.mat();
  const double scale = 1.0 + a.diagonal().cwiseAbs().maxCoeff();
  Matrix l = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double d = a(j, j) - l.row(j).head(j).squaredNorm();
    if (d <= pol.chol_pivot_tol * scale)
      throw NotPositiveDefinite("cholesky: pivot " + std::to_string(d) +
                                " at column " + std::to_string(j));
    l(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double v = a(i, j) - l.row(i).head(j).dot(l.row(j).head(j));
      l(i, j) = v / l(j, j);
    }
  }
  return l;
}

// Solves S x = b for PD S through its Cholesky factor.
inline Matrix chol_solve(const SymMatrix& s, const Matrix& b,
                         const NumericPolicy& pol = {}) {
  Matrix l = cholesky(s, pol);
  Matrix y = l.triangularView<Eigen::Lower>().solve(b);
  return l.transpose().triangularView<Eigen::Upper>().solve(y);
}

// PD inverse via Cholesky, re-symmetrized.
inline SymMatrix chol_inverse(const SymMatrix& s, const NumericPolicy& pol = {}) {
  return SymMatrix(chol_solve(s, Matrix::Identity(s.dim(), s.dim()), pol));
}

struct EigResult {
  std::vector<double> values;  // ascending
  Matrix vectors;              // orthonormal columns, same order
};

// Cyclic Jacobi eigensolver for symmetric matrices. The artifact never
// needs a general nonsymmetric eigendecomposition; closed-loop spectra are
// obtained through symmetric similarity transforms.
inline EigResult sym_eig(const SymMatrix& s, const NumericPolicy& pol = {}) {
  const int n = s.dim();
  Matrix a = s.mat();
  Matrix v = Matrix::Identity(n, n);
  const double off_tol = 1e-14 * (1.0 + a.norm());

  auto off_norm = [&]() {
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) acc += a(i, j) * a(i, j);
    return std::sqrt(2.0 * acc);
  };

  int sweep = 0;
  while (off_norm() > off_tol) {
    if (++sweep > pol.jacobi_max_sweeps)
      throw ConvergenceFailure("sym_eig: Jacobi sweep cap reached");
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) <= off_tol / (n * n)) continue;
        Eigen::JacobiRotation<double> rot;
        rot.makeJacobi(a, p, q);
        a.applyOnTheLeft(p, q, rot.adjoint());
        a.applyOnTheRight(p, q, rot);
        v.applyOnTheRight(p, q, rot);
      }
    }
  }

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return a(i, i) < a(j, j); });

  EigResult r;
  r.values.resize(n);
  r.vectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    r.values[i] = a(order[i], order[i]);
    r.vectors.col(i) = v.col(order[i]);
  }
  return r;
}

inline double min_eig(const SymMatrix& s, const NumericPolicy& pol = {}) {
  return sym_eig(s, pol).values.front();
}

inline double max_eig(const SymMatrix& s, const NumericPolicy& pol = {}) {
  return sym_eig(s, pol).values.back();
}

// Fixed point of Sigma = Acl Sigma Acl^T + Q by doubling:
// S += A S A^T, A <- A^2, until the increment is negligible.
inline SymMatrix solve_dlyap(const Matrix& acl, const SymMatrix& q,
                             const NumericPolicy& pol = {}) {
  if (acl.rows() != acl.cols() || acl.rows() != q.dim())
    throw DimensionMismatch("solve_dlyap: dimension mismatch");
  Matrix s = q.mat();
  Matrix a = acl;
  int growth_streak = 0;
  double prev_inc = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 200; ++it) {
    Matrix delta = a * s * a.transpose();
    s += delta;
    a = (a * a).eval();
    const double inc = delta.norm();
    const double cur = s.norm();
    if (inc <= pol.dlyap_increment_tol * (1.0 + cur)) return SymMatrix(s);
    if (!std::isfinite(cur) || !std::isfinite(inc))
      throw Divergence("solve_dlyap: iterate overflow, Acl unstable");
    // the added terms shrink geometrically for stable Acl; a sustained
    // growth streak signals spectral radius >= 1
    if (inc > prev_inc) {
      if (++growth_streak >= pol.dlyap_divergence_streak)
        throw Divergence("solve_dlyap: increments growing, Acl unstable");
    } else {
      growth_streak = 0;
    }
    prev_inc = inc;
  }
  throw Divergence("solve_dlyap: no convergence, Acl likely unstable");
}

// Numerical rank of [B, AB, ..., A^{n-1}B] via column-pivoted QR.
inline int controllability_rank(const Matrix& a, const Matrix& b,
                                const NumericPolicy& pol = {}) {
  if (a.rows() != a.cols() || a.rows() != b.rows())
    throw DimensionMismatch("controllability_rank: A n x n, B n x m required");
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(b.cols());
  Matrix ctrb(n, n * m);
  Matrix blk = b;
  for (int k = 0; k < n; ++k) {
    ctrb.middleCols(k * m, m) = blk;
    blk = (a * blk).eval();
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(ctrb);
  const Matrix r = qr.matrixR();
  const double top = std::abs(r(0, 0));
  if (top == 0.0) return 0;
  int rank = 0;
  for (int i = 0; i < std::min<int>(n, n * m); ++i)
    if (std::abs(r(i, i)) > pol.rank_rel_tol * top) ++rank;
  return rank;
}

// 2-norm through the symmetric eigenproblem of M^T M.
inline double spectral_norm(const Matrix& m, const NumericPolicy& pol = {}) {
  const double me = std::max(max_eig(SymMatrix(m.transpose() * m), pol), 0.0);
  return std::sqrt(me);
}

struct SpectralRadiusEstimate {
  double value = 0.0;
  bool converged = false;
};

// Gelfand estimate ||A^{2^j}||^(1/2^j), doubled with norm rescaling so
// unstable matrices do not overflow. An estimate, not a certificate.
inline SpectralRadiusEstimate spectral_radius_estimate(
    const Matrix& a, const NumericPolicy& pol = {}) {
  if (a.rows() != a.cols())
    throw DimensionMismatch("spectral_radius_estimate: square matrix required");
  double nrm = spectral_norm(a, pol);
  if (nrm == 0.0) return {0.0, true};
  Matrix m = a / nrm;
  double log_c = std::log(nrm);  // log ||A^{2^j}||, maintained in scaled form
  double prev = nrm;
  for (int j = 1; j <= pol.gelfand_max_doublings; ++j) {
    m = (m * m).eval();
    const double mn = spectral_norm(m, pol);
    if (mn == 0.0) return {0.0, true};
    log_c = 2.0 * log_c + std::log(mn);
    m /= mn;
    const double est = std::exp(log_c / std::pow(2.0, j));
    if (std::abs(est - prev) <= pol.gelfand_rel_tol * std::max(est, 1e-300))
      return {est, true};
    prev = est;
  }
  return {prev, false};
}

}  // namespace ngc
