#pragma once

// Standard-form semidefinite feasibility program for the contractive
// natural-gradient gain design, plus the svec/smat isometry it is built on.

#include <cstddef>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ngc/matcore.hpp"
#include "ngc/system.hpp"

namespace ngc {

inline int svec_dim(int n) { return n * (n + 1) / 2; }

// Column-major upper-triangle vectorization with sqrt(2)-scaled
// off-diagonals, so <svec(A), svec(B)> = trace(A B).
inline Vector svec(const SymMatrix& s) {
  const int n = s.dim();
  Vector v(svec_dim(n));
  const double r2 = std::sqrt(2.0);
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) v[k++] = (i == j) ? s(i, j) : r2 * s(i, j);
  return v;
}

inline SymMatrix smat(const Vector& v) {
  // invert k = j(j+1)/2 + i
  const int len = static_cast<int>(v.size());
  const int n = static_cast<int>(std::round((std::sqrt(8.0 * len + 1.0) - 1.0) / 2.0));
  if (svec_dim(n) != len) throw DimensionMismatch("smat: not a svec length");
  Matrix m(n, n);
  const double r2 = std::sqrt(2.0);
  int k = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i <= j; ++i) {
      const double e = (i == j) ? v[k] : v[k] / r2;
      m(i, j) = e;
      m(j, i) = e;
      ++k;
    }
  }
  return SymMatrix(m);
}

enum class VarKind { Symmetric, General };

struct VarBlock {
  std::string name;
  VarKind kind;
  int rows = 0;
  int cols = 0;   // == rows for Symmetric
  int offset = 0; // start in the stacked scalar vector
  int size = 0;   // svec_dim(rows) or rows*cols
};

// Affine symmetric-matrix-valued map x -> smat(coeff * x + constant),
// required to be >= t I at the solution.
struct PsdBlock {
  std::string name;
  int dim = 0;
  Matrix coeff;   // svec_dim(dim) x nx
  Vector constant;

  SymMatrix value(const Vector& x) const { return smat(coeff * x + constant); }
};

// Semidefinite feasibility program over svec-stacked variable blocks:
// find x with eqA x = eqb and every PsdBlock >= t I, t maximized.
struct ConicProblem {
  std::vector<VarBlock> vars;
  int nx = 0;
  Matrix eqA;  // rows x nx
  Vector eqb;
  std::vector<PsdBlock> psd;

  const VarBlock& block(const std::string& name) const {
    for (const auto& v : vars)
      if (v.name == name) return v;
    throw InvalidConfig("ConicProblem: unknown variable block " + name);
  }

  Matrix extract(const std::string& name, const Vector& x) const {
    const VarBlock& v = block(name);
    if (v.kind == VarKind::Symmetric)
      return smat(x.segment(v.offset, v.size)).mat();
    Matrix m(v.rows, v.cols);
    for (int c = 0, k = 0; c < v.cols; ++c)
      for (int r = 0; r < v.rows; ++r, ++k) m(r, c) = x[v.offset + k];
    return m;
  }

  std::string dump() const {
    std::ostringstream os;
    os << "conic problem: nx=" << nx << "\n";
    for (const auto& v : vars)
      os << "  var " << v.name << " "
         << (v.kind == VarKind::Symmetric ? "sym" : "gen") << " " << v.rows
         << "x" << v.cols << " @" << v.offset << " size " << v.size << "\n";
    os << "  equalities: " << eqA.rows() << " rows, |b| = " << eqb.norm() << "\n";
    for (const auto& p : psd)
      os << "  psd " << p.name << " dim " << p.dim
         << " |coeff| = " << p.coeff.norm() << " |const| = " << p.constant.norm()
         << "\n";
    return os.str();
  }
};

enum class SolveStatus { Feasible, Infeasible, NumericalFailure };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Feasible: return "Feasible";
    case SolveStatus::Infeasible: return "Infeasible";
    default: return "NumericalFailure";
  }
}

struct ConicSolution {
  std::map<std::string, Matrix> values;
  double margin = 0.0;  // achieved t*
  int iterations = 0;
  SolveStatus status = SolveStatus::NumericalFailure;
};

namespace detail {

// Builds coefficient columns by pushing scalar basis vectors through an
// affine map; exact for affine maps and keeps the assembly in one place.
template <typename MapFn>
void fill_affine(const ConicProblem& p, MapFn&& fn, Matrix& coeff, Vector& cnst) {
  Vector x = Vector::Zero(p.nx);
  const Vector at_zero = fn(x);
  cnst = at_zero;
  coeff.resize(at_zero.size(), p.nx);
  for (int v = 0; v < p.nx; ++v) {
    x[v] = 1.0;
    coeff.col(v) = fn(x) - at_zero;
    x[v] = 0.0;
  }
}

}  // namespace detail

// The Theorem-1-style program: variables Y (sym n), F (m x n), Sigma (sym n),
// M (sym n); equality A Y + B F - Y + 2 alpha Sigma = 0; Schur blocks
//   [lambda Y, (Y - 2 alpha Sigma)^T; *, Y]
//   [Sigma - W, Y - 2 alpha Sigma; *, M]
//   [M, Y; *, Sigma]
// plus explicit strictness guards Y >= t I and Sigma >= t I.
inline ConicProblem build_theorem1_problem(const LinearSystem& sys,
                                           double alpha, double lambda,
                                           const NumericPolicy& pol = {}) {
  sys.validate(pol);
  if (!(alpha > 0.0)) throw InvalidConfig("alpha must be positive");
  if (!(lambda > 0.0 && lambda < 1.0))
    throw InvalidConfig("lambda must lie in (0, 1)");

  const int n = sys.n();
  const int m = sys.m();
  ConicProblem p;
  auto add = [&](const std::string& name, VarKind kind, int r, int c) {
    VarBlock v{name, kind, r, c, p.nx,
               kind == VarKind::Symmetric ? svec_dim(r) : r * c};
    p.nx += v.size;
    p.vars.push_back(v);
  };
  add("Y", VarKind::Symmetric, n, n);
  add("F", VarKind::General, m, n);
  add("Sigma", VarKind::Symmetric, n, n);
  add("M", VarKind::Symmetric, n, n);

  const Matrix& A = sys.A;
  const Matrix& B = sys.B;
  const Matrix& W = sys.W.mat();

  auto parts = [&](const Vector& x) {
    struct { Matrix Y, F, S, M; } out;
    out.Y = p.extract("Y", x);
    out.F = p.extract("F", x);
    out.S = p.extract("Sigma", x);
    out.M = p.extract("M", x);
    return out;
  };

  // equality A Y + B F - Y + 2 alpha Sigma = 0, entrywise (n^2 rows)
  {
    auto eq = [&](const Vector& x) -> Vector {
      auto v = parts(x);
      Matrix e = A * v.Y + B * v.F - v.Y + 2.0 * alpha * v.S;
      return Eigen::Map<Vector>(e.data(), e.size());
    };
    Vector c;
    detail::fill_affine(p, eq, p.eqA, c);
    p.eqb = -c;  // c == 0 here, kept for generality
  }

  auto add_psd = [&](const std::string& name, auto&& matfn) {
    PsdBlock blk;
    blk.name = name;
    auto fn = [&](const Vector& x) -> Vector { return svec(SymMatrix(matfn(x))); };
    detail::fill_affine(p, fn, blk.coeff, blk.constant);
    blk.dim = smat(blk.constant).dim();
    p.psd.push_back(std::move(blk));
  };

  add_psd("contractivity", [&](const Vector& x) {
    auto v = parts(x);
    Matrix G = v.Y - 2.0 * alpha * v.S;
    Matrix blk(2 * n, 2 * n);
    blk << lambda * v.Y, G.transpose(), G, v.Y;
    return blk;
  });
  add_psd("covariance", [&](const Vector& x) {
    auto v = parts(x);
    Matrix G = v.Y - 2.0 * alpha * v.S;
    Matrix blk(2 * n, 2 * n);
    blk << v.S - W, G, G.transpose(), v.M;
    return blk;
  });
  add_psd("schur_M", [&](const Vector& x) {
    auto v = parts(x);
    Matrix blk(2 * n, 2 * n);
    blk << v.M, v.Y, v.Y.transpose(), v.S;
    return blk;
  });
  add_psd("Y_guard", [&](const Vector& x) { return parts(x).Y; });
  add_psd("Sigma_guard", [&](const Vector& x) { return parts(x).S; });

  return p;
}

}  // namespace ngc
