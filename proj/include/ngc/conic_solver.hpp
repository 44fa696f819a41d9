#pragma once

// Margin-maximization solver for ConicProblem. Two independent backends:
//   - InteriorPoint: log-barrier path following on the equality-reduced
//     (nullspace) coordinates.
//   - Projection: Dykstra projections onto the affine set and the PSD
//     product cone, with the margin located by bisection on t.
// Both maximize t subject to every PsdBlock >= t I and the equalities.
// The raw program is positively homogeneous, so the supremum of t is
// unbounded whenever a strictly feasible point exists; the margin is
// therefore capped at policy.margin_cap and the barrier keeps symmetric
// block traces below policy.trace_bound. Feasible means t* > feas_margin_eps.

#include <cmath>
#include <optional>

#include "ngc/lmi.hpp"
#include "ngc/matcore.hpp"

namespace ngc {

enum class SolverBackend { InteriorPoint, Projection };

inline const char* to_string(SolverBackend b) {
  return b == SolverBackend::InteriorPoint ? "interior-point" : "projection";
}

namespace detail {

struct ReducedProblem {
  Vector x_part;            // particular solution of eqA x = eqb
  Matrix null_basis;        // orthonormal columns spanning ker(eqA)
  std::vector<Matrix> coeff_red;   // per psd block, coeff * N
  std::vector<Vector> base;        // per psd block, coeff * x_part + const
  std::vector<Vector> trace_sel;   // per sym var block, reduced trace selector
  std::vector<double> trace_base;  // trace at x_part
};

inline ReducedProblem reduce(const ConicProblem& p) {
  ReducedProblem r;
  if (p.eqA.rows() > 0) {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(p.eqA);
    r.x_part = cod.solve(p.eqb);
    Eigen::FullPivLU<Matrix> lu(p.eqA);
    Matrix ker = lu.kernel();
    if (ker.cols() == 1 && ker.norm() == 0.0) {
      r.null_basis = Matrix::Zero(p.nx, 0);
    } else {
      Eigen::HouseholderQR<Matrix> qr(ker);
      r.null_basis = qr.householderQ() * Matrix::Identity(p.nx, ker.cols());
    }
  } else {
    r.x_part = Vector::Zero(p.nx);
    r.null_basis = Matrix::Identity(p.nx, p.nx);
  }
  for (const auto& blk : p.psd) {
    r.coeff_red.push_back(blk.coeff * r.null_basis);
    r.base.push_back(blk.coeff * r.x_part + blk.constant);
  }
  for (const auto& v : p.vars) {
    if (v.kind != VarKind::Symmetric) continue;
    Vector sel = Vector::Zero(p.nx);
    // diagonal entries of the svec layout carry unit weight
    int k = v.offset;
    for (int j = 0; j < v.rows; ++j) {
      k += j;  // skip off-diagonals of column j
      sel[k++] = 1.0;
    }
    r.trace_sel.push_back(r.null_basis.transpose() * sel);
    r.trace_base.push_back(sel.dot(r.x_part));
  }
  return r;
}

// min over blocks of lambda_min(G_j(x)); -inf replaced by finite values only.
inline double min_block_eig(const ConicProblem& p, const Vector& x,
                            const NumericPolicy& pol) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& blk : p.psd) m = std::min(m, min_eig(blk.value(x), pol));
  return m;
}

inline ConicSolution interior_point_solve(const ConicProblem& p,
                                          const NumericPolicy& pol) {
  const ReducedProblem rp = reduce(p);
  const int k = static_cast<int>(rp.null_basis.cols());
  const int nb = static_cast<int>(p.psd.size());
  const int ntr = static_cast<int>(rp.trace_sel.size());
  const double cap = pol.margin_cap;
  const double rho = pol.trace_bound;

  Vector z = Vector::Zero(k);
  double t = std::min(min_block_eig(p, rp.x_part, pol) - 1.0, cap - 1.0);

  double barrier_count = 1.0;  // cap barrier
  for (const auto& blk : p.psd) barrier_count += blk.dim;
  barrier_count += ntr;

  // value/gradient/Hessian of f_tau(z, t) = -tau*t + barrier(z, t);
  // returns nullopt when (z, t) is not strictly feasible.
  struct Eval {
    double f;
    Vector g;   // size k+1, t last
    Matrix h;
  };
  auto evaluate = [&](const Vector& zz, double tt, double tau,
                      bool need_derivs) -> std::optional<Eval> {
    Eval e;
    e.f = -tau * tt;
    if (need_derivs) {
      e.g = Vector::Zero(k + 1);
      e.h = Matrix::Zero(k + 1, k + 1);
      e.g[k] = -tau;
    }
    if (cap - tt <= 0.0) return std::nullopt;
    e.f -= std::log(cap - tt);
    if (need_derivs) {
      e.g[k] += 1.0 / (cap - tt);
      e.h(k, k) += 1.0 / ((cap - tt) * (cap - tt));
    }
    for (int i = 0; i < ntr; ++i) {
      const double slack = rho - (rp.trace_base[i] + rp.trace_sel[i].dot(zz));
      if (slack <= 0.0) return std::nullopt;
      e.f -= std::log(slack);
      if (need_derivs) {
        Vector a = Vector::Zero(k + 1);
        a.head(k) = rp.trace_sel[i];
        e.g += a / slack;
        e.h += a * a.transpose() / (slack * slack);
      }
    }
    for (int j = 0; j < nb; ++j) {
      const int d = p.psd[j].dim;
      SymMatrix s(smat(rp.base[j] + rp.coeff_red[j] * zz).mat() -
                  tt * Matrix::Identity(d, d));
      Matrix l;
      try {
        NumericPolicy strict = pol;
        strict.chol_pivot_tol = 0.0;
        l = cholesky(s, strict);
      } catch (const NotPositiveDefinite&) {
        return std::nullopt;
      }
      double logdet = 0.0;
      for (int i = 0; i < d; ++i) logdet += std::log(l(i, i));
      e.f -= 2.0 * logdet;
      if (need_derivs) {
        // X = S^{-1}; grad_z = -C^T svec(X), grad_t = +tr(X)
        Matrix linv = l.triangularView<Eigen::Lower>()
                          .solve(Matrix::Identity(d, d));
        Matrix x = linv.transpose() * linv;
        Vector sx = svec(SymMatrix(x));
        e.g.head(k) -= rp.coeff_red[j].transpose() * sx;
        e.g[k] += x.trace();
        // Hessian via tr(X A_i X A_l) = <svec(X A_i X), svec(A_l)>
        Matrix xax(sx.size(), k);
        for (int i = 0; i < k; ++i) {
          Matrix ai = smat(rp.coeff_red[j].col(i)).mat();
          xax.col(i) = svec(SymMatrix(x * ai * x));
        }
        e.h.topLeftCorner(k, k) += xax.transpose() * rp.coeff_red[j];
        Vector si = svec(SymMatrix::identity(d));
        Vector cross = xax.transpose() * si;  // tr(X A_i X)
        e.h.block(0, k, k, 1) -= cross;
        e.h.block(k, 0, 1, k) -= cross.transpose();
        e.h(k, k) += (x * x).trace();
      }
    }
    if (need_derivs) e.h = 0.5 * (e.h + e.h.transpose()).eval();
    return e;
  };

  ConicSolution sol;
  int total_newton = 0;
  double tau = 1.0;
  bool failed = false;
  while (true) {
    for (int inner = 0; inner < 100; ++inner) {
      if (++total_newton > pol.solver_iteration_cap) {
        failed = true;
        break;
      }
      auto e = evaluate(z, t, tau, true);
      if (!e) {
        failed = true;
        break;
      }
      Matrix h = e->h;
      const double reg0 = 1e-12 * (1.0 + h.diagonal().cwiseAbs().maxCoeff());
      Vector step;
      double reg = reg0;
      while (true) {
        Eigen::LDLT<Matrix> ldlt(h + reg * Matrix::Identity(k + 1, k + 1));
        step = ldlt.solve(-e->g);
        if (ldlt.info() == Eigen::Success && step.allFinite()) break;
        reg *= 100.0;
        if (reg > 1.0) {
          failed = true;
          break;
        }
      }
      if (failed) break;
      const double decrement2 = -e->g.dot(step);
      if (decrement2 <= 2.0 * pol.ipm_newton_tol) break;
      // backtracking: first into the domain, then Armijo
      double s = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 70; ++ls) {
        auto trial =
            evaluate(z + s * step.head(k), t + s * step[k], tau, false);
        if (trial && trial->f <= e->f + 0.01 * s * e->g.dot(step)) {
          z += s * step.head(k);
          t += s * step[k];
          moved = true;
          break;
        }
        s *= 0.5;
      }
      if (!moved) break;  // step too small to matter
    }
    if (failed) break;
    if (barrier_count / tau <= pol.ipm_gap_tol) break;
    tau *= pol.ipm_tau_factor;
  }

  sol.iterations = total_newton;
  if (failed) {
    sol.status = SolveStatus::NumericalFailure;
    sol.margin = t;
    const Vector xf = rp.x_part + rp.null_basis * z;
    for (const auto& v : p.vars) sol.values[v.name] = p.extract(v.name, xf);
    return sol;
  }
  const Vector x = rp.x_part + rp.null_basis * z;
  // certify the achieved margin directly on the blocks
  sol.margin = std::min(min_block_eig(p, x, pol), cap);
  for (const auto& v : p.vars) sol.values[v.name] = p.extract(v.name, x);
  sol.status = sol.margin > pol.feas_margin_eps ? SolveStatus::Feasible
                                                : SolveStatus::Infeasible;
  return sol;
}

// --- Projection backend -----------------------------------------------------

struct LiftedSpace {
  // variables v = (x, svec(Z_1), ..., svec(Z_nb)); affine set couples
  // Z_j = G_j(x) and eqA x = eqb; the cone set is Z_j >= t I per block.
  int dim = 0;
  std::vector<int> z_offset;
  Matrix m;  // affine rows
  Vector q;
  Eigen::LDLT<Matrix> gram;  // factor of M M^T
};

inline LiftedSpace build_lifted(const ConicProblem& p) {
  LiftedSpace ls;
  ls.dim = p.nx;
  for (const auto& blk : p.psd) {
    ls.z_offset.push_back(ls.dim);
    ls.dim += svec_dim(blk.dim);
  }
  const int eq_rows = static_cast<int>(p.eqA.rows());
  int rows = eq_rows;
  for (const auto& blk : p.psd) rows += svec_dim(blk.dim);
  ls.m = Matrix::Zero(rows, ls.dim);
  ls.q = Vector::Zero(rows);
  ls.m.topLeftCorner(eq_rows, p.nx) = p.eqA;
  ls.q.head(eq_rows) = p.eqb;
  int r = eq_rows;
  for (std::size_t j = 0; j < p.psd.size(); ++j) {
    const int sd = svec_dim(p.psd[j].dim);
    ls.m.block(r, 0, sd, p.nx) = -p.psd[j].coeff;
    ls.m.block(r, ls.z_offset[j], sd, sd) = Matrix::Identity(sd, sd);
    ls.q.segment(r, sd) = p.psd[j].constant;
    r += sd;
  }
  ls.gram.compute(ls.m * ls.m.transpose());
  return ls;
}

inline Vector project_affine(const LiftedSpace& ls, const Vector& v) {
  return v - ls.m.transpose() * ls.gram.solve(ls.m * v - ls.q);
}

inline Vector project_cone(const ConicProblem& p, const LiftedSpace& ls,
                           const Vector& v, double t, const NumericPolicy& pol) {
  Vector out = v;
  for (std::size_t j = 0; j < p.psd.size(); ++j) {
    const int sd = svec_dim(p.psd[j].dim);
    SymMatrix s = smat(v.segment(ls.z_offset[j], sd));
    EigResult e = sym_eig(s, pol);
    Matrix clipped = Matrix::Zero(s.dim(), s.dim());
    for (int i = 0; i < s.dim(); ++i)
      clipped += std::max(e.values[i], t) * e.vectors.col(i) *
                 e.vectors.col(i).transpose();
    out.segment(ls.z_offset[j], sd) = svec(SymMatrix(clipped));
  }
  return out;
}

// Smallest block eigenvalue read off the lifted Z segments. After an affine
// projection the consistency rows Z_j = G_j(x) hold to solver accuracy, so
// this matches min_block_eig of the x part.
inline double lifted_min_eig(const ConicProblem& p, const LiftedSpace& ls,
                             const Vector& v, const NumericPolicy& pol) {
  double me = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < p.psd.size(); ++j) {
    const int sd = svec_dim(p.psd[j].dim);
    me = std::min(me, min_eig(smat(v.segment(ls.z_offset[j], sd)), pol));
  }
  return me;
}

// Alternating-projection feasibility probe (Douglas-Rachford splitting) at
// margin level t. Succeeds as soon as an affine-feasible iterate witnesses a
// block margin of at least t; stops on iterate stagnation otherwise.
struct ProbeResult {
  bool feasible = false;
  Vector witness;  // affine-feasible lifted point when feasible
  int iterations = 0;
};

inline ProbeResult projection_probe(const ConicProblem& p,
                                    const LiftedSpace& ls, const Vector& start,
                                    double t, const NumericPolicy& pol) {
  ProbeResult res;
  Vector v = start;
  double best_d = std::numeric_limits<double>::infinity();
  int since_improve = 0;
  for (int it = 0; it < pol.projection_iteration_cap; ++it) {
    const Vector pc = project_cone(p, ls, v, t, pol);
    const Vector pa = project_affine(ls, 2.0 * pc - v);
    v += pa - pc;
    res.iterations = it + 1;
    if (lifted_min_eig(p, ls, pa, pol) >= t - 1e-12) {
      res.feasible = true;
      res.witness = pa;
      return res;
    }
    const double d = (pa - pc).norm();
    if (d < best_d * (1.0 - 1e-6)) {
      best_d = d;
      since_improve = 0;
    } else if (++since_improve >= pol.projection_stagnation_window) {
      break;  // gap between the sets: level t is (numerically) infeasible
    }
  }
  return res;
}

// The Theorem-1 program is positively homogeneous: the equality right-hand
// side is zero and the only constant block term, -W, is negative
// semidefinite, so scaling a strictly feasible point by c >= 1 multiplies
// every block margin by at least c. The strict phase therefore only has to
// locate *any* affine-feasible point with strictly positive block margin;
// scaling then certifies the capped margin directly.
inline bool positively_homogeneous(const ConicProblem& p) {
  if (p.eqb.size() > 0 && p.eqb.norm() > 0.0) return false;
  for (const auto& blk : p.psd)
    if (max_eig(smat(blk.constant)) > 1e-12) return false;
  return true;
}

inline ConicSolution projection_solve(const ConicProblem& p,
                                      const NumericPolicy& pol) {
  const LiftedSpace ls = build_lifted(p);
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(p.eqA);
  Vector x0 = p.eqA.rows() > 0 ? Vector(cod.solve(p.eqb)) : Vector::Zero(p.nx);

  Vector start = Vector::Zero(ls.dim);
  start.head(p.nx) = x0;
  for (std::size_t j = 0; j < p.psd.size(); ++j)
    start.segment(ls.z_offset[j], svec_dim(p.psd[j].dim)) =
        p.psd[j].coeff * x0 + p.psd[j].constant;

  ConicSolution sol;
  sol.iterations = 0;

  auto finish = [&](const Vector& x, double margin) {
    sol.margin = margin;
    for (const auto& v : p.vars) sol.values[v.name] = p.extract(v.name, x);
    sol.status = sol.margin > pol.feas_margin_eps ? SolveStatus::Feasible
                                                  : SolveStatus::Infeasible;
    return sol;
  };

  if (positively_homogeneous(p)) {
    // Strict phase: hunt for an affine iterate with positive block margin.
    Vector v = start;
    double best_me = min_block_eig(p, x0, pol);
    Vector best_x = x0;
    int since_improve = 0;
    for (int it = 0; it < pol.projection_iteration_cap; ++it) {
      const Vector pc = project_cone(p, ls, v, pol.projection_probe_level, pol);
      const Vector pa = project_affine(ls, 2.0 * pc - v);
      v += pa - pc;
      sol.iterations = it + 1;
      const double me = lifted_min_eig(p, ls, pa, pol);
      if (me > best_me) {
        best_me = me;
        best_x = pa.head(p.nx);
        since_improve = 0;
      } else if (++since_improve >= pol.projection_strict_window) {
        break;  // margin no longer improving
      }
      // well clear of eigenvalue noise: scaling takes it the rest of the way
      if (best_me >= 1e2 * pol.projection_strict_tol) break;
    }
    if (best_me >= pol.projection_strict_tol) {
      const double c = std::max(1.0, 2.0 * pol.margin_cap / best_me);
      Vector x = c * best_x;
      for (int r = 0; r < 3; ++r) x -= cod.solve(p.eqA * x - p.eqb);
      const double margin = std::min(min_block_eig(p, x, pol), pol.margin_cap);
      if (margin > pol.feas_margin_eps) return finish(x, margin);
      // scaling amplified noise rather than a real margin; fall through
    }
  }

  // Bisection on the margin level. For homogeneous problems a failed strict
  // phase pins t* at or below the probe level; otherwise sweep up to the cap.
  double lo = detail::min_block_eig(p, x0, pol);  // witnessed by x0 itself
  double hi = positively_homogeneous(p) ? pol.projection_probe_level
                                        : pol.margin_cap;
  Vector best_point = start;
  Vector best_x = x0;
  while (hi - lo > pol.bisect_tol) {
    const double mid = 0.5 * (lo + hi);
    ProbeResult r = projection_probe(p, ls, best_point, mid, pol);
    sol.iterations += r.iterations;
    if (r.feasible) {
      lo = mid;
      best_point = r.witness;
      best_x = r.witness.head(p.nx);
    } else {
      hi = mid;
    }
  }
  return finish(best_x, lo);
}

}  // namespace detail

// Maximizes the common margin t over the problem's constraints and reports
// Feasible iff t* clears policy.feas_margin_eps. Failures are carried in
// the returned status so callers can attach context before raising.
inline ConicSolution solve_feasibility(
    const ConicProblem& p, const NumericPolicy& pol = {},
    SolverBackend backend = SolverBackend::InteriorPoint) {
  if (p.psd.empty() || p.nx <= 0)
    throw InvalidConfig("solve_feasibility: empty problem");
  return backend == SolverBackend::InteriorPoint
             ? detail::interior_point_solve(p, pol)
             : detail::projection_solve(p, pol);
}

}  // namespace ngc
