#pragma once

// Gain design pipeline: assemble the contractive-parameterization program,
// solve it, recover K = F Y^{-1}, and certify every claimed property
// independently of the solver. Also hosts the step-size analysis
// (stability range, eigenvalue sensitivity) and the reference gradient
// steppers the closed loop is equivalent to.

#include <string>
#include <vector>

#include "ngc/conic_solver.hpp"
#include "ngc/lmi.hpp"
#include "ngc/matcore.hpp"
#include "ngc/system.hpp"

namespace ngc {

struct SynthesisConfig {
  double alpha = 0.0;
  double lambda = 0.99;
  SolverBackend backend = SolverBackend::InteriorPoint;
  NumericPolicy policy;

  void validate() const {
    if (!(alpha > 0.0)) throw InvalidConfig("alpha must be positive");
    if (!(lambda > 0.0 && lambda < 1.0))
      throw InvalidConfig("lambda must lie in the open interval (0, 1)");
  }
};

struct Infeasible : std::runtime_error {
  double achieved_margin;
  explicit Infeasible(double margin)
      : std::runtime_error("synthesis infeasible, achieved margin " +
                           std::to_string(margin)),
        achieved_margin(margin) {}
};

struct SynthesisResult {
  SymMatrix Y, Sigma, M;
  Matrix F;       // m x n
  Matrix K;       // F Y^{-1}
  SymMatrix P;    // Y^{-1}
  SymMatrix fisher;  // Sigma^{-1}
  double margin = 0.0;
  double alpha = 0.0;
  double lambda = 0.0;

  Matrix closed_loop(const LinearSystem& sys) const { return sys.A + sys.B * K; }
};

struct CertificateCheck {
  std::string name;
  double residual = 0.0;  // signed; >= -tolerance passes
  double tolerance = 0.0;
  bool pass = false;
};

struct CertificateReport {
  std::vector<CertificateCheck> checks;
  bool overall = true;

  void add(const std::string& name, double residual, double tol) {
    const bool ok = residual >= -tol;
    checks.push_back({name, residual, tol, ok});
    overall = overall && ok;
  }
};

inline SynthesisResult synthesize(const LinearSystem& sys,
                                  const SynthesisConfig& cfg) {
  cfg.validate();
  sys.validate(cfg.policy);
  if (controllability_rank(sys.A, sys.B, cfg.policy) != sys.n())
    throw Uncontrollable("synthesize: (A, B) is not controllable");

  ConicProblem prob = build_theorem1_problem(sys, cfg.alpha, cfg.lambda,
                                             cfg.policy);
  ConicSolution sol = solve_feasibility(prob, cfg.policy, cfg.backend);
  if (sol.status == SolveStatus::NumericalFailure)
    throw NumericalFailure("synthesize: solver did not converge");
  if (sol.status == SolveStatus::Infeasible) throw Infeasible(sol.margin);

  SynthesisResult r;
  r.Y = SymMatrix(sol.values.at("Y"));
  r.Sigma = SymMatrix(sol.values.at("Sigma"));
  r.M = SymMatrix(sol.values.at("M"));
  r.F = sol.values.at("F");
  r.P = chol_inverse(r.Y, cfg.policy);
  // K = F Y^{-1} through the Cholesky factor of Y
  r.K = chol_solve(r.Y, r.F.transpose(), cfg.policy).transpose();
  r.fisher = chol_inverse(r.Sigma, cfg.policy);
  r.margin = sol.margin;
  r.alpha = cfg.alpha;
  r.lambda = cfg.lambda;
  return r;
}

// Eigen-decomposition of Sigma P through the symmetric similarity
// L^T Sigma L with P = L L^T: same (all-real) eigenvalues, and the
// eigenvectors of Sigma P are recovered as L^{-T} q.
struct SigmaPEig {
  std::vector<double> values;  // ascending, all real
  Matrix vectors;              // columns: unit eigenvectors of Sigma P
};

inline SigmaPEig sigma_p_eig(const SymMatrix& sigma, const SymMatrix& p,
                             const NumericPolicy& pol = {}) {
  const Matrix l = cholesky(p, pol);
  EigResult e = sym_eig(SymMatrix(l.transpose() * sigma.mat() * l), pol);
  SigmaPEig out;
  out.values = e.values;
  out.vectors = l.transpose()
                    .triangularView<Eigen::Upper>()
                    .solve(e.vectors);
  for (int i = 0; i < out.vectors.cols(); ++i)
    out.vectors.col(i).normalize();
  return out;
}

// Closed-loop eigenvalues 1 - 2 alpha eig(Sigma P), real by construction.
inline std::vector<double> closed_loop_spectrum(const SynthesisResult& r,
                                                const NumericPolicy& pol = {}) {
  SigmaPEig e = sigma_p_eig(r.Sigma, r.P, pol);
  std::vector<double> spec;
  spec.reserve(e.values.size());
  for (double w : e.values) spec.push_back(1.0 - 2.0 * r.alpha * w);
  return spec;
}

// Stability range upper bound: alpha < 1 / rho(Sigma P).
inline double alpha_max(const SymMatrix& sigma, const SymMatrix& p,
                        const NumericPolicy& pol = {}) {
  return 1.0 / sigma_p_eig(sigma, p, pol).values.back();
}

// d lambda_i / d alpha = -2 lambda_i(Sigma P), descending order.
inline std::vector<double> eigen_sensitivity(const SymMatrix& sigma,
                                             const SymMatrix& p,
                                             const NumericPolicy& pol = {}) {
  SigmaPEig e = sigma_p_eig(sigma, p, pol);
  std::vector<double> s;
  s.reserve(e.values.size());
  for (auto it = e.values.rbegin(); it != e.values.rend(); ++it)
    s.push_back(-2.0 * *it);
  std::sort(s.begin(), s.end(), std::greater<double>());
  return s;
}

inline CertificateReport verify(const LinearSystem& sys,
                                const SynthesisResult& r,
                                const SynthesisConfig& cfg) {
  const NumericPolicy& pol = cfg.policy;
  CertificateReport rep;
  const Matrix acl = r.closed_loop(sys);
  const int n = sys.n();

  // A + B K == I - 2 alpha Sigma P
  const Matrix param = Matrix::Identity(n, n) -
                       2.0 * r.alpha * r.Sigma.mat() * r.P.mat();
  const double param_tol = 1e-6 * (1.0 + sys.A.norm());
  rep.add("parameterization", param_tol - (acl - param).norm(), 0.0);

  // lambda P - Acl^T P Acl >= 0
  rep.add("contractivity",
          min_eig(SymMatrix(r.lambda * r.P.mat() -
                            acl.transpose() * r.P.mat() * acl),
                  pol),
          1e-7);

  // Sigma - Acl Sigma Acl^T - W >= 0
  rep.add("covariance_bound",
          min_eig(SymMatrix(r.Sigma.mat() -
                            acl * r.Sigma.mat() * acl.transpose() -
                            sys.W.mat()),
                  pol),
          1e-7);

  // M - Y Sigma^{-1} Y >= 0
  const Matrix ysy = r.Y.mat() * chol_solve(r.Sigma, r.Y.mat(), pol);
  rep.add("proof_step_M", min_eig(SymMatrix(r.M.mat() - ysy), pol), 1e-7);

  // spectrum: |1 - 2 alpha eig(Sigma P)| <= sqrt(lambda), eigenvector residual
  SigmaPEig e = sigma_p_eig(r.Sigma, r.P, pol);
  double worst_mod = 0.0;
  double worst_resid = 0.0;
  for (std::size_t i = 0; i < e.values.size(); ++i) {
    const double mu = 1.0 - 2.0 * r.alpha * e.values[i];
    worst_mod = std::max(worst_mod, std::abs(mu));
    const Vector v = e.vectors.col(static_cast<int>(i));
    worst_resid = std::max(worst_resid, (acl * v - mu * v).norm());
  }
  rep.add("spectrum_modulus", std::sqrt(r.lambda) + 1e-6 - worst_mod, 0.0);
  rep.add("spectrum_residual", 1e-6 - worst_resid, 0.0);
  return rep;
}

// Reference steppers the closed loop realizes.
inline Vector gd_step(const Vector& x, const Vector& grad, double alpha) {
  if (x.size() != grad.size()) throw DimensionMismatch("gd_step");
  return x - alpha * grad;
}

inline Vector precond_gd_step(const Vector& x, const Vector& grad,
                              const SymMatrix& gamma) {
  if (x.size() != grad.size() || gamma.dim() != x.size())
    throw DimensionMismatch("precond_gd_step");
  return x - gamma.mat() * grad;
}

// mu - 2 alpha Sigma P mu: the natural-gradient update on the mean for
// V = mu^T P mu with Fisher preconditioner Sigma.
inline Vector natural_gd_step(const Vector& mu, const SynthesisResult& r) {
  if (mu.size() != r.Sigma.dim()) throw DimensionMismatch("natural_gd_step");
  return mu - 2.0 * r.alpha * r.Sigma.mat() * (r.P.mat() * mu);
}

struct AlphaSummary {
  double alpha = 0.0;
  SolveStatus status = SolveStatus::NumericalFailure;
  double margin = 0.0;
  double dominant_modulus = 0.0;        // max |closed-loop eigenvalue|
  double alpha_max_value = 0.0;         // 1 / rho(Sigma P)
  std::vector<double> sensitivities;    // -2 eig(Sigma P), descending
  std::string error;
};

inline std::vector<AlphaSummary> alpha_sweep(const LinearSystem& sys,
                                             const std::vector<double>& alphas,
                                             double lambda,
                                             const SynthesisConfig& base) {
  std::vector<AlphaSummary> out;
  out.reserve(alphas.size());
  for (double a : alphas) {
    AlphaSummary s;
    s.alpha = a;
    SynthesisConfig cfg = base;
    cfg.alpha = a;
    cfg.lambda = lambda;
    try {
      SynthesisResult r = synthesize(sys, cfg);
      s.status = SolveStatus::Feasible;
      s.margin = r.margin;
      for (double mu : closed_loop_spectrum(r, cfg.policy))
        s.dominant_modulus = std::max(s.dominant_modulus, std::abs(mu));
      s.alpha_max_value = alpha_max(r.Sigma, r.P, cfg.policy);
      s.sensitivities = eigen_sensitivity(r.Sigma, r.P, cfg.policy);
    } catch (const Infeasible& inf) {
      s.status = SolveStatus::Infeasible;
      s.margin = inf.achieved_margin;
      s.error = inf.what();
    } catch (const std::exception& ex) {
      s.status = SolveStatus::NumericalFailure;
      s.error = ex.what();
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace ngc
