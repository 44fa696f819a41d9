#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "ngc/synthesis.hpp"
#include "test_util.hpp"

using namespace ngc;
using ngc_test::quanser;
using ngc_test::scalar_system;

static SynthesisConfig config(double alpha, double lambda = 0.99) {
  SynthesisConfig cfg;
  cfg.alpha = alpha;
  cfg.lambda = lambda;
  return cfg;
}

TEST_CASE("config validation") {
  auto sys = scalar_system(1.2, 1.0, 0.01);
  CHECK_THROWS_AS(synthesize(sys, config(-0.1)), InvalidConfig);
  CHECK_THROWS_AS(synthesize(sys, config(0.0)), InvalidConfig);
  CHECK_THROWS_AS(synthesize(sys, config(0.1, 1.0)), InvalidConfig);
  CHECK_THROWS_AS(synthesize(sys, config(0.1, 0.0)), InvalidConfig);
}

TEST_CASE("uncontrollable pair is rejected before solving") {
  CHECK_THROWS_AS(synthesize(scalar_system(1.2, 0.0, 0.01), config(0.1)),
                  Uncontrollable);
  auto sys = quanser();
  sys.B.setZero();
  CHECK_THROWS_AS(synthesize(sys, config(0.018)), Uncontrollable);
}

TEST_CASE("scalar synthesis: closed loop matches the derived relations") {
  auto sys = scalar_system(1.2, 1.0, 0.01);
  SynthesisConfig cfg = config(0.1);
  SynthesisResult r = synthesize(sys, cfg);
  CertificateReport rep = verify(sys, r, cfg);
  for (const auto& c : rep.checks) {
    INFO(c.name, " residual ", c.residual);
    CHECK(c.pass);
  }

  const double acl = r.closed_loop(sys)(0, 0);
  CHECK(std::abs(acl) < 1.0);
  // closed loop realizes a + b k = 1 - 2 alpha sigma p exactly
  const double param = 1.0 - 2.0 * cfg.alpha * r.Sigma(0, 0) * r.P(0, 0);
  CHECK(acl == doctest::Approx(param).epsilon(1e-8));
  // stationary covariance bound: sigma >= w / (1 - acl^2)
  CHECK(r.Sigma(0, 0) >= sys.W(0, 0) / (1.0 - acl * acl) - 1e-9);
}

TEST_CASE("quanser synthesis passes every certificate") {
  auto sys = quanser();
  SynthesisConfig cfg = config(0.018);
  SynthesisResult r = synthesize(sys, cfg);
  CHECK(r.margin > 0.0);
  CertificateReport rep = verify(sys, r, cfg);
  CHECK(rep.overall);
  CHECK(rep.checks.size() == 6);
  for (const auto& c : rep.checks) {
    INFO(c.name, " residual ", c.residual);
    CHECK(c.pass);
  }
  // recovered quantities are consistent
  CHECK((r.P.mat() * r.Y.mat() - Matrix::Identity(4, 4)).norm() <= 1e-8);
  CHECK((r.K * r.Y.mat() - r.F).norm() <= 1e-6 * (1.0 + r.F.norm()));
  CHECK((r.fisher.mat() * r.Sigma.mat() - Matrix::Identity(4, 4)).norm() <=
        1e-8);
}

TEST_CASE("quanser synthesis through the projection backend also certifies") {
  auto sys = quanser();
  SynthesisConfig cfg = config(0.018);
  cfg.backend = SolverBackend::Projection;
  SynthesisResult r = synthesize(sys, cfg);
  CertificateReport rep = verify(sys, r, cfg);
  for (const auto& c : rep.checks) {
    INFO(c.name, " residual ", c.residual);
    CHECK(c.pass);
  }
}

TEST_CASE("verify flags a tampered gain and a shrunk covariance") {
  auto sys = quanser();
  SynthesisConfig cfg = config(0.018);
  SynthesisResult r = synthesize(sys, cfg);

  SynthesisResult bad_k = r;
  bad_k.K = r.K + Matrix::Constant(1, 4, 0.05);
  CertificateReport rep1 = verify(sys, bad_k, cfg);
  CHECK_FALSE(rep1.overall);
  CHECK_FALSE(rep1.checks[0].pass);  // parameterization breaks first

  SynthesisResult bad_sigma = r;
  bad_sigma.Sigma = SymMatrix(0.5 * r.Sigma.mat());
  CHECK_FALSE(verify(sys, bad_sigma, cfg).overall);
}

TEST_CASE("closed-loop spectrum: real, contractive, consistent with Acl") {
  auto sys = quanser();
  SynthesisConfig cfg = config(0.018);
  SynthesisResult r = synthesize(sys, cfg);
  const Matrix acl = r.closed_loop(sys);

  std::vector<double> spec = closed_loop_spectrum(r);
  REQUIRE(spec.size() == 4);
  double tr = 0.0;
  for (double mu : spec) {
    CHECK(std::abs(mu) <= std::sqrt(cfg.lambda) + 1e-6);
    tr += mu;
  }
  CHECK(tr == doctest::Approx(acl.trace()).epsilon(1e-6));

  // each (mu, v) pair is an actual eigenpair of Acl
  SigmaPEig e = sigma_p_eig(r.Sigma, r.P);
  for (int i = 0; i < 4; ++i) {
    const double mu = 1.0 - 2.0 * r.alpha * e.values[i];
    CHECK((acl * e.vectors.col(i) - mu * e.vectors.col(i)).norm() <= 1e-7);
  }
}

TEST_CASE("alpha_max bounds the synthesized step size strictly") {
  auto sys = quanser();
  for (double a : {0.01, 0.018, 0.025}) {
    SynthesisResult r = synthesize(sys, config(a));
    const double amax = alpha_max(r.Sigma, r.P);
    CHECK(a < amax);
    // at alpha = amax the slowest mode sits exactly at -1
    SigmaPEig e = sigma_p_eig(r.Sigma, r.P);
    CHECK(1.0 - 2.0 * amax * e.values.back() == doctest::Approx(-1.0));
  }
}

TEST_CASE("eigen_sensitivity matches finite differences of the spectrum") {
  auto sys = quanser();
  SynthesisResult r = synthesize(sys, config(0.018));
  std::vector<double> sens = eigen_sensitivity(r.Sigma, r.P);
  REQUIRE(sens.size() == 4);
  CHECK(std::is_sorted(sens.rbegin(), sens.rend()));

  const double h = 1e-6;
  SynthesisResult rp = r;
  rp.alpha = r.alpha + h;
  std::vector<double> s0 = closed_loop_spectrum(r);
  std::vector<double> s1 = closed_loop_spectrum(rp);
  // spectrum entries follow ascending eig(Sigma P), so fd is descending too
  for (int i = 0; i < 4; ++i)
    CHECK((s1[i] - s0[i]) / h == doctest::Approx(sens[i]).epsilon(1e-6));
}

TEST_CASE("Lyapunov function decreases geometrically along the closed loop") {
  auto sys = quanser();
  SynthesisConfig cfg = config(0.018);
  SynthesisResult r = synthesize(sys, cfg);
  const Matrix acl = r.closed_loop(sys);
  Vector x(4);
  x << 0.1, 0.1, 0.0, 0.0;
  double v_prev = x.dot(r.P.mat() * x);
  for (int k = 0; k < 50; ++k) {
    x = acl * x;
    const double v = x.dot(r.P.mat() * x);
    CHECK(v <= cfg.lambda * v_prev + 1e-12);
    v_prev = v;
  }
}

TEST_CASE("stepper algebra: plain, preconditioned, natural") {
  Vector x(3), g(3);
  x << 1.0, -2.0, 0.5;
  g << 0.2, 0.1, -0.4;
  CHECK((gd_step(x, g, 0.1) - (x - 0.1 * g)).norm() == 0.0);
  CHECK_THROWS_AS(gd_step(x, Vector::Zero(2), 0.1), DimensionMismatch);

  SymMatrix gamma = ngc_test::random_pd(3, 5);
  CHECK((precond_gd_step(x, g, gamma) - (x - gamma.mat() * g)).norm() == 0.0);
  CHECK_THROWS_AS(precond_gd_step(x, g, SymMatrix::identity(2)),
                  DimensionMismatch);
}

TEST_CASE("closed loop equals the natural-gradient step on the mean") {
  auto sys = quanser();
  SynthesisResult r = synthesize(sys, config(0.018));
  const Matrix acl = r.closed_loop(sys);
  NormalStream s(314);
  for (int trial = 0; trial < 100; ++trial) {
    Vector mu = s.next_vector(4);
    mu.normalize();
    const Vector ngd = natural_gd_step(mu, r);
    CHECK((acl * mu - ngd).norm() <= 1e-6);
    // same update through the preconditioned form with Gamma = alpha Sigma
    const Vector grad = 2.0 * r.P.mat() * mu;  // gradient of mu^T P mu
    const Vector pgd =
        precond_gd_step(mu, grad, SymMatrix(r.alpha * r.Sigma.mat()));
    CHECK((pgd - ngd).norm() <= 1e-10);
  }
  CHECK_THROWS_AS(natural_gd_step(Vector::Zero(3), r), DimensionMismatch);
}

TEST_CASE("alpha_sweep summarizes each requested step size") {
  auto sys = quanser();
  std::vector<double> alphas = {0.01, 0.018, 0.025};
  auto summaries = alpha_sweep(sys, alphas, 0.99, SynthesisConfig{});
  REQUIRE(summaries.size() == 3);
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const auto& s = summaries[i];
    CHECK(s.alpha == alphas[i]);
    CHECK(s.status == SolveStatus::Feasible);
    CHECK(s.margin > 0.0);
    CHECK(s.dominant_modulus < 1.0);
    CHECK(s.alpha_max_value > s.alpha);
    CHECK(s.sensitivities.size() == 4);
    CHECK(s.error.empty());
  }
}

TEST_CASE("alpha_sweep on an empty list returns an empty summary") {
  CHECK(alpha_sweep(quanser(), {}, 0.99, SynthesisConfig{}).empty());
}

TEST_CASE("alpha_sweep records failures instead of throwing") {
  auto sys = scalar_system(1.2, 0.0, 0.01);  // uncontrollable
  auto summaries = alpha_sweep(sys, {0.1}, 0.99, SynthesisConfig{});
  REQUIRE(summaries.size() == 1);
  CHECK(summaries[0].status == SolveStatus::NumericalFailure);
  CHECK(!summaries[0].error.empty());
}
