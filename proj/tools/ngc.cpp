// Command-line entry point: synth, verify, lqr, simulate, sweep.
// Exit codes: 0 success, 2 infeasible / failed certificate, 3 invalid
// input, 4 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ngc/serialize.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitInvalid = 3;
constexpr int kExitNumerical = 4;

std::vector<double> parse_number_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &pos);
    } catch (const std::logic_error&) {
      throw ngc::InvalidConfig("bad number: " + tok);
    }
    if (pos != tok.size()) throw ngc::InvalidConfig("bad number: " + tok);
    out.push_back(v);
  }
  if (out.empty()) throw ngc::InvalidConfig("empty number list");
  return out;
}

// Weight spec: a plain number means scalar * identity, anything else is a
// path to a JSON nested array.
ngc::SymMatrix parse_weight(const std::string& spec, int dim) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(spec, &pos);
    if (pos == spec.size())
      return ngc::SymMatrix(v * ngc::Matrix::Identity(dim, dim));
  } catch (const std::invalid_argument&) {
  }
  std::ifstream in(spec);
  if (!in) throw ngc::InvalidConfig("cannot open weight file: " + spec);
  return ngc::SymMatrix::from_input(
      ngc::matrix_from_json(ngc::json::parse(in)));
}

void write_json_file(const std::string& path, const ngc::json& j) {
  std::ofstream out(path);
  if (!out) throw ngc::InvalidConfig("cannot write output file: " + path);
  out << j.dump(2) << "\n";
}

int run_synth(const std::string& model, double alpha, double lambda,
              const std::string& backend, const std::string& out) {
  ngc::LinearSystem sys = ngc::load_model(model);
  ngc::SynthesisConfig cfg;
  cfg.alpha = alpha;
  cfg.lambda = lambda;
  cfg.backend = backend == "projection" ? ngc::SolverBackend::Projection
                                        : ngc::SolverBackend::InteriorPoint;
  ngc::SynthesisResult r = ngc::synthesize(sys, cfg);
  ngc::CertificateReport rep = ngc::verify(sys, r, cfg);
  ngc::json j = ngc::result_to_json(r);
  j["certificate"] = ngc::certificate_to_json(rep);
  j["model"] = sys.name;
  j["backend"] = ngc::to_string(cfg.backend);
  write_json_file(out, j);
  std::printf("synth: %s margin=%.6g certificate=%s -> %s\n", sys.name.c_str(),
              r.margin, rep.overall ? "pass" : "FAIL", out.c_str());
  return rep.overall ? kExitOk : kExitInfeasible;
}

int run_verify(const std::string& model, const std::string& result_path,
               const std::string& out) {
  ngc::LinearSystem sys = ngc::load_model(model);
  std::ifstream in(result_path);
  if (!in) throw ngc::InvalidConfig("cannot open result file: " + result_path);
  ngc::SynthesisResult r = ngc::result_from_json(ngc::json::parse(in));
  ngc::SynthesisConfig cfg;
  cfg.alpha = r.alpha;
  cfg.lambda = r.lambda;
  ngc::CertificateReport rep = ngc::verify(sys, r, cfg);
  if (!out.empty()) write_json_file(out, ngc::certificate_to_json(rep));
  for (const auto& c : rep.checks)
    std::printf("  %-18s %s (residual %.3e, tol %.1e)\n", c.name.c_str(),
                c.pass ? "pass" : "FAIL", c.residual, c.tolerance);
  std::printf("verify: %s\n", rep.overall ? "pass" : "FAIL");
  return rep.overall ? kExitOk : kExitInfeasible;
}

int run_lqr(const std::string& model, const std::string& q_spec,
            const std::string& r_spec, const std::string& out) {
  ngc::LinearSystem sys = ngc::load_model(model);
  ngc::LqrConfig cfg;
  cfg.Q = parse_weight(q_spec, sys.n());
  cfg.R = parse_weight(r_spec, sys.m());
  ngc::SymMatrix p = ngc::solve_dare(sys, cfg);
  ngc::Matrix k = ngc::lqr_gain(sys, p, cfg);
  const double resid = ngc::dare_residual(sys, cfg, p);
  write_json_file(out, ngc::lqr_to_json(k, p, cfg, resid));
  std::printf("lqr: %s dare_residual=%.3e -> %s\n", sys.name.c_str(), resid,
              out.c_str());
  return kExitOk;
}

int run_simulate(const std::string& model, const std::string& gain,
                 const std::string& x0_spec, std::uint64_t seed, int horizon,
                 int rollouts, bool noise_free, const std::string& out) {
  ngc::LinearSystem sys = ngc::load_model(model);
  ngc::Matrix k = ngc::gain_from_json_file(gain);
  ngc::Vector x0;
  if (!x0_spec.empty()) {
    auto vals = parse_number_list(x0_spec);
    if (static_cast<int>(vals.size()) != sys.n())
      throw ngc::InvalidConfig("x0 length does not match the state dimension");
    x0 = Eigen::Map<ngc::Vector>(vals.data(), vals.size());
  } else {
    // small upright perturbation for the 4-state pendulum scenario
    x0 = ngc::Vector::Zero(sys.n());
    if (sys.n() == 4) x0 << 0.1, 0.1, 0.0, 0.0;
  }
  ngc::SimOptions opt;
  opt.noise_free = noise_free;
  if (rollouts <= 1) {
    ngc::Trace tr = ngc::rollout(sys, k, x0, seed, horizon, opt);
    std::ofstream os(out);
    if (!os) throw ngc::InvalidConfig("cannot write output file: " + out);
    ngc::write_trace_csv(os, tr);
    std::printf("simulate: 1 rollout, horizon %d, seed %llu -> %s\n", horizon,
                static_cast<unsigned long long>(seed), out.c_str());
  } else {
    ngc::EnsembleStats st =
        ngc::ensemble(sys, k, x0, seed, rollouts, horizon, opt);
    write_json_file(out, ngc::ensemble_to_json(st));
    const std::string csv = out + ".csv";
    std::ofstream os(csv);
    if (!os) throw ngc::InvalidConfig("cannot write output file: " + csv);
    ngc::write_ensemble_csv(os, st, sys.Ts);
    std::printf("simulate: %d rollouts, horizon %d, seed %llu -> %s, %s\n",
                rollouts, horizon, static_cast<unsigned long long>(seed),
                out.c_str(), csv.c_str());
  }
  return kExitOk;
}

int run_sweep(const std::string& model, const std::string& alphas_spec,
              double lambda, const std::string& backend,
              const std::string& out) {
  ngc::LinearSystem sys = ngc::load_model(model);
  std::vector<double> alphas = parse_number_list(alphas_spec);
  std::vector<double> unique;
  for (double a : alphas) {
    if (std::find(unique.begin(), unique.end(), a) != unique.end()) {
      std::fprintf(stderr, "warning: duplicate alpha %.6g dropped\n", a);
      continue;
    }
    if (!(a > 0.0)) throw ngc::InvalidConfig("alpha values must be positive");
    unique.push_back(a);
  }
  std::sort(unique.begin(), unique.end());

  ngc::SynthesisConfig base;
  base.backend = backend == "projection" ? ngc::SolverBackend::Projection
                                         : ngc::SolverBackend::InteriorPoint;
  auto summaries = ngc::alpha_sweep(sys, unique, lambda, base);

  std::printf("%-10s %-12s %-12s %-14s %-12s\n", "alpha", "status", "margin",
              "dominant|eig|", "alpha_max");
  for (const auto& s : summaries)
    std::printf("%-10.6g %-12s %-12.6g %-14.8g %-12.6g\n", s.alpha,
                ngc::to_string(s.status), s.margin, s.dominant_modulus,
                s.alpha_max_value);

  // convergence-speed trend across alpha, reported rather than asserted
  bool monotone = true;
  for (std::size_t i = 1; i < summaries.size(); ++i) {
    if (summaries[i].status != ngc::SolveStatus::Feasible ||
        summaries[i - 1].status != ngc::SolveStatus::Feasible)
      continue;
    if (summaries[i].dominant_modulus > summaries[i - 1].dominant_modulus)
      monotone = false;
  }
  std::printf("trend: dominant |eigenvalue| %s with increasing alpha\n",
              monotone ? "decreases monotonically" : "is not monotone");

  ngc::json j;
  j["model"] = sys.name;
  j["lambda"] = lambda;
  j["summaries"] = ngc::sweep_to_json(summaries);
  j["dominant_modulus_monotone_decreasing"] = monotone;
  write_json_file(out, j);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"natural-gradient state-feedback design toolkit"};
  app.require_subcommand(1);

  std::string model, out, gain, result_path, x0_spec, alphas_spec;
  std::string q_spec = "1", r_spec = "1", backend = "interior-point";
  double alpha = 0.018, lambda = 0.99;
  std::uint64_t seed = 42;
  int horizon = 2000, rollouts = 1;
  bool noise_free = false;

  auto* synth = app.add_subcommand("synth", "solve for a contractive gain");
  synth->add_option("model", model)->required();
  synth->add_option("--alpha", alpha);
  synth->add_option("--lambda", lambda);
  synth->add_option("--backend", backend)
      ->check(CLI::IsMember({"interior-point", "projection"}));
  synth->add_option("--out", out)->required();

  auto* verify = app.add_subcommand("verify", "re-check a synthesis result");
  verify->add_option("model", model)->required();
  verify->add_option("result", result_path)->required();
  verify->add_option("--out", out);

  auto* lqr = app.add_subcommand("lqr", "discrete-time LQR baseline");
  lqr->add_option("model", model)->required();
  lqr->add_option("--q", q_spec);
  lqr->add_option("--r", r_spec);
  lqr->add_option("--out", out)->required();

  auto* simulate = app.add_subcommand("simulate", "closed-loop rollouts");
  simulate->add_option("model", model)->required();
  simulate->add_option("--gain", gain)->required();
  simulate->add_option("--x0", x0_spec);
  simulate->add_option("--seed", seed);
  simulate->add_option("--horizon", horizon)->check(CLI::PositiveNumber);
  simulate->add_option("--rollouts", rollouts)->check(CLI::PositiveNumber);
  simulate->add_flag("--noise-free", noise_free);
  simulate->add_option("--out", out)->required();

  auto* sweep = app.add_subcommand("sweep", "feasibility summary per alpha");
  sweep->add_option("model", model)->required();
  sweep->add_option("--alphas", alphas_spec)->required();
  sweep->add_option("--lambda", lambda);
  sweep->add_option("--backend", backend)
      ->check(CLI::IsMember({"interior-point", "projection"}));
  sweep->add_option("--out", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (synth->parsed()) return run_synth(model, alpha, lambda, backend, out);
    if (verify->parsed()) return run_verify(model, result_path, out);
    if (lqr->parsed()) return run_lqr(model, q_spec, r_spec, out);
    if (simulate->parsed())
      return run_simulate(model, gain, x0_spec, seed, horizon, rollouts,
                          noise_free, out);
    if (sweep->parsed())
      return run_sweep(model, alphas_spec, lambda, backend, out);
  } catch (const ngc::Infeasible& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kExitInfeasible;
  } catch (const ngc::InvalidConfig& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kExitInvalid;
  } catch (const ngc::DimensionMismatch& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kExitInvalid;
  } catch (const ngc::Uncontrollable& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kExitInvalid;
  } catch (const ngc::json::exception& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitInvalid;
}
