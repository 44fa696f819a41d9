#pragma once

// JSON and CSV interchange: model files, gain/result files, certificate
// reports, sweep summaries, traces, and ensemble statistics.

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <string>

#include "ngc/lqr.hpp"
#include "ngc/sim.hpp"
#include "ngc/synthesis.hpp"
#include "ngc/system.hpp"

namespace ngc {

using json = nlohmann::json;

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw InvalidConfig("expected a nested array of numbers");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j[i].size()) != cols)
      throw InvalidConfig("ragged matrix rows in JSON input");
    for (int c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

// Model schema: {"name": str, "ts": number, "A": [[num]], "B": [[num]],
// "W": [[num]]?}. A missing W falls back to 1e-4 I with a notice on stderr.
inline LinearSystem load_model(const std::string& path,
                               const NumericPolicy& pol = {}) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open model file: " + path);
  json j = json::parse(in);
  LinearSystem sys;
  sys.name = j.value("name", "unnamed");
  sys.Ts = j.value("ts", 1.0);
  sys.A = matrix_from_json(j.at("A"));
  sys.B = matrix_from_json(j.at("B"));
  if (j.contains("W")) {
    sys.W = SymMatrix::from_input(matrix_from_json(j.at("W")), pol);
  } else {
    std::fprintf(stderr, "notice: model '%s' has no W, defaulting to 1e-4*I\n",
                 sys.name.c_str());
    sys.W = SymMatrix(1e-4 * Matrix::Identity(sys.A.rows(), sys.A.rows()));
  }
  sys.validate(pol);
  return sys;
}

inline json result_to_json(const SynthesisResult& r) {
  json j;
  j["K"] = matrix_to_json(r.K);
  j["Y"] = matrix_to_json(r.Y.mat());
  j["Sigma"] = matrix_to_json(r.Sigma.mat());
  j["M"] = matrix_to_json(r.M.mat());
  j["F"] = matrix_to_json(r.F);
  j["P"] = matrix_to_json(r.P.mat());
  j["margin"] = r.margin;
  j["alpha"] = r.alpha;
  j["lambda"] = r.lambda;
  return j;
}

inline SynthesisResult result_from_json(const json& j,
                                        const NumericPolicy& pol = {}) {
  SynthesisResult r;
  r.K = matrix_from_json(j.at("K"));
  r.Y = SymMatrix::from_input(matrix_from_json(j.at("Y")), pol);
  r.Sigma = SymMatrix::from_input(matrix_from_json(j.at("Sigma")), pol);
  r.M = SymMatrix::from_input(matrix_from_json(j.at("M")), pol);
  r.F = matrix_from_json(j.at("F"));
  r.P = SymMatrix::from_input(matrix_from_json(j.at("P")), pol);
  r.margin = j.at("margin").get<double>();
  r.alpha = j.at("alpha").get<double>();
  r.lambda = j.at("lambda").get<double>();
  r.fisher = chol_inverse(r.Sigma, pol);
  return r;
}

inline json certificate_to_json(const CertificateReport& rep) {
  json checks = json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"name", c.name},
                      {"residual", c.residual},
                      {"tolerance", c.tolerance},
                      {"pass", c.pass}});
  return {{"checks", checks}, {"overall_pass", rep.overall}};
}

inline json lqr_to_json(const Matrix& k, const SymMatrix& p,
                        const LqrConfig& cfg, double residual) {
  json j;
  j["K"] = matrix_to_json(k);
  j["P"] = matrix_to_json(p.mat());
  j["Q"] = matrix_to_json(cfg.Q.mat());
  j["R"] = matrix_to_json(cfg.R.mat());
  j["dare_residual"] = residual;
  return j;
}

// Accepts gain JSON from either controller: only "K" is required.
inline Matrix gain_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open gain file: " + path);
  json j = json::parse(in);
  return matrix_from_json(j.at("K"));
}

inline json sweep_to_json(const std::vector<AlphaSummary>& summaries) {
  json arr = json::array();
  for (const auto& s : summaries) {
    json e;
    e["alpha"] = s.alpha;
    e["status"] = to_string(s.status);
    e["margin"] = s.margin;
    if (s.status == SolveStatus::Feasible) {
      e["dominant_modulus"] = s.dominant_modulus;
      e["alpha_max"] = s.alpha_max_value;
      e["sensitivities"] = s.sensitivities;
    }
    if (!s.error.empty()) e["error"] = s.error;
    arr.push_back(std::move(e));
  }
  return arr;
}

// Trace CSV: header k,t,x1..xn,u1..um; one row per step, u columns empty
// on the final row; UNIX line endings.
inline void write_trace_csv(std::ostream& os, const Trace& tr) {
  const int n = static_cast<int>(tr.states.front().size());
  const int m = static_cast<int>(tr.inputs.front().size());
  os << "k,t";
  for (int i = 1; i <= n; ++i) os << ",x" << i;
  for (int i = 1; i <= m; ++i) os << ",u" << i;
  os << "\n";
  char buf[40];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.12g", v);
    os << buf;
  };
  for (int k = 0; k <= tr.horizon; ++k) {
    os << k << ",";
    num(k * tr.ts);
    for (int i = 0; i < n; ++i) {
      os << ",";
      num(tr.states[k][i]);
    }
    for (int i = 0; i < m; ++i) {
      os << ",";
      if (k < tr.horizon) num(tr.inputs[k][i]);
    }
    os << "\n";
  }
}

inline json ensemble_to_json(const EnsembleStats& st) {
  json j;
  j["rollouts"] = st.rollouts;
  j["horizon"] = st.horizon;
  j["base_seed"] = st.base_seed;
  j["final_mean"] = std::vector<double>(
      st.mean.back().data(), st.mean.back().data() + st.mean.back().size());
  j["final_cov"] = matrix_to_json(st.cov.back().mat());
  return j;
}

// Per-step ensemble CSV: mean and covariance entries per step.
inline void write_ensemble_csv(std::ostream& os, const EnsembleStats& st,
                               double ts) {
  const int n = static_cast<int>(st.mean.front().size());
  os << "k,t";
  for (int i = 1; i <= n; ++i) os << ",mean_x" << i;
  for (int i = 1; i <= n; ++i)
    for (int j = i; j <= n; ++j) os << ",cov_" << i << j;
  os << "\n";
  char buf[40];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.12g", v);
    os << buf;
  };
  for (int k = 0; k <= st.horizon; ++k) {
    os << k << ",";
    num(k * ts);
    for (int i = 0; i < n; ++i) {
      os << ",";
      num(st.mean[k][i]);
    }
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        os << ",";
        num(st.cov[k](i, j));
      }
    os << "\n";
  }
}

}  // namespace ngc
