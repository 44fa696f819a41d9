#pragma once

// Stochastic closed-loop rollouts, exact moment propagation, and
// cross-rollout ensemble statistics.

#include <cstdint>
#include <future>
#include <vector>

#include "ngc/gaussian.hpp"
#include "ngc/matcore.hpp"
#include "ngc/system.hpp"

namespace ngc {

struct Trace {
  int horizon = 0;
  double ts = 1.0;
  std::vector<Vector> states;  // horizon + 1 entries
  std::vector<Vector> inputs;  // horizon entries, u_k = K x_k
  std::uint64_t seed = 0;
};

struct SimOptions {
  bool noise_free = false;  // replaces w_k by zero, W in the model untouched
};

inline Trace rollout(const LinearSystem& sys, const Matrix& k, const Vector& x0,
                     std::uint64_t seed, int horizon,
                     const SimOptions& opt = {}, const NumericPolicy& pol = {}) {
  if (horizon < 1) throw InvalidConfig("rollout: horizon must be >= 1");
  if (k.rows() != sys.m() || k.cols() != sys.n() || x0.size() != sys.n())
    throw DimensionMismatch("rollout: gain or x0 dimensions do not match");
  Trace tr;
  tr.horizon = horizon;
  tr.ts = sys.Ts;
  tr.seed = seed;
  tr.states.reserve(horizon + 1);
  tr.inputs.reserve(horizon);
  const Matrix l = opt.noise_free ? Matrix() : cholesky(sys.W, pol);
  NormalStream stream(seed);
  Vector x = x0;
  tr.states.push_back(x);
  for (int step = 0; step < horizon; ++step) {
    const Vector u = k * x;
    tr.inputs.push_back(u);
    Vector next = sys.A * x + sys.B * u;
    if (!opt.noise_free) next += l * stream.next_vector(sys.n());
    x = next;
    tr.states.push_back(x);
  }
  return tr;
}

// mu_{k+1} = Acl mu_k, Sigma_{k+1} = Acl Sigma_k Acl^T + W, exactly as written.
inline std::vector<GaussianState> propagate_moments(
    const LinearSystem& sys, const Matrix& k, const Vector& mu0,
    const SymMatrix& sigma0, int horizon, const SimOptions& opt = {}) {
  if (k.rows() != sys.m() || k.cols() != sys.n() || mu0.size() != sys.n() ||
      sigma0.dim() != sys.n())
    throw DimensionMismatch("propagate_moments: dimensions do not match");
  const Matrix acl = sys.A + sys.B * k;
  std::vector<GaussianState> seq;
  seq.reserve(horizon + 1);
  seq.push_back({mu0, sigma0});
  Vector mu = mu0;
  Matrix sig = sigma0.mat();
  for (int step = 0; step < horizon; ++step) {
    mu = acl * mu;
    sig = acl * sig * acl.transpose();
    if (!opt.noise_free) sig += sys.W.mat();
    sig = 0.5 * (sig + sig.transpose().eval());
    seq.push_back({mu, SymMatrix(sig)});
  }
  return seq;
}

struct EnsembleStats {
  int rollouts = 0;
  int horizon = 0;
  std::uint64_t base_seed = 0;
  std::vector<Vector> mean;   // per step
  std::vector<SymMatrix> cov; // per step, unbiased (rollouts - 1)
};

namespace detail {

struct StepAccum {
  std::vector<Vector> sum;
  std::vector<Matrix> outer;

  void init(int steps, int n) {
    sum.assign(steps, Vector::Zero(n));
    outer.assign(steps, Matrix::Zero(n, n));
  }
  void absorb(const StepAccum& other) {
    for (std::size_t i = 0; i < sum.size(); ++i) {
      sum[i] += other.sum[i];
      outer[i] += other.outer[i];
    }
  }
};

inline StepAccum accumulate_range(const LinearSystem& sys, const Matrix& k,
                                  const Vector& x0, std::uint64_t base_seed,
                                  int first, int last, int horizon,
                                  const SimOptions& opt,
                                  const NumericPolicy& pol) {
  StepAccum acc;
  acc.init(horizon + 1, sys.n());
  for (int r = first; r < last; ++r) {
    Trace tr = rollout(sys, k, x0, base_seed + static_cast<std::uint64_t>(r),
                       horizon, opt, pol);
    for (int s = 0; s <= horizon; ++s) {
      acc.sum[s] += tr.states[s];
      acc.outer[s] += tr.states[s] * tr.states[s].transpose();
    }
  }
  return acc;
}

}  // namespace detail

// Rollout r draws from seed base_seed + r. Work is fanned out over fixed
// chunks and merged in chunk order, so the concurrent and serial schedules
// produce bitwise-identical statistics.
inline EnsembleStats ensemble(const LinearSystem& sys, const Matrix& k,
                              const Vector& x0, std::uint64_t base_seed,
                              int rollouts, int horizon,
                              const SimOptions& opt = {},
                              const NumericPolicy& pol = {},
                              bool concurrent = true, int chunks = 8) {
  if (rollouts < 2) throw InvalidConfig("ensemble: rollouts must be >= 2");
  if (chunks < 1) chunks = 1;
  chunks = std::min(chunks, rollouts);

  std::vector<std::future<detail::StepAccum>> parts;
  parts.reserve(chunks);
  const int per = (rollouts + chunks - 1) / chunks;
  const auto policy = concurrent ? std::launch::async : std::launch::deferred;
  for (int c = 0; c < chunks; ++c) {
    const int first = c * per;
    const int last = std::min(rollouts, first + per);
    if (first >= last) break;
    parts.push_back(std::async(policy, [=, &sys, &k, &x0, &pol] {
      return detail::accumulate_range(sys, k, x0, base_seed, first, last,
                                      horizon, opt, pol);
    }));
  }
  detail::StepAccum total;
  total.init(horizon + 1, sys.n());
  for (auto& f : parts) total.absorb(f.get());

  EnsembleStats st;
  st.rollouts = rollouts;
  st.horizon = horizon;
  st.base_seed = base_seed;
  st.mean.reserve(horizon + 1);
  st.cov.reserve(horizon + 1);
  const double nr = static_cast<double>(rollouts);
  for (int s = 0; s <= horizon; ++s) {
    Vector m = total.sum[s] / nr;
    Matrix c = (total.outer[s] - nr * m * m.transpose()) / (nr - 1.0);
    st.mean.push_back(m);
    st.cov.push_back(SymMatrix(c));
  }
  return st;
}

}  // namespace ngc
