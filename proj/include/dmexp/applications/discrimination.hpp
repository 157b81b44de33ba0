#pragma once

// Telling rho(x) from rho(x + eps) by evolving |+> under the unknown state.

#include <cmath>
#include <cstdint>
#include <numbers>

#include "dmexp/applications/common.hpp"
#include "dmexp/lmr.hpp"

namespace dmexp {

struct DiscriminationTask {
  double x = 0.5;
  double epsilon = 0.5;
  double eta = 0.0;  // margin; 0 disables the margin check
  int trials = 1000;
  std::uint64_t seed = 0;

  void validate() const {
    require(std::isfinite(x) && std::isfinite(epsilon) && std::isfinite(eta), "DiscriminationTask: non-finite field");
    require(epsilon > 0.0, "DiscriminationTask: epsilon must be positive");
    require(x >= 0.0 && x + epsilon <= 1.0, "DiscriminationTask: need 0 <= x and x + epsilon <= 1");
    require(trials >= 1, "DiscriminationTask: trials must be positive");
    if (eta > 0.0) {
      require(epsilon < eta && eta < 0.5, "DiscriminationTask: need epsilon < eta < 1/2");
      require(x > eta && x < 1.0 - eta, "DiscriminationTask: x must lie in (eta, 1 - eta)");
    }
  }
};

struct DiscriminationResult {
  double success_rate;
  int successes;
  int trials;
  double time;                    // t_eps = pi / (2 eps)
  long steps;                     // LMR steps per evolution (0 for ideal)
  double p_correct_given_low;     // analytic, hidden state rho(x)
  double p_correct_given_high;    // analytic, hidden state rho(x + eps)
};

/// Evolve |+> for t_eps under the hidden state, measure in {u, u_perp} with
/// u = e^{-i rho(x) t_eps}|+>, guess rho(x) on outcome u.
inline DiscriminationResult discriminate(const DiscriminationTask& task, Protocol protocol, LmrConfig budget = {}) {
  task.validate();
  const double t = std::numbers::pi / (2.0 * task.epsilon);
  const auto low = DensityMatrix::qubit_diagonal(task.x);
  const auto high = DensityMatrix::qubit_diagonal(task.x + task.epsilon);
  const auto plus = DensityMatrix::pure(PureState::plus());
  const ComplexVector u = herm_exp(low.matrix(), t) * PureState::plus().amplitudes();

  long steps = 0;
  auto evolve = [&](const DensityMatrix& rho) {
    if (protocol == Protocol::ideal) return ideal_conjugation(rho.matrix(), t, plus);
    LmrConfig cfg = budget;
    cfg.t = t;
    auto run = lmr_simulate(plus, rho, cfg);
    steps = run.steps;
    return run.state;
  };
  const double p_u_low = born(u, evolve(low).matrix());
  const double p_u_high = born(u, evolve(high).matrix());

  const CounterRng root(task.seed);
  int successes = 0;
  for (int i = 0; i < task.trials; ++i) {
    CounterRng rng = root.substream(static_cast<std::uint64_t>(i));
    const bool hidden_high = rng.bernoulli(0.5);
    const bool saw_u = rng.bernoulli(hidden_high ? p_u_high : p_u_low);
    const bool guess_high = !saw_u;
    successes += guess_high == hidden_high ? 1 : 0;
  }
  return {static_cast<double>(successes) / task.trials, successes, task.trials, t, steps, p_u_low, 1.0 - p_u_high};
}

/// Exact total-variation distance between Binomial(n, x) and Binomial(n, x + eps).
inline double binomial_tv(long n, double x, double eps) {
  require(n >= 0, "binomial_tv: n must be non-negative");
  require(std::isfinite(x) && std::isfinite(eps), "binomial_tv: non-finite input");
  require(x >= 0.0 && eps >= 0.0 && x + eps <= 1.0, "binomial_tv: need 0 <= x <= x + eps <= 1");
  auto log_pmf = [n](long k, double p) {
    const double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(static_cast<double>(n - k) + 1.0);
    if (p == 0.0) return k == 0 ? 0.0 : -INFINITY;
    if (p == 1.0) return k == n ? 0.0 : -INFINITY;
    return lc + k * std::log(p) + static_cast<double>(n - k) * std::log1p(-p);
  };
  double tv = 0.0;
  for (long k = 0; k <= n; ++k) tv += std::abs(std::exp(log_pmf(k, x)) - std::exp(log_pmf(k, x + eps)));
  return std::clamp(0.5 * tv, 0.0, 1.0);
}

}  // namespace dmexp
