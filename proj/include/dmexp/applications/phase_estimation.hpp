#pragma once

// Iterative (Kitaev) phase estimation of U = e^{-i rho} from copies of rho.
//
// Round k applies controlled-U^{2^k} to |+> x |psi> and runs Hadamard tests on
// the control: measuring X gives P(+) = (1 + Re<U^m>)/2, measuring Y gives
// P(+) = (1 + Im<U^m>)/2. For an eigenvector with eigenvalue lambda,
// <U^m> = e^{-i lambda m}; the angle estimates are stitched from coarse to fine.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "dmexp/applications/common.hpp"
#include "dmexp/lmr.hpp"

namespace dmexp {

struct PhaseEstimationConfig {
  double precision = 0.05;
  Protocol protocol = Protocol::ideal;
  int shots_per_round = 96;            // per Hadamard test (X and Y each)
  int sampling_runs = 32;              // full runs in spectrum-sampling mode
  double budget_constant = 4.0;        // LMR steps per use of e^{-i rho}: ceil(constant / per_use_delta)
  std::optional<double> per_use_delta;  // defaults to precision
  std::uint64_t seed = 0;

  void validate() const {
    require(precision > 0.0 && precision < 0.5, "phase_estimate: precision must lie in (0, 1/2)");
    require(shots_per_round >= 1, "phase_estimate: shots_per_round must be positive");
    require(sampling_runs >= 1, "phase_estimate: sampling_runs must be positive");
    require(budget_constant > 0.0, "phase_estimate: budget_constant must be positive");
    require(!per_use_delta || (*per_use_delta > 0.0 && *per_use_delta <= 1.0),
            "phase_estimate: per_use_delta must lie in (0, 1]");
  }
};

struct PhaseEstimate {
  std::vector<double> eigenvalues;   // sorted
  std::vector<int> support;          // runs per reported eigenvalue
  int rounds = 0;                    // k = 0..rounds-1
  long steps_per_use = 0;            // LMR steps per use of e^{-i rho}
  long lmr_steps = 0;                // copies of rho consumed over all shots
  long controlled_uses = 0;          // uses of e^{-i rho} over all shots
};

namespace detail {

inline double wrap_two_pi(double a) {
  double r = std::fmod(a, 2.0 * std::numbers::pi);
  if (r < 0.0) r += 2.0 * std::numbers::pi;
  return r;
}

struct KitaevRun {
  double estimate;
  long lmr_steps;
  long uses;
};

/// One full iterative run on the data state `psi` (ideally an eigenvector).
inline KitaevRun kitaev_run(const DensityMatrix& rho, const DensityMatrix& psi, const PhaseEstimationConfig& cfg,
                            int rounds, long steps_per_use, CounterRng rng) {
  const auto plus = DensityMatrix::pure(PureState::plus());
  const auto joint = DensityMatrix::from_matrix(kron(plus.matrix(), psi.matrix()));
  const Index dpsi = psi.dim();
  ComplexVector plus_y(2);
  plus_y << 1.0 / std::sqrt(2.0), kI / std::sqrt(2.0);

  double estimate = 0.0;
  KitaevRun out{0.0, 0, 0};
  for (int k = 0; k < rounds; ++k) {
    const long m = 1L << k;
    DensityMatrix after = joint;
    if (cfg.protocol == Protocol::ideal) {
      after = DensityMatrix::from_matrix(
          hermitian_part(conjugate(controlled(herm_exp(rho.matrix(), static_cast<double>(m))), joint.matrix())));
    } else {
      LmrConfig lc{.t = static_cast<double>(m), .delta = 1.0, .n_override = m * steps_per_use};
      after = controlled_lmr_simulate(joint, rho, lc).state;
      out.lmr_steps += 2L * cfg.shots_per_round * m * steps_per_use;
    }
    out.uses += 2L * cfg.shots_per_round * m;
    const ComplexMatrix control = partial_trace(after.matrix(), {2, dpsi}, 1);
    const double px = born(PureState::plus().amplitudes(), control);
    const double py = born(plus_y, control);
    int hits_x = 0, hits_y = 0;
    for (int s = 0; s < cfg.shots_per_round; ++s) {
      hits_x += rng.bernoulli(px) ? 1 : 0;
      hits_y += rng.bernoulli(py) ? 1 : 0;
    }
    const double re = 2.0 * hits_x / cfg.shots_per_round - 1.0;
    const double im = 2.0 * hits_y / cfg.shots_per_round - 1.0;
    // <U^m> = e^{-i lambda m}, so lambda m = -arg <U^m> (mod 2 pi)
    const double angle = wrap_two_pi(-std::atan2(im, re));
    if (k == 0) {
      estimate = angle >= 1.5 * std::numbers::pi ? angle - 2.0 * std::numbers::pi : angle;
    } else {
      const double md = static_cast<double>(m);
      const double j = std::round((estimate * md - angle) / (2.0 * std::numbers::pi));
      estimate = (angle + 2.0 * std::numbers::pi * j) / md;
    }
  }
  out.estimate = estimate;
  return out;
}

inline int kitaev_rounds(double precision) {
  return static_cast<int>(std::ceil(std::log2(1.0 / precision) - 1e-12)) + 1;
}

}  // namespace detail

/// Estimates eigenvalues of rho (eigenphases of e^{-i rho}).
///
/// With `eigenvector` set, the data register holds that vector and a single
/// estimate is returned. Otherwise the data register holds rho itself, viewed
/// as the ensemble of its eigenvectors: each run draws eigenvector j with
/// probability lambda_j, and estimates are clustered (width 2 precision).
inline PhaseEstimate phase_estimate(const DensityMatrix& rho, const PhaseEstimationConfig& cfg,
                                    const std::optional<PureState>& eigenvector = std::nullopt) {
  cfg.validate();
  PhaseEstimate out;
  out.rounds = detail::kitaev_rounds(cfg.precision);
  const double per_use = cfg.per_use_delta.value_or(cfg.precision);
  out.steps_per_use = static_cast<long>(std::ceil(cfg.budget_constant / per_use * (1.0 - 1e-12)));
  const CounterRng root(cfg.seed);

  if (eigenvector) {
    require(eigenvector->dim() == rho.dim(), "phase_estimate: eigenvector dimension mismatch");
    const auto run = detail::kitaev_run(rho, DensityMatrix::pure(*eigenvector), cfg, out.rounds, out.steps_per_use,
                                        root.substream(0));
    out.eigenvalues = {run.estimate};
    out.support = {1};
    out.lmr_steps = run.lmr_steps;
    out.controlled_uses = run.uses;
    return out;
  }

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho.matrix());
  std::vector<double> weights(static_cast<std::size_t>(rho.dim()));
  for (Index j = 0; j < rho.dim(); ++j) weights[static_cast<std::size_t>(j)] = std::max(0.0, es.eigenvalues()(j));
  CounterRng picker = root.substream(1);
  std::vector<double> estimates;
  for (int r = 0; r < cfg.sampling_runs; ++r) {
    const auto j = static_cast<Index>(picker.categorical(weights));
    const auto psi = DensityMatrix::pure(PureState::normalized(es.eigenvectors().col(j)));
    const auto run = detail::kitaev_run(rho, psi, cfg, out.rounds, out.steps_per_use,
                                        root.substream({2, static_cast<std::uint64_t>(r)}));
    estimates.push_back(run.estimate);
    out.lmr_steps += run.lmr_steps;
    out.controlled_uses += run.uses;
  }
  std::sort(estimates.begin(), estimates.end());
  std::size_t start = 0;
  for (std::size_t i = 1; i <= estimates.size(); ++i) {
    if (i == estimates.size() || estimates[i] - estimates[start] > 2.0 * cfg.precision) {
      double mean = 0.0;
      for (std::size_t q = start; q < i; ++q) mean += estimates[q];
      out.eigenvalues.push_back(mean / static_cast<double>(i - start));
      out.support.push_back(static_cast<int>(i - start));
      start = i;
    }
  }
  return out;
}

}  // namespace dmexp
