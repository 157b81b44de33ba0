#pragma once

// Deciding whether two pure states are orthogonal or overlap by at least w,
// from copies of the states.
//
// The states are padded, |psi1>|0> and |psi2>|+>, so the padded overlap is
// mu = lambda / 2 with lambda = |<psi1|psi2>|^2. On span{padded states},
// H = i[P1, P2] has eigenvalues +-theta, theta = sqrt(mu (1 - mu)) in [0, 1/2],
// and <psi1~| e^{-iHT} |psi1~> = cos(theta T). A Hadamard test at the single
// time T = 2 pi / (theta_min + 1/2) therefore reports "-" with probability
// (1 - cos theta T)/2, which is 0 for orthogonal inputs and at least
// p_min = (1 - cos theta_min T)/2 under the promise.

#include <cmath>
#include <cstdint>
#include <numbers>

#include "dmexp/applications/common.hpp"
#include "dmexp/gadgets.hpp"

namespace dmexp {

enum class OrthogonalityVerdict { orthogonal, overlapping };

inline const char* to_string(OrthogonalityVerdict v) {
  return v == OrthogonalityVerdict::orthogonal ? "orthogonal" : "overlapping";
}

struct OrthogonalityResult {
  OrthogonalityVerdict verdict;
  int minus_count;
  int shots;
  int threshold;      // "-" outcomes needed to report overlapping
  double time;        // T
  double p_minus;     // analytic P(-) of the simulated channel
  double p_min;       // lower bound on P(-) under the overlap promise
  long lmr_steps;     // per shot
};

struct OrthogonalityPlan {
  double theta_min;
  double time;
  double p_min;
  int shots;
  int threshold;
};

inline OrthogonalityPlan orthogonality_plan(double w, double eps_fail) {
  require(w > 0.0 && w <= 1.0, "orthogonality_test: w must lie in (0, 1]");
  require(eps_fail > 0.0 && eps_fail < 1.0, "orthogonality_test: eps_fail must lie in (0, 1)");
  const double mu = w / 2.0;
  const double theta_min = std::sqrt(mu * (1.0 - mu));
  const double time = 2.0 * std::numbers::pi / (theta_min + 0.5);
  const double p_min = 0.5 * (1.0 - std::cos(theta_min * time));
  const int shots = static_cast<int>(std::ceil(8.0 * std::log(1.0 / eps_fail) / p_min));
  const int threshold = std::max(1, static_cast<int>(std::ceil(0.5 * shots * p_min)));
  return {theta_min, time, p_min, shots, threshold};
}

/// Promise: |<psi1|psi2>|^2 is 0 or at least w. Outside the promise the
/// verdict is unspecified.
inline OrthogonalityResult orthogonality_test(const PureState& psi1, const PureState& psi2, double w,
                                              double eps_fail, Protocol protocol, std::uint64_t seed) {
  require(psi1.dim() == psi2.dim(), "orthogonality_test: state dims differ");
  const auto plan = orthogonality_plan(w, eps_fail);
  const auto p1 = DensityMatrix::pure(psi1.tensor(PureState::basis(2, 0)));
  const auto p2 = DensityMatrix::pure(psi2.tensor(PureState::plus()));
  const Index d = p1.dim();
  const auto control = DensityMatrix::pure(PureState::plus());
  const auto joint = DensityMatrix::from_matrix(kron(control.matrix(), p1.matrix()));

  DensityMatrix after = joint;
  long steps = 0;
  if (protocol == Protocol::ideal) {
    const ComplexMatrix h = kI * commutator(p1.matrix(), p2.matrix());
    after = DensityMatrix::from_matrix(
        hermitian_part(conjugate(controlled(herm_exp(h, plan.time)), joint.matrix())));
  } else {
    // flagging both states with |1><1| makes the gadget Hamiltonian |1><1| x H/2,
    // whose evolution is the controlled one
    const ComplexMatrix one = DensityMatrix::basis(2, 1).matrix();
    const auto f1 = DensityMatrix::from_matrix(kron(one, p1.matrix()));
    const auto f2 = DensityMatrix::from_matrix(kron(one, p2.matrix()));
    const auto pair = commutator_gadget(f1, f2, std::numbers::pi / 2);
    const auto run = signed_lmr_simulate(joint, pair, {.t = 2.0 * plan.time, .delta = plan.p_min / 4.0});
    after = run.state;
    steps = run.steps;
  }
  const ComplexMatrix c = partial_trace(after.matrix(), {2, d}, 1);
  const double p_minus = born(PureState::minus().amplitudes(), c);

  CounterRng rng(seed);
  int minus = 0;
  for (int s = 0; s < plan.shots; ++s) minus += rng.bernoulli(p_minus) ? 1 : 0;
  const auto verdict = minus >= plan.threshold ? OrthogonalityVerdict::overlapping : OrthogonalityVerdict::orthogonal;
  return {verdict, minus, plan.shots, plan.threshold, plan.time, p_minus, plan.p_min, steps};
}

}  // namespace dmexp
