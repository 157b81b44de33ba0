#pragma once

// Coherent addition of two pure states given as copies:
// psi(chi) = (sin(D - chi) psi1 + e^{i phi} sin(chi) psi2) / sin D,
// D = arccos |<psi1|psi2>|, e^{i phi} = <psi2|psi1> / |<psi2|psi1>|.

#include <cmath>
#include <numbers>

#include "dmexp/applications/common.hpp"
#include "dmexp/gadgets.hpp"

namespace dmexp {

struct AdditionResult {
  DensityMatrix state;
  PureState target;
  double fidelity;  // <target|state|target>
  double angle;     // D
  double time;      // evolution time under i[P2, P1]
  long steps;
};

inline double addition_angle(const PureState& psi1, const PureState& psi2) {
  require(psi1.dim() == psi2.dim(), "add_states: state dims differ");
  return std::acos(std::clamp(std::abs(psi1.inner(psi2)), 0.0, 1.0));
}

inline PureState addition_target(const PureState& psi1, const PureState& psi2, double chi) {
  const double d = addition_angle(psi1, psi2);
  const Complex overlap = psi2.inner(psi1);
  const Complex phase = overlap / std::abs(overlap);
  const ComplexVector v =
      (std::sin(d - chi) * psi1.amplitudes() + phase * std::sin(chi) * psi2.amplitudes()) / std::sin(d);
  return PureState::normalized(v);
}

/// Evolves psi1 under H = i[P2, P1] for t = chi / (cos D sin D).
inline AdditionResult add_states(const PureState& psi1, const PureState& psi2, double chi, Protocol protocol,
                                 LmrConfig budget = {}) {
  require(std::isfinite(chi), "add_states: non-finite chi");
  const double d = addition_angle(psi1, psi2);
  require(d > 1e-8 && std::abs(d - std::numbers::pi / 2) > 1e-8,
          "add_states: need 0 < |<psi1|psi2>| < 1 (the commutator vanishes otherwise)");
  const double t = chi / (std::cos(d) * std::sin(d));
  const auto p1 = DensityMatrix::pure(psi1);
  const auto p2 = DensityMatrix::pure(psi2);

  long steps = 0;
  DensityMatrix out = p1;
  if (protocol == Protocol::ideal) {
    out = ideal_conjugation(kI * commutator(p2.matrix(), p1.matrix()), t, p1);
  } else {
    // the gadget encodes H/2, so run for twice the time
    const auto pair = commutator_gadget(p2, p1, std::numbers::pi / 2);
    budget.t = 2.0 * t;
    auto run = signed_lmr_simulate(p1, pair, budget);
    out = run.state;
    steps = run.steps;
  }
  auto target = addition_target(psi1, psi2, chi);
  const double f = fidelity(target, out);
  return {out, std::move(target), f, d, t, steps};
}

}  // namespace dmexp
