#pragma once

// Exact-identity checks behind the CLI's --selftest flag. Each module gets a
// handful of fixed-seed cases; a check passes when its error is within tolerance.

#include <numbers>
#include <string>
#include <vector>

#include "dmexp/applications/discrimination.hpp"
#include "dmexp/applications/orthogonality.hpp"
#include "dmexp/applications/state_addition.hpp"
#include "dmexp/applications/tomography.hpp"
#include "dmexp/gadgets.hpp"
#include "dmexp/jordan_lie.hpp"
#include "dmexp/lmr.hpp"
#include "dmexp/universal.hpp"

namespace dmexp {

struct SelftestCheck {
  std::string module;
  std::string name;
  double error;
  double tolerance;

  bool pass() const { return std::isfinite(error) && error <= tolerance; }
};

namespace detail {

inline std::vector<DensityMatrix> selftest_states(CounterRng& rng, int k, Index d) {
  std::vector<DensityMatrix> out;
  for (int i = 0; i < k; ++i) out.push_back(random_state(d, 1 + rng.below(static_cast<std::uint64_t>(d)), rng));
  return out;
}

inline ComplexMatrix ordered_product(const std::vector<DensityMatrix>& states, bool reverse) {
  ComplexMatrix p = identity(states[0].dim());
  for (std::size_t i = 0; i < states.size(); ++i) p = p * states[reverse ? states.size() - 1 - i : i].matrix();
  return p;
}

}  // namespace detail

inline std::vector<SelftestCheck> selftest_linalg() {
  CounterRng rng(101);
  double ptrace = 0.0, unitary = 0.0, diamond = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = random_state(2, 2, rng), b = random_state(3, 2, rng);
    const ComplexMatrix ab = kron(a.matrix(), b.matrix());
    ptrace = std::max(ptrace, max_abs(partial_trace(ab, {2, 3}, 1) - a.matrix()));
    ptrace = std::max(ptrace, max_abs(partial_trace(ab, {2, 3}, 0) - b.matrix()));
    const ComplexMatrix u = herm_exp(a.matrix(), 1.0 + trial);
    unitary = std::max(unitary, max_abs(u * u.adjoint() - identity(2)));
    const double eps = 0.05 + 0.1 * trial, t = (std::numbers::pi / 2) / eps * rng.uniform();
    const double got = unitary_diamond_distance(identity(2), herm_exp(pauli::z(), eps * t));
    diamond = std::max(diamond, std::abs(got - std::sin(eps * t)));
  }
  return {{"linalg", "partial trace of a product", ptrace, 1e-12},
          {"linalg", "herm_exp is unitary", unitary, 1e-12},
          {"linalg", "diamond distance of e^{-i eps Z t}", diamond, 1e-10}};
}

inline std::vector<SelftestCheck> selftest_lmr() {
  CounterRng rng(102);
  double step = 0.0, controlled = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Index d = trial % 2 == 0 ? 2 : 4;
    const auto rho = random_state(2, 1 + trial % 2, rng);
    const auto sigma = random_state(d, std::min<Index>(d, 1 + trial % 3), rng);
    const double delta = rng.uniform() - 0.5;
    step = std::max(step, max_abs(lmr_step(sigma, rho, delta).matrix() - lmr_step_explicit(sigma, rho, delta).matrix()));
    const auto joint = random_state(2 * d, 2, rng);
    controlled = std::max(controlled, max_abs(controlled_lmr_step(joint, rho, delta).matrix() -
                                              controlled_lmr_step_explicit(joint, rho, delta).matrix()));
  }
  return {{"lmr", "closed-form step vs explicit partial swap", step, 1e-12},
          {"lmr", "controlled step vs explicit controlled swap", controlled, 1e-12}};
}

inline std::vector<SelftestCheck> selftest_gadgets() {
  CounterRng rng(103);
  double blocks = 0.0, signed_step = 0.0, weight = 0.0;
  for (int trial = 0; trial < 12; ++trial) {
    const int k = 2 + trial % 3;
    const Index d = 2 + trial % 2;
    const auto states = detail::selftest_states(rng, k, d);
    const double phi = 2 * std::numbers::pi * rng.uniform();
    const auto pair = polynomial_gadget(states, phi);
    const ComplexMatrix expect = 0.5 * (std::exp(kI * phi) * detail::ordered_product(states, false) +
                                        std::exp(-kI * phi) * detail::ordered_product(states, true));
    blocks = std::max(blocks, max_abs(pair.hamiltonian() - expect));
    weight = std::max(weight, std::abs(pair.plus().trace().real() + pair.minus().trace().real() - 1.0));
    const auto sigma = random_state(d, 2, rng);
    const double delta = 0.3 * (rng.uniform() - 0.5);
    signed_step = std::max(signed_step, max_abs(signed_lmr_step(sigma, pair, delta).matrix() -
                                                signed_lmr_step_explicit(sigma, pair, delta).matrix()));
  }
  return {{"gadgets", "plus - minus equals the symmetrized product", blocks, 1e-12},
          {"gadgets", "block weights sum to one", weight, 1e-12},
          {"gadgets", "signed step vs explicit", signed_step, 1e-12}};
}

inline std::vector<SelftestCheck> selftest_jordan_lie() {
  CounterRng rng(104);
  double round_trip = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 1 + static_cast<int>(rng.below(3));
    const auto states = detail::selftest_states(rng, k, 2 + trial % 2);
    std::vector<int> r;
    for (int i = 0; i <= trial % 4; ++i) r.push_back(1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(k))));
    const Complex z(rng.normal(), rng.normal());
    std::vector<DensityMatrix> picked;
    for (int i : r) picked.push_back(states[static_cast<std::size_t>(i - 1)]);
    const ComplexMatrix fwd = detail::ordered_product(picked, false);
    const ComplexMatrix expect = z * fwd + (z * fwd).adjoint();
    round_trip = std::max(round_trip, max_abs(eval_jordan_lie(jordan_lie_expand(r, z), states) - expect));
  }
  return {{"jordan_lie", "expansion evaluates to z r + h.c.", round_trip, 1e-10}};
}

inline std::vector<SelftestCheck> selftest_applications() {
  const auto ideal = discriminate({.x = 0.5, .epsilon = 0.5, .trials = 50, .seed = 1}, Protocol::ideal);
  const auto zero = PureState::basis(2, 0);
  const auto plus = PureState::plus();
  const auto end = add_states(zero, plus, addition_angle(zero, plus), Protocol::ideal);
  const auto same = orthogonality_test(zero, zero, 1.0, 0.1, Protocol::ideal, 1);
  const auto orth = orthogonality_test(zero, PureState::basis(2, 1), 0.5, 0.1, Protocol::ideal, 1);
  return {{"applications", "ideal discrimination at eps t = pi/2", 1.0 - ideal.success_rate, 0.0},
          {"applications", "ideal addition at chi = D reaches psi2", 1.0 - end.fidelity, 1e-12},
          {"applications", "identical states flip the ancilla surely", std::abs(1.0 - same.p_minus), 1e-12},
          {"applications", "orthogonal states never flip the ancilla", orth.p_minus, 1e-12}};
}

inline std::vector<SelftestCheck> selftest_tomography() {
  const double d = 2, r = 1, t = 1, delta = 0.1;
  const double expect = d * r * 0.81 / (0.01 * std::log(20.0)) + 100.0;
  return {{"tomography", "bound at d=2 r=1 t=1 delta=0.1", std::abs(tomography_bound(d, r, t, delta) - expect), 1e-9},
          {"tomography", "lmr budget 4 t^2 / delta", std::abs(lmr_budget_shape(1.0, 0.01) - 400.0), 1e-9}};
}

inline std::vector<SelftestCheck> selftest_universal() {
  CounterRng rng(105);
  double euler = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix u = random_unitary(2, rng);
    euler = std::max(euler, max_abs(euler_matrix(euler_decompose(u)) - u));
  }
  const ComplexMatrix cnot = ideal_circuit(2, {CircuitGate::cnot(0, 1)});
  const ComplexMatrix built = cnot_construction();
  const Complex phase = (cnot.adjoint() * built).trace() / 4.0;
  const double cnot_err = max_abs(built - phase * cnot) + std::abs(std::abs(phase) - 1.0);

  ChainMachine m(2, DensityMatrix::basis(4, 1));
  m.exchange_evolution(0, 1, std::numbers::pi / 4);
  const double swap_err = max_abs(m.data_state().matrix() - DensityMatrix::basis(4, 2).matrix());
  return {{"universal", "euler round trip", euler, 1e-10},
          {"universal", "sqrt-swap CNOT construction", cnot_err, 1e-10},
          {"universal", "exchange at pi/4 swaps |01> and |10>", swap_err, 1e-12}};
}

/// Modules: linalg, lmr, gadgets, jordan_lie, applications, tomography, universal.
inline std::vector<SelftestCheck> run_selftest(const std::vector<std::string>& modules) {
  std::vector<SelftestCheck> out;
  for (const auto& m : modules) {
    std::vector<SelftestCheck> part;
    if (m == "linalg") part = selftest_linalg();
    else if (m == "lmr") part = selftest_lmr();
    else if (m == "gadgets") part = selftest_gadgets();
    else if (m == "jordan_lie") part = selftest_jordan_lie();
    else if (m == "applications") part = selftest_applications();
    else if (m == "tomography") part = selftest_tomography();
    else if (m == "universal") part = selftest_universal();
    else require(false, "selftest: unknown module \"" + m + "\"");
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

}  // namespace dmexp
