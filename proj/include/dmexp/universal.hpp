#pragma once

// Chain of data qubits driven only by Heisenberg exchange pulses, with
// single-qubit rotations synthesized by LMR from a stream of |0> / |+>
// resource qubits loaded into q_*, which sits next to chain position 0.
//
// Physical layout of the state: factor 0 is q_*, factor p + 1 is chain
// position p. Logical qubit labels move along the chain as SWAPs are applied.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "dmexp/lmr.hpp"

namespace dmexp {

enum class Axis { z, x };

inline const char* to_string(Axis a) { return a == Axis::z ? "z" : "x"; }

/// |0><0| for Z, |+><+| for X.
inline ComplexMatrix resource_projector(Axis a) {
  return a == Axis::z ? PureState::basis(2, 0).projector() : PureState::plus().projector();
}

/// X_phi = cos(phi/2) 1 + i sin(phi/2) X
inline ComplexMatrix x_rotation(double phi) {
  return std::cos(phi / 2) * identity(2) + kI * std::sin(phi / 2) * pauli::x();
}

/// Z_theta = cos(theta/2) 1 + i sin(theta/2) Z
inline ComplexMatrix z_rotation(double theta) {
  return std::cos(theta / 2) * identity(2) + kI * std::sin(theta / 2) * pauli::z();
}

inline double wrap_two_pi(double a) {
  double r = std::fmod(a, 2 * std::numbers::pi);
  if (r < 0) r += 2 * std::numbers::pi;
  if (r >= 2 * std::numbers::pi) r = 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Euler decomposition u = e^{i gamma} X_phi Z_theta X_xi

struct EulerAngles {
  double phi = 0.0;
  double theta = 0.0;
  double xi = 0.0;
  double global_phase = 0.0;
};

inline ComplexMatrix euler_matrix(const EulerAngles& e) {
  return std::exp(kI * e.global_phase) * x_rotation(e.phi) * z_rotation(e.theta) * x_rotation(e.xi);
}

namespace detail {

inline EulerAngles with_phase(double phi, double theta, double xi, const ComplexMatrix& u) {
  EulerAngles e{wrap_two_pi(phi), wrap_two_pi(theta), wrap_two_pi(xi), 0.0};
  e.global_phase = std::arg((euler_matrix(e).adjoint() * u).trace());
  return e;
}

}  // namespace detail

/// theta, phi in [0, 2pi). Among the two equivalent branches the one with the
/// smaller phi + xi wins; an X-rotation comes back with xi = 0.
inline EulerAngles euler_decompose(const ComplexMatrix& u) {
  require(u.rows() == 2 && u.cols() == 2, "euler_decompose: need a 2x2 matrix");
  require(all_finite(u) && is_unitary(u), "euler_decompose: matrix is not unitary");
  // H u H = Z_phi X_theta Z_xi; normalize to SU(2) up to sign
  const ComplexMatrix h = pauli::hadamard();
  ComplexMatrix w = h * u * h;
  w /= std::sqrt(w.determinant());
  const double theta = 2 * std::atan2(std::abs(w(1, 0)), std::abs(w(0, 0)));
  constexpr double tiny = 1e-13;
  double phi = 0.0, xi = 0.0;
  if (std::abs(w(1, 0)) < tiny) {
    phi = 2 * std::arg(w(0, 0));
  } else if (std::abs(w(0, 0)) < tiny) {
    phi = -2 * (std::arg(w(1, 0)) - std::numbers::pi / 2);
  } else {
    const double sum = 2 * std::arg(w(0, 0));
    const double diff = 2 * (std::arg(w(1, 0)) - std::numbers::pi / 2);
    phi = (sum - diff) / 2;
    xi = (sum + diff) / 2;
  }
  // X_{phi+pi} Z_{2pi-theta} X_{xi-pi} is the same gate up to phase
  const EulerAngles a = detail::with_phase(phi, theta, xi, u);
  const EulerAngles b = detail::with_phase(phi + std::numbers::pi, 2 * std::numbers::pi - theta, xi - std::numbers::pi, u);
  const double sa = a.phi + a.xi, sb = b.phi + b.xi;
  if (std::abs(sa - sb) > 1e-12) return sa < sb ? a : b;
  return a.xi <= b.xi ? a : b;
}

// ---------------------------------------------------------------------------
// gate log

struct Pulse {
  enum class Kind { exchange, load };
  Kind kind;
  int site_a;    // physical site: 0 is q_*, p + 1 is chain position p
  int site_b;    // exchange partner, -1 for loads
  double time;   // exchange time, 0 for loads
  Axis resource;

  bool operator==(const Pulse&) const = default;
};

struct PulseBlock {
  std::vector<Pulse> body;
  long repeat;
};

struct RotationRequest {
  int qubit;
  Axis axis;
  double angle;  // of e^{-i angle P}
  double delta;
  std::optional<long> steps;  // overrides the budget
};

class ChainMachine {
 public:
  static constexpr int resource = -1;  // label of q_*

  explicit ChainMachine(int n_qubits, double depolarize = 0.0)
      : ChainMachine(n_qubits, DensityMatrix::basis(Index{1} << std::clamp(n_qubits, 0, 10), 0), depolarize) {}

  /// data is given in logical order, qubit 0 most significant.
  ChainMachine(int n_qubits, const DensityMatrix& data, double depolarize = 0.0)
      : n_(n_qubits), depolarize_(depolarize), state_(DensityMatrix::basis(2, 0)) {
    require(n_qubits >= 1 && n_qubits <= 10, "ChainMachine: need 1 to 10 data qubits");
    require(depolarize >= 0.0 && depolarize < 1.0, "ChainMachine: depolarize must lie in [0, 1)");
    require(data.dim() == (Index{1} << n_qubits), "ChainMachine: data state has dim " + std::to_string(data.dim()) +
                                                      ", need " + std::to_string(Index{1} << n_qubits));
    state_ = DensityMatrix::from_matrix(kron(DensityMatrix::basis(2, 0).matrix(), data.matrix()));
    for (int q = 0; q < n_; ++q) {
      position_.push_back(q);
      qubit_at_.push_back(q);
    }
  }

  int n_qubits() const { return n_; }
  double depolarize() const { return depolarize_; }
  const DensityMatrix& state() const { return state_; }
  const std::vector<PulseBlock>& gate_log() const { return log_; }
  long resources_zero() const { return zero_used_; }
  long resources_plus() const { return plus_used_; }
  long exchange_pulses() const { return pulses_; }
  double global_phase() const { return phase_; }

  int position_of(int qubit) const {
    if (qubit == resource) return -1;
    require(qubit >= 0 && qubit < n_, "ChainMachine: no qubit " + std::to_string(qubit));
    return position_[static_cast<std::size_t>(qubit)];
  }

  int qubit_at(int position) const {
    require(position >= 0 && position < n_, "ChainMachine: no position " + std::to_string(position));
    return qubit_at_[static_cast<std::size_t>(position)];
  }

  /// Data register with q_* traced out, factors in logical order.
  DensityMatrix data_state() const {
    const ComplexMatrix positional = partial_trace(state_.matrix(), {2, Index{1} << n_}, 0);
    const std::vector<Index> dims(static_cast<std::size_t>(n_), 2);
    std::vector<std::size_t> perm(dims.size());
    for (std::size_t p = 0; p < perm.size(); ++p) perm[p] = static_cast<std::size_t>(qubit_at_[p]);
    const ComplexMatrix u = permute_subsystems(dims, perm);
    return DensityMatrix::from_matrix(hermitian_part(u * positional * u.adjoint()));
  }

  /// e^{-itH} with H = XX + YY + ZZ = 2S - 1 on a chain-adjacent pair.
  void exchange_evolution(int i, int j, double t) {
    require(std::isfinite(t), "exchange_evolution: non-finite time");
    const int a = position_of(i), b = position_of(j);
    require(std::abs(a - b) == 1, "exchange_evolution: qubits " + label(i) + " and " + label(j) +
                                      " are not adjacent in the chain");
    apply_exchange(std::min(a, b) + 1, t);
  }

  /// Full SWAPs toward to_position; returns the number applied.
  int route(int qubit, int to_position) {
    int pos = position_of(qubit);
    require(qubit != resource, "route: q_* does not move");
    require(to_position >= 0 && to_position < n_, "route: no position " + std::to_string(to_position));
    int swaps = 0;
    while (pos != to_position) {
      const int next = pos < to_position ? pos + 1 : pos - 1;
      apply_exchange(std::min(pos, next) + 1, std::numbers::pi / 4);
      const int other = qubit_at_[static_cast<std::size_t>(next)];
      std::swap(qubit_at_[static_cast<std::size_t>(pos)], qubit_at_[static_cast<std::size_t>(next)]);
      position_[static_cast<std::size_t>(qubit)] = next;
      position_[static_cast<std::size_t>(other)] = pos;
      pos = next;
      ++swaps;
    }
    return swaps;
  }

  /// e^{-i angle P} on the qubit at position 0, one resource per LMR step.
  /// Returns the number of resources consumed.
  long resource_rotation(const RotationRequest& req) {
    require(std::isfinite(req.angle), "resource_rotation: non-finite angle");
    require(position_of(req.qubit) == 0 && req.qubit != resource,
            "resource_rotation: qubit " + label(req.qubit) + " is not at chain position 0");
    // e^{-2 pi i P} = 1, so take the representative closest to 0
    double angle = wrap_two_pi(req.angle);
    if (angle > std::numbers::pi) angle -= 2 * std::numbers::pi;
    // a depolarized resource rotates (1 - p) times slower
    const double time = angle / (1.0 - depolarize_);
    const LmrConfig cfg{.t = std::abs(time), .delta = req.delta, .n_override = req.steps};
    const long n = sample_budget(cfg);
    const double step = time / static_cast<double>(n);
    detail::check_step(step, "resource_rotation");

    const ComplexMatrix p =
        (1.0 - depolarize_) * resource_projector(req.axis) + (depolarize_ / 2) * identity(2);
    const Index rest = Index{1} << (n_ - 1);
    ComplexMatrix data = partial_trace(state_.matrix(), {2, Index{1} << n_}, 0);
    const double c = std::cos(step), s = std::sin(step);
    for (long k = 0; k + 1 < n; ++k) data = detail::lmr_step_raw(data, p, rest, c, s);
    // last step kept on the full register so q_* holds the spent resource
    state_ = DensityMatrix::from_matrix(kron(p, data));
    apply_exchange_raw(0, step / 2);

    phase_ += step / 2 * static_cast<double>(n);
    pulses_ += n;
    (req.axis == Axis::z ? zero_used_ : plus_used_) += n;
    append({{Pulse::Kind::load, 0, -1, 0.0, req.axis}, {Pulse::Kind::exchange, 0, 1, step / 2, req.axis}}, n);
    return n;
  }

 private:
  std::string label(int q) const { return q == resource ? std::string("q*") : std::to_string(q); }

  void apply_exchange_raw(int site, double t) {
    // e^{-itH} = e^{it} e^{-2itS}
    const ComplexMatrix pair = std::cos(2 * t) * identity(4) - kI * std::sin(2 * t) * swap_operator(2);
    const Index before = Index{1} << site;
    const Index after = Index{1} << (n_ - 1 - site);
    ComplexMatrix u = kron_all({identity(before), pair, identity(after)});
    state_ = DensityMatrix::from_matrix(hermitian_part(conjugate(u, state_.matrix())));
  }

  void apply_exchange(int site, double t) {
    apply_exchange_raw(site, t);
    phase_ += t;
    pulses_ += 1;
    append({{Pulse::Kind::exchange, site, site + 1, t, Axis::z}}, 1);
  }

  void append(std::vector<Pulse> body, long repeat) {
    if (!log_.empty() && log_.back().body == body) {
      log_.back().repeat += repeat;
    } else {
      log_.push_back({std::move(body), repeat});
    }
  }

  int n_;
  double depolarize_;
  DensityMatrix state_;
  std::vector<int> position_;   // by qubit
  std::vector<int> qubit_at_;   // by position
  std::vector<PulseBlock> log_;
  long zero_used_ = 0;
  long plus_used_ = 0;
  long pulses_ = 0;
  double phase_ = 0.0;
};

// ---------------------------------------------------------------------------
// circuits

struct CircuitGate {
  enum class Kind { unitary, cnot };
  Kind kind;
  int q = 0;
  ComplexMatrix u;
  int control = 0;
  int target = 0;

  static CircuitGate single(int q, ComplexMatrix u) { return {Kind::unitary, q, std::move(u), 0, 0}; }
  static CircuitGate cnot(int c, int t) { return {Kind::cnot, 0, ComplexMatrix(), c, t}; }
};

using Circuit = std::vector<CircuitGate>;

inline void validate_circuit(int n_qubits, const Circuit& circuit) {
  for (std::size_t g = 0; g < circuit.size(); ++g) {
    const auto& gate = circuit[g];
    const std::string where = "circuit gate " + std::to_string(g);
    if (gate.kind == CircuitGate::Kind::unitary) {
      require(gate.q >= 0 && gate.q < n_qubits, where + ": qubit out of range");
      require(gate.u.rows() == 2 && gate.u.cols() == 2 && all_finite(gate.u) && is_unitary(gate.u),
              where + ": matrix is not a 2x2 unitary");
    } else {
      require(gate.control >= 0 && gate.control < n_qubits && gate.target >= 0 && gate.target < n_qubits,
              where + ": qubit out of range");
      require(gate.control != gate.target, where + ": control equals target");
    }
  }
}

/// The circuit's unitary on n qubits, qubit 0 most significant.
inline ComplexMatrix ideal_circuit(int n_qubits, const Circuit& circuit) {
  validate_circuit(n_qubits, circuit);
  const Index dim = Index{1} << n_qubits;
  ComplexMatrix total = identity(dim);
  for (const auto& gate : circuit) {
    ComplexMatrix g;
    if (gate.kind == CircuitGate::Kind::unitary) {
      g = kron_all({identity(Index{1} << gate.q), gate.u, identity(Index{1} << (n_qubits - gate.q - 1))});
    } else {
      g = ComplexMatrix::Zero(dim, dim);
      const Index cbit = Index{1} << (n_qubits - 1 - gate.control);
      const Index tbit = Index{1} << (n_qubits - 1 - gate.target);
      for (Index k = 0; k < dim; ++k) g((k & cbit) ? (k ^ tbit) : k, k) = 1.0;
    }
    total = g * total;
  }
  return total;
}

struct CostReport {
  long single_qubit_gates = 0;
  long cnots = 0;
  long exchange_pulses = 0;  // including those inside resource rotations
  long swaps = 0;
  long resource_zero = 0;
  long resource_plus = 0;
  int n_qubits = 0;

  long resources() const { return resource_zero + resource_plus; }
  /// N (M + M')^2
  double predicted_shape() const {
    const double m = static_cast<double>(single_qubit_gates + cnots);
    return n_qubits * m * m;
  }
};

struct CircuitRun {
  DensityMatrix state;  // data register, logical order
  CostReport cost;
};

namespace detail {

struct PlannedRotation {
  Axis axis;
  double angle;  // of e^{-i angle P}
};

/// Resource rotations for u in application order; X_a is e^{-i(-a)|+><+|} up to phase.
inline std::vector<PlannedRotation> plan_rotations(const ComplexMatrix& u) {
  const EulerAngles e = euler_decompose(u);
  std::vector<PlannedRotation> out;
  const PlannedRotation all[3] = {{Axis::x, wrap_two_pi(-e.xi)}, {Axis::z, wrap_two_pi(-e.theta)},
                                  {Axis::x, wrap_two_pi(-e.phi)}};
  for (const auto& r : all) {
    const double away = std::min(r.angle, 2 * std::numbers::pi - r.angle);
    if (away > 1e-12) out.push_back(r);
  }
  return out;
}

inline void apply_single(ChainMachine& m, CostReport& cost, int q, const std::vector<PlannedRotation>& plan,
                         double delta) {
  if (plan.empty()) return;
  cost.swaps += m.route(q, 0);
  for (const auto& r : plan) m.resource_rotation({q, r.axis, r.angle, delta, std::nullopt});
}

}  // namespace detail

/// CNOT from two sqrt(SWAP) pulses: H_t, V, Z_c, V, S_c, (H S^dag)_t with
/// V = e^{-i pi S / 4}, i.e. exchange for t = pi/8.
inline const std::vector<std::pair<bool, ComplexMatrix>>& cnot_single_gates() {
  static const std::vector<std::pair<bool, ComplexMatrix>> gates = [] {
    ComplexMatrix s = ComplexMatrix::Zero(2, 2);
    s(0, 0) = 1.0;
    s(1, 1) = kI;
    // (on_control, gate) in order; the pulses sit after entries 0 and 1
    return std::vector<std::pair<bool, ComplexMatrix>>{
        {false, pauli::hadamard()}, {true, pauli::z()}, {true, s}, {false, pauli::hadamard() * s.adjoint()}};
  }();
  return gates;
}

/// Unitary of the exchange-based CNOT construction on (control, target), exact.
inline ComplexMatrix cnot_construction() {
  const auto& g = cnot_single_gates();
  const ComplexMatrix v = std::cos(std::numbers::pi / 4) * identity(4) - kI * std::sin(std::numbers::pi / 4) *
                                                                              swap_operator(2);
  auto on = [](bool control, const ComplexMatrix& u) { return control ? kron(u, identity(2)) : kron(identity(2), u); };
  return on(g[3].first, g[3].second) * on(g[2].first, g[2].second) * v * on(g[1].first, g[1].second) * v *
         on(g[0].first, g[0].second);
}

inline CircuitRun run_circuit(ChainMachine& machine, const Circuit& circuit, double per_gate_delta) {
  require(per_gate_delta > 0.0 && per_gate_delta <= 1.0, "run_circuit: per_gate_delta must lie in (0, 1]");
  validate_circuit(machine.n_qubits(), circuit);
  CostReport cost;
  cost.n_qubits = machine.n_qubits();
  const long pulses0 = machine.exchange_pulses();
  const long zero0 = machine.resources_zero(), plus0 = machine.resources_plus();

  for (const auto& gate : circuit) {
    if (gate.kind == CircuitGate::Kind::unitary) {
      ++cost.single_qubit_gates;
      const auto plan = detail::plan_rotations(gate.u);
      if (plan.empty()) continue;
      detail::apply_single(machine, cost, gate.q, plan, per_gate_delta / static_cast<double>(plan.size()));
      continue;
    }
    ++cost.cnots;
    const int c = gate.control, t = gate.target;
    const auto& singles = cnot_single_gates();
    std::vector<std::vector<detail::PlannedRotation>> plans;
    std::size_t rotations = 0;
    for (const auto& s : singles) {
      plans.push_back(detail::plan_rotations(s.second));
      rotations += plans.back().size();
    }
    const double delta = per_gate_delta / static_cast<double>(rotations);
    auto single = [&](std::size_t k) { detail::apply_single(machine, cost, singles[k].first ? c : t, plans[k], delta); };
    auto pulse = [&] {
      // bring the pair together: c next to t, whichever side is free
      const int pt = machine.position_of(t);
      const int pc = machine.position_of(c);
      if (std::abs(pt - pc) != 1) cost.swaps += machine.route(c, pt + (pc > pt ? 1 : -1));
      machine.exchange_evolution(c, t, std::numbers::pi / 8);
    };
    single(0);
    pulse();
    single(1);
    pulse();
    single(2);
    single(3);
  }

  cost.exchange_pulses = machine.exchange_pulses() - pulses0;
  cost.resource_zero = machine.resources_zero() - zero0;
  cost.resource_plus = machine.resources_plus() - plus0;
  return {machine.data_state(), cost};
}

}  // namespace dmexp
