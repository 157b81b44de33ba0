// Acceptance gate: one PASS/FAIL line per criterion, exit 1 if any fails.
// Every oracle here is rebuilt from plain matrix algebra in this file rather
// than taken from the library routine under test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "dmexp/dmexp.hpp"

using namespace dmexp;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
  bool pass;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Tr_A of an (a*b)-dim matrix, by explicit index sums
ComplexMatrix trace_first(const ComplexMatrix& m, Index a, Index b) {
  ComplexMatrix out = ComplexMatrix::Zero(b, b);
  for (Index i = 0; i < a; ++i)
    for (Index r = 0; r < b; ++r)
      for (Index c = 0; c < b; ++c) out(r, c) += m(i * b + r, i * b + c);
  return out;
}

ComplexMatrix product(const std::vector<DensityMatrix>& states, const std::vector<int>& idx) {
  ComplexMatrix p = ComplexMatrix::Identity(states[0].dim(), states[0].dim());
  for (int i : idx) p = p * states[static_cast<std::size_t>(i - 1)].matrix();
  return p;
}

Outcome step_identity() {
  CounterRng rng(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    // rho on A; sigma on A alone (dim 2) or on A x B (dim 4)
    const Index dim = trial < 25 ? 2 : 4;
    const Index a = 2, b = dim / a;
    const auto rho = random_state(a, 1 + trial % 2, rng);
    const auto sigma = random_state(dim, 1 + trial % static_cast<int>(dim), rng);
    const double delta = 2.0 * (rng.uniform() - 0.5);
    const ComplexMatrix r = kron(rho.matrix(), ComplexMatrix::Identity(b, b));
    const ComplexMatrix s = sigma.matrix();
    const double cs = std::cos(delta), sn = std::sin(delta);
    const ComplexMatrix expect = cs * cs * s - kI * sn * cs * (r * s - s * r) +
                                 sn * sn * kron(rho.matrix(), trace_first(s, a, b));
    worst = std::max(worst, max_abs(lmr_step(sigma, rho, delta).matrix() - expect));
  }
  return {worst <= 1e-12, fmt("max deviation %.2e (tol 1e-12)", worst)};
}

Outcome convergence() {
  const auto plus = DensityMatrix::pure(PureState::plus());
  const auto rho = DensityMatrix::basis(2, 0);
  const double t = pi;
  // e^{-i pi |0><0|} = diag(-1, 1) maps |+> to |->
  const auto ideal = DensityMatrix::pure(PureState::minus());
  std::vector<double> ns, errs;
  for (long n = 16; n <= 1024; n *= 2) {
    ns.push_back(static_cast<double>(n));
    errs.push_back(trace_distance(lmr_simulate(plus, rho, {.t = t, .n_override = n}).state, ideal));
  }
  const double slope = loglog_slope(ns, errs);
  bool pass = std::abs(slope + 1.0) <= 0.1;
  std::string detail = fmt("slope %.4f (want -1 +- 0.1)", slope);
  for (double delta : {0.1, 0.01}) {
    const long n = static_cast<long>(std::ceil(4.0 * t * t / delta));
    const auto run = lmr_simulate(plus, rho, {.t = t, .delta = delta});
    const double err = trace_distance(run.state, ideal);
    pass = pass && run.steps == n && err <= delta;
    detail += fmt("; delta %g: n=%.0f err %.4g", delta, static_cast<double>(run.steps), err);
  }
  return {pass, detail};
}

Outcome discrimination() {
  const auto ideal = discriminate({.x = 0.5, .epsilon = 0.5, .trials = 1000, .seed = 3001}, Protocol::ideal);
  const int trials = 1000;
  const auto lmr = discriminate({.x = 0.5, .epsilon = 0.5, .trials = trials, .seed = 3002}, Protocol::lmr,
                                {.delta = 1.0 / 3.0});
  const double floor = 2.0 / 3.0 - 3.0 * std::sqrt(2.0 / 9.0 / trials);
  return {ideal.success_rate == 1.0 && lmr.success_rate >= floor,
          fmt("ideal %.4f (want 1); lmr %.4f (want >= %.4f)", ideal.success_rate, lmr.success_rate, floor)};
}

Outcome controlled_phase() {
  const auto rho = DensityMatrix::qubit_diagonal(0.8);
  const auto est = phase_estimate(rho, {.precision = 0.05, .protocol = Protocol::lmr, .seed = 4001},
                                  PureState::basis(2, 0));
  const double err = std::abs(est.eigenvalues.at(0) - 0.8);
  std::vector<double> eps, steps;
  for (double e : {0.2, 0.1, 0.05}) {
    const auto r = phase_estimate(rho, {.precision = e, .protocol = Protocol::lmr, .seed = 4002},
                                  PureState::basis(2, 0));
    eps.push_back(e);
    steps.push_back(static_cast<double>(r.lmr_steps));
  }
  const double slope = loglog_slope(eps, steps);
  return {err <= 0.05 && std::abs(slope + 2.0) <= 0.3,
          fmt("estimate %.4f (want 0.8 +- 0.05); step exponent %.3f (want -2 +- 0.3)", est.eigenvalues.at(0), slope)};
}

Outcome gadget_blocks() {
  CounterRng rng(5001);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 2 + trial % 3;
    const Index d = 2 + (trial / 3) % 2;
    std::vector<DensityMatrix> states;
    std::vector<int> fwd, rev;
    for (int i = 0; i < k; ++i) {
      states.push_back(random_state(d, 1 + rng.below(static_cast<std::uint64_t>(d)), rng));
      fwd.push_back(i + 1);
      rev.push_back(k - i);
    }
    const double phi = 2.0 * pi * rng.uniform();
    const ComplexMatrix expect =
        0.5 * (std::exp(kI * phi) * product(states, fwd) + std::exp(-kI * phi) * product(states, rev));
    const auto pair = k == 2 ? commutator_gadget(states[0], states[1], phi) : polynomial_gadget(states, phi);
    worst = std::max(worst, max_abs(pair.plus() - pair.minus() - expect));
  }
  return {worst <= 1e-12, fmt("max deviation %.2e over 100 instances (tol 1e-12)", worst)};
}

Outcome polynomial_oracle() {
  CounterRng rng(6001);
  const double delta = 0.02, t = 1.0;
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<DensityMatrix> states;
    for (int i = 0; i < 3; ++i) states.push_back(random_state(2, 1 + rng.below(2), rng));
    std::vector<PolynomialTerm> terms;
    ComplexMatrix h = ComplexMatrix::Zero(2, 2);
    for (int j = 0; j < 2; ++j) {
      PolynomialTerm term;
      const int len = 2 + static_cast<int>(rng.below(2));
      for (int i = 0; i < len; ++i) term.indices.push_back(1 + static_cast<int>(rng.below(3)));
      term.phase = 2.0 * pi * rng.uniform();
      term.coeff = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.25 + 0.75 * rng.uniform());
      const ComplexMatrix p = std::exp(kI * term.phase) * product(states, term.indices);
      h += term.coeff * 0.5 * (p + p.adjoint());
      terms.push_back(term);
    }
    const HermitianPolynomial poly(3, terms);
    const auto sigma = random_state(2, 1, rng);
    const auto run = simulate_polynomial(sigma, poly, states, {.t = t, .delta = delta}, SamplingMode::exact,
                                         rng.substream(static_cast<std::uint64_t>(trial)));
    const ComplexMatrix u = herm_exp(h, t);
    const auto expect = DensityMatrix::from_matrix(hermitian_part(u * sigma.matrix() * u.adjoint()));
    worst = std::max(worst, trace_distance(run.state, expect));
  }
  return {worst <= delta, fmt("worst trace distance %.4g (want <= %.2g)", worst, delta)};
}

Outcome jordan_lie_round_trip() {
  CounterRng rng(7001);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 1 + static_cast<int>(rng.below(4));
    const Index d = 2 + static_cast<Index>(rng.below(2));
    std::vector<DensityMatrix> states;
    for (int i = 0; i < k; ++i) states.push_back(random_state(d, 1 + rng.below(static_cast<std::uint64_t>(d)), rng));
    std::vector<int> r;
    const int len = 1 + static_cast<int>(rng.below(4));
    for (int i = 0; i < len; ++i) r.push_back(1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(k))));
    const Complex z(rng.normal(), rng.normal());
    const ComplexMatrix zp = z * product(states, r);
    worst = std::max(worst, max_abs(eval_jordan_lie(jordan_lie_expand(r, z), states) - (zp + zp.adjoint())));
  }
  return {worst <= 1e-10, fmt("max deviation %.2e over 50 cases (tol 1e-10)", worst)};
}

Outcome state_addition() {
  const double delta = 0.01;
  const auto zero = PureState::basis(2, 0);
  const auto plus = PureState::plus();
  const double d = std::acos(std::abs(zero.inner(plus)));
  ComplexVector sum = zero.amplitudes() + plus.amplitudes();
  const auto target = PureState::normalized(sum);
  const LmrConfig budget{.delta = delta};
  const double mid = fidelity(target, add_states(zero, plus, d / 2, Protocol::lmr, budget).state);
  const double start = fidelity(zero, add_states(zero, plus, 0.0, Protocol::lmr, budget).state);
  const double end = fidelity(plus, add_states(zero, plus, d, Protocol::lmr, budget).state);
  const bool pass = mid >= 1 - delta && start >= 1 - delta && end >= 1 - delta;
  return {pass, fmt("fidelity at D/2 %.6f, at 0 %.6f, at D %.6f (want >= 0.99)", mid, start, end)};
}

Outcome orthogonality() {
  CounterRng rng(9001);
  int misreported = 0;
  for (int run = 0; run < 500; ++run) {
    // random orthogonal pair in dim 2 or 3
    const Index d = 2 + run % 2;
    const auto a = random_pure_state(d, rng);
    ComplexVector v = random_pure_state(d, rng).amplitudes();
    v -= a.amplitudes().dot(v) * a.amplitudes();
    const auto b = PureState::normalized(v);
    misreported += orthogonality_test(a, b, 0.5, 0.05, Protocol::ideal, 9100 + run).verdict !=
                   OrthogonalityVerdict::orthogonal;
  }
  int detected = 0;
  const auto zero = PureState::basis(2, 0);
  const auto plus = PureState::plus();
  for (int run = 0; run < 200; ++run) {
    detected += orthogonality_test(zero, plus, 0.5, 0.05, Protocol::lmr, 9700 + run).verdict ==
                OrthogonalityVerdict::overlapping;
  }
  return {misreported == 0 && detected >= 180,
          fmt("orthogonal misreported %.0f/500 (want 0); overlap detected %.0f/200 (want >= 180)", misreported,
              detected)};
}

Outcome grover() {
  const double w = 0.25;
  const ComplexMatrix target = DensityMatrix::basis(4, 3).matrix();
  const GroverTask task{.target_projector = target, .w = w, .state_budget_delta = std::sqrt(w) / 10.0};
  GroverSearch marked(task, PureState::plus().tensor(PureState::plus()), Protocol::lmr);
  GroverSearch empty(task, PureState::basis(4, 0), Protocol::lmr);
  int found = 0, false_hits = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    found += marked.run(10000 + s).verdict == SearchVerdict::found;
    false_hits += empty.run(20000 + s).verdict == SearchVerdict::found;
  }
  return {found >= 180 && false_hits == 0,
          fmt("lambda=1/4 found %.0f/200 (want >= 180); lambda=0 found %.0f/200 (want 0)", found, false_hits)};
}

Outcome universality() {
  // rotation error vs resources consumed
  std::vector<double> used, errs;
  const auto start = DensityMatrix::pure(PureState::plus());
  const ComplexMatrix zproj = DensityMatrix::basis(2, 0).matrix();
  const ComplexMatrix u = herm_exp(zproj, pi / 2);
  const auto expect = DensityMatrix::from_matrix(hermitian_part(u * start.matrix() * u.adjoint()));
  for (long n : {16L, 32L, 64L, 128L, 256L}) {
    ChainMachine m(1, start);
    m.resource_rotation({0, Axis::z, pi / 2, 0.1, n});
    used.push_back(static_cast<double>(m.resources_zero() + m.resources_plus()));
    errs.push_back(trace_distance(m.data_state(), expect));
  }
  const double slope = loglog_slope(used, errs);

  ChainMachine bell_machine(2);
  const auto bell = run_circuit(bell_machine, {CircuitGate::single(0, pauli::hadamard()), CircuitGate::cnot(0, 1)},
                                0.002);
  ComplexVector phi = ComplexVector::Zero(4);
  phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
  const double fid = fidelity(PureState::from_amplitudes(phi), bell.state);

  // fixed total error spread over M + M' gates on two qubits
  std::vector<double> ratios;
  for (int gates : {2, 4, 8}) {
    Circuit c;
    for (int g = 0; g < gates; ++g) {
      c.push_back(g % 2 == 0 ? CircuitGate::single(g % 4 == 0 ? 0 : 1, pauli::hadamard()) : CircuitGate::cnot(0, 1));
    }
    ChainMachine m(2);
    const auto run = run_circuit(m, c, 0.2 / gates);
    ratios.push_back(static_cast<double>(run.cost.resources()) / (static_cast<double>(gates) * gates));
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  const double spread = *hi / *lo;
  return {std::abs(slope + 1.0) <= 0.15 && fid >= 0.98 && spread <= 3.0,
          fmt("rotation slope %.4f (want -1 +- 0.15); Bell fidelity %.5f (want >= 0.98); ", slope, fid) +
              fmt("resources/(M+M')^2 spread %.3f (want <= 3)", spread)};
}

Outcome diamond_closed_form() {
  CounterRng rng(12001);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double eps = 0.05 + rng.uniform();
    const double t = (pi / 2) / eps * (trial == 0 ? 1.0 : rng.uniform());
    const double et = eps * t;
    ComplexMatrix v = ComplexMatrix::Zero(2, 2);
    v(0, 0) = std::exp(-kI * et);
    v(1, 1) = std::exp(kI * et);
    worst = std::max(worst, std::abs(unitary_diamond_distance(identity(2), v) - std::sin(et)));
  }
  return {worst <= 1e-10, fmt("max deviation %.2e over 20 pairs (tol 1e-10)", worst)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "LMR step identity", 1, step_identity},
      {2, "LMR convergence", 10, convergence},
      {3, "discrimination", 30, discrimination},
      {4, "controlled LMR phase estimation", 60, controlled_phase},
      {5, "gadget block identities", 5, gadget_blocks},
      {6, "polynomial simulation oracle", 60, polynomial_oracle},
      {7, "Jordan-Lie round trip", 5, jordan_lie_round_trip},
      {8, "state addition", 10, state_addition},
      {9, "orthogonality testing", 60, orthogonality},
      {10, "sample-based Grover", 60, grover},
      {11, "universality", 120, universality},
      {12, "diamond distance closed form", 1, diamond_closed_form},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto begin = std::chrono::steady_clock::now();
    Outcome out{false, ""};
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
    const bool pass = out.pass && secs < c.limit_s;
    failed += pass ? 0 : 1;
    std::printf("%s  %2d %-34s %s; %.2fs (limit %.0fs)\n", pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str(),
                secs, c.limit_s);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
