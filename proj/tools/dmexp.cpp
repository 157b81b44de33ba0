// dmexp: seeded experiment runner.
//
// Exit codes: 0 success, 2 invalid input (error JSON on stderr), 3 the run
// finished but its acceptance check failed (the report is still written).

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dmexp/dmexp.hpp"

using namespace dmexp;
using ojson = nlohmann::ordered_json;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitCheckFailed = 3;

struct Common {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
  bool selftest = false;
  bool wall_time = false;
};

struct Command {
  std::string name;
  bool stochastic;
  std::vector<std::string> selftest_modules;
  std::function<Report(const Common&)> run;
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  return s.substr(a, s.find_last_not_of(" \t") - a + 1);
}

double parse_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used > 0 && used == s.size() && std::isfinite(v), what + ": \"" + s + "\" is not a finite number");
  return v;
}

/// "a,b,c" or "a,b,...,c"; the ellipsis continues geometrically with ratio b/a.
std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<std::string> tokens;
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');) tokens.push_back(trim(tok));
  require(!tokens.empty(), what + ": empty list");
  std::vector<double> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] != "...") {
      out.push_back(parse_double(tokens[i], what));
      continue;
    }
    require(i == 2 && tokens.size() == 4, what + ": use the form a,b,...,c");
    const double a = out[0], b = out[1], c = parse_double(tokens[3], what);
    require(a > 0 && b > a && c >= b, what + ": a,b,...,c needs 0 < a < b <= c");
    const double ratio = b / a;
    for (double x = b * ratio; x <= c * (1 + 1e-12); x *= ratio) out.push_back(std::round(x * 1e9) / 1e9);
    require(std::abs(out.back() - c) <= 1e-9 * c, what + ": " + tokens[3] + " is not reached by ratio " + format_double(ratio));
    break;
  }
  return out;
}

PureState parse_pure(const std::string& spec) {
  if (auto named = io::named_state(spec)) return *named;
  return io::pure_state_from_json(io::read_json_file(spec));
}

DensityMatrix parse_state(const std::string& spec) {
  if (auto named = io::named_state(spec)) return DensityMatrix::pure(*named);
  return io::state_from_json(io::read_json_file(spec));
}

Protocol protocol_of(const std::string& s) { return parse_protocol(s); }

std::uint64_t need_seed(const Common& c) { return c.seed.value(); }

std::uint64_t run_seed(std::uint64_t seed, std::size_t i) { return CounterRng(seed).substream(i).next_u64(); }

// ---------------------------------------------------------------------------
// subcommands

struct LmrConvergeArgs {
  int dim = 2;
  double t = std::numbers::pi;
  std::string ns = "16,32,...,1024";
  int rank_sigma = 1;
  int rank_rho = 1;
  std::string budget_deltas = "0.1,0.01";
  std::string sigma, rho;
};

Report lmr_converge(const LmrConvergeArgs& a, const Common& c) {
  require(a.dim >= 2 && a.dim <= 64, "--dim must lie in 2..64");
  require(a.rank_sigma >= 1 && a.rank_sigma <= a.dim && a.rank_rho >= 1 && a.rank_rho <= a.dim,
          "--rank-sigma and --rank-rho must lie in 1..dim");
  const auto ns = parse_list(a.ns, "--ns");
  const auto deltas = parse_list(a.budget_deltas, "--budget-deltas");
  for (double n : ns) require(n >= 1 && n == std::floor(n) && n <= 1e7, "--ns entries must be integers in 1..1e7");
  require(ns.size() >= 2, "--ns needs at least two entries");
  const CounterRng root(need_seed(c));
  CounterRng sigma_rng = root.substream(0), rho_rng = root.substream(1);
  const auto sigma = a.sigma.empty() ? random_state(a.dim, a.rank_sigma, sigma_rng) : parse_state(a.sigma);
  const auto rho = a.rho.empty() ? random_state(a.dim, a.rank_rho, rho_rng) : parse_state(a.rho);
  require(sigma.dim() == rho.dim(), "sigma and rho dims differ");
  const auto ideal = ideal_conjugation(rho.matrix(), a.t, sigma);

  Report r{.subcommand = "lmr-converge", .seed = c.seed};
  r.params = {{"dim", sigma.dim()}, {"t", a.t}, {"ns", a.ns}, {"rank_sigma", a.rank_sigma}, {"rank_rho", a.rank_rho}};
  r.columns = {"n", "trace_distance"};
  std::vector<double> err;
  for (double n : ns) {
    const auto run = lmr_simulate(sigma, rho, {.t = a.t, .delta = 1.0, .n_override = static_cast<long>(n)});
    err.push_back(trace_distance(run.state, ideal));
    r.add_row({static_cast<long>(n), err.back()});
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    lx.push_back(std::log(ns[i]));
    ly.push_back(std::log(std::max(err[i], 1e-300)));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i] / lx.size(), my += ly[i] / ly.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
  const double slope = sxy / sxx;
  r.summary["slope"] = slope;
  bool budget_ok = true;
  for (double d : deltas) {
    const LmrConfig cfg{.t = a.t, .delta = d};
    const double e = trace_distance(lmr_simulate(sigma, rho, cfg).state, ideal);
    r.summary["budget_n_delta_" + format_short(d)] = sample_budget(cfg);
    r.summary["budget_error_delta_" + format_short(d)] = e;
    budget_ok = budget_ok && e <= d;
  }
  r.criterion = "slope in [-1.1, -0.9] and error at ceil(4t^2/delta) <= delta";
  r.pass = std::abs(slope + 1.0) <= 0.1 && budget_ok;
  return r;
}

struct DiscriminateArgs {
  double x = 0.5;
  double eps = 0.5;
  double eta = 0.0;
  int trials = 1000;
  std::string protocol = "ideal";
  double delta = 0.01;
  std::optional<long> steps;
  double budget_constant = 4.0;
  std::optional<double> min_success;
};

Report discriminate_cmd(const DiscriminateArgs& a, const Common& c) {
  const DiscriminationTask task{.x = a.x, .epsilon = a.eps, .eta = a.eta, .trials = a.trials, .seed = need_seed(c)};
  const auto protocol = protocol_of(a.protocol);
  const auto res = discriminate(task, protocol, {.delta = a.delta, .budget_constant = a.budget_constant, .n_override = a.steps});
  Report r{.subcommand = "discriminate", .seed = c.seed};
  r.params = {{"x", a.x}, {"eps", a.eps}, {"eta", a.eta}, {"trials", a.trials}, {"protocol", a.protocol},
              {"delta", a.delta}, {"budget_constant", a.budget_constant}};
  if (a.steps) r.params["steps"] = *a.steps;
  r.columns = {"protocol", "x", "epsilon", "time", "steps", "trials", "successes", "success_rate",
               "p_correct_given_low", "p_correct_given_high"};
  r.add_row({a.protocol, a.x, a.eps, res.time, res.steps, res.trials, res.successes, res.success_rate,
             res.p_correct_given_low, res.p_correct_given_high});
  const double floor = a.min_success.value_or(2.0 / 3.0 - 3.0 * std::sqrt(2.0 / 9.0 / a.trials));
  r.criterion = "success_rate >= " + format_short(floor);
  r.pass = res.success_rate >= floor;
  return r;
}

struct PhaseArgs {
  std::optional<double> diag = 0.8;
  std::string state;
  double precision = 0.05;
  std::string protocol = "lmr";
  int shots = 96;
  int runs = 32;
  double budget_constant = 4.0;
  std::optional<double> per_use_delta;
  std::optional<int> eigenvector;
  std::string expect;
};

Report phase_cmd(const PhaseArgs& a, const Common& c) {
  const DensityMatrix rho = a.state.empty() ? DensityMatrix::qubit_diagonal(*a.diag) : parse_state(a.state);
  PhaseEstimationConfig cfg{.precision = a.precision, .protocol = protocol_of(a.protocol), .shots_per_round = a.shots,
                            .sampling_runs = a.runs, .budget_constant = a.budget_constant,
                            .per_use_delta = a.per_use_delta, .seed = need_seed(c)};
  std::optional<PureState> vec;
  if (a.eigenvector) {
    require(*a.eigenvector >= 0 && *a.eigenvector < rho.dim(), "--eigenvector must index a basis state");
    vec = PureState::basis(rho.dim(), *a.eigenvector);
  }
  const auto est = phase_estimate(rho, cfg, vec);
  Report r{.subcommand = "phase-est", .seed = c.seed};
  r.params = {{"state", a.state.empty() ? "diag " + format_double(*a.diag) : a.state}, {"precision", a.precision},
              {"protocol", a.protocol}, {"shots", a.shots}, {"runs", a.runs}, {"budget_constant", a.budget_constant}};
  if (a.per_use_delta) r.params["per_use_delta"] = *a.per_use_delta;
  if (a.eigenvector) r.params["eigenvector"] = *a.eigenvector;
  r.columns = {"eigenvalue", "support"};
  for (std::size_t i = 0; i < est.eigenvalues.size(); ++i) r.add_row({est.eigenvalues[i], est.support[i]});
  r.summary = {{"rounds", est.rounds}, {"steps_per_use", est.steps_per_use}, {"lmr_steps", est.lmr_steps},
               {"controlled_uses", est.controlled_uses}};
  if (!a.expect.empty()) {
    const auto expected = parse_list(a.expect, "--expect");
    bool ok = true;
    for (double e : expected) {
      bool hit = false;
      for (double v : est.eigenvalues) hit = hit || std::abs(v - e) <= a.precision;
      ok = ok && hit;
    }
    r.criterion = "every expected eigenvalue estimated within precision";
    r.pass = ok;
  }
  return r;
}

struct OrthoArgs {
  std::string psi1 = "0";
  std::string psi2 = "1";
  double w = 0.5;
  double eps = 0.01;
  std::string protocol = "ideal";
  int runs = 1;
  std::string expect;
};

Report ortho_cmd(const OrthoArgs& a, const Common& c) {
  require(a.runs >= 1, "--runs must be positive");
  require(a.expect.empty() || a.expect == "orthogonal" || a.expect == "overlapping",
          "--expect must be orthogonal or overlapping");
  const auto p1 = parse_pure(a.psi1), p2 = parse_pure(a.psi2);
  const auto protocol = protocol_of(a.protocol);
  Report r{.subcommand = "ortho-test", .seed = c.seed};
  r.params = {{"psi1", a.psi1}, {"psi2", a.psi2}, {"w", a.w}, {"eps", a.eps}, {"protocol", a.protocol}, {"runs", a.runs}};
  r.columns = {"run", "verdict", "minus_count", "shots", "threshold", "p_minus"};
  long overlapping = 0;
  OrthogonalityResult last{};
  for (int i = 0; i < a.runs; ++i) {
    last = orthogonality_test(p1, p2, a.w, a.eps, protocol, run_seed(need_seed(c), static_cast<std::size_t>(i)));
    overlapping += last.verdict == OrthogonalityVerdict::overlapping ? 1 : 0;
    r.add_row({i, to_string(last.verdict), last.minus_count, last.shots, last.threshold, last.p_minus});
  }
  const double frac = static_cast<double>(overlapping) / a.runs;
  r.summary = {{"overlap_squared", std::norm(p1.inner(p2))}, {"overlapping_fraction", frac}, {"time", last.time},
               {"p_min", last.p_min}, {"lmr_steps_per_run", last.lmr_steps}};
  if (a.expect == "orthogonal") {
    r.criterion = "no run reports overlapping";
    r.pass = overlapping == 0;
  } else if (a.expect == "overlapping") {
    r.criterion = "overlapping_fraction >= 0.9";
    r.pass = frac >= 0.9;
  }
  return r;
}

struct AddArgs {
  std::string psi1 = "0";
  std::string psi2 = "+";
  std::optional<double> chi;
  double chi_frac = 0.5;
  std::string protocol = "lmr";
  double delta = 0.01;
  double budget_constant = 4.0;
};

Report add_cmd(const AddArgs& a, const Common& c) {
  const auto p1 = parse_pure(a.psi1), p2 = parse_pure(a.psi2);
  const double chi = a.chi.value_or(a.chi_frac * addition_angle(p1, p2));
  const auto protocol = protocol_of(a.protocol);
  const auto res = add_states(p1, p2, chi, protocol, {.delta = a.delta, .budget_constant = a.budget_constant});
  Report r{.subcommand = "add-states", .seed = c.seed};
  r.params = {{"psi1", a.psi1}, {"psi2", a.psi2}, {"chi", chi}, {"protocol", a.protocol}, {"delta", a.delta},
              {"budget_constant", a.budget_constant}};
  r.columns = {"chi", "angle", "time", "steps", "fidelity", "purity"};
  r.add_row({chi, res.angle, res.time, res.steps, res.fidelity, res.state.purity()});
  const double floor = protocol == Protocol::ideal ? 1.0 - 1e-10 : 1.0 - a.delta;
  r.criterion = "fidelity >= " + format_short(floor);
  r.pass = res.fidelity >= floor;
  return r;
}

struct GroverArgs {
  int dim = 4;
  std::string marked = "3";
  std::string start = "uniform";
  double w = 0.25;
  double eps = 0.05;
  std::optional<double> delta;
  std::string protocol = "lmr";
  int runs = 200;
  std::string expect;
};

Report grover_cmd(const GroverArgs& a, const Common& c) {
  require(a.dim >= 2 && a.dim <= 256, "--dim must lie in 2..256");
  require(a.runs >= 1, "--runs must be positive");
  require(a.expect.empty() || a.expect == "found" || a.expect == "not_found", "--expect must be found or not_found");
  ComplexMatrix proj = ComplexMatrix::Zero(a.dim, a.dim);
  if (a.marked != "none") {
    for (double m : parse_list(a.marked, "--marked")) {
      require(m == std::floor(m) && m >= 0 && m < a.dim, "--marked entries must be basis indices below dim");
      proj(static_cast<Index>(m), static_cast<Index>(m)) = 1.0;
    }
  }
  const PureState start = a.start == "uniform" ? PureState::normalized(ComplexVector::Ones(a.dim)) : parse_pure(a.start);
  const double delta = a.delta.value_or(std::sqrt(a.w) / 10.0);
  GroverSearch search({.target_projector = proj, .w = a.w, .epsilon_fail = a.eps, .state_budget_delta = delta}, start,
                      protocol_of(a.protocol));
  Report r{.subcommand = "grover", .seed = c.seed};
  r.params = {{"dim", a.dim}, {"marked", a.marked}, {"start", a.start}, {"w", a.w}, {"eps", a.eps}, {"delta", delta},
              {"protocol", a.protocol}, {"runs", a.runs}};
  r.columns = {"run", "verdict", "rounds", "iterations", "copies"};
  long found = 0;
  for (int i = 0; i < a.runs; ++i) {
    const auto res = search.run(run_seed(need_seed(c), static_cast<std::size_t>(i)));
    found += res.verdict == SearchVerdict::found ? 1 : 0;
    r.add_row({i, to_string(res.verdict), res.rounds, res.iterations, res.copies});
  }
  const double frac = static_cast<double>(found) / a.runs;
  r.summary = {{"lambda", search.overlap()}, {"round_budget", grover_round_budget(a.w, a.eps)}, {"found_fraction", frac}};
  if (a.expect == "found") {
    r.criterion = "found_fraction >= 0.9";
    r.pass = frac >= 0.9;
  } else if (a.expect == "not_found") {
    r.criterion = "never found";
    r.pass = found == 0;
  }
  return r;
}

struct PolyArgs {
  std::string poly;
  int k = 3;
  int dim = 2;
  int terms = 2;
  int max_degree = 3;
  double t = 1.0;
  double delta = 0.02;
  std::string mode = "exact";
  double budget_constant = 4.0;
};

Report poly_cmd(const PolyArgs& a, const Common& c) {
  require(a.mode == "exact" || a.mode == "sampled", "--mode must be exact or sampled");
  CounterRng root(need_seed(c));
  CounterRng gen = root.substream(0);
  std::vector<DensityMatrix> states;
  std::optional<HermitianPolynomial> poly;
  if (!a.poly.empty()) {
    auto spec = io::polynomial_from_json(io::read_json_file(a.poly));
    states = std::move(spec.states);
    poly.emplace(std::move(spec.poly));
  } else {
    require(a.k >= 1 && a.k <= 9 && a.dim >= 2 && a.dim <= 16, "--k must lie in 1..9 and --dim in 2..16");
    require(a.terms >= 1 && a.max_degree >= 1 && a.max_degree <= 6, "--terms >= 1 and --max-degree in 1..6");
    for (int i = 0; i < a.k; ++i) states.push_back(random_state(a.dim, 1, gen));
    std::vector<PolynomialTerm> terms;
    for (int i = 0; i < a.terms; ++i) {
      PolynomialTerm term;
      const int deg = 1 + static_cast<int>(gen.below(static_cast<std::uint64_t>(a.max_degree)));
      for (int j = 0; j < deg; ++j) term.indices.push_back(1 + static_cast<int>(gen.below(static_cast<std::uint64_t>(a.k))));
      term.phase = 2 * std::numbers::pi * gen.uniform();
      term.coeff = gen.normal();
      terms.push_back(std::move(term));
    }
    poly.emplace(a.k, std::move(terms));
  }
  const auto sigma = random_state(states[0].dim(), 1, gen);
  const LmrConfig cfg{.t = a.t, .delta = a.delta, .budget_constant = a.budget_constant};
  const auto mode = a.mode == "exact" ? SamplingMode::exact : SamplingMode::sampled;
  const auto run = simulate_polynomial(sigma, *poly, states, cfg, mode, root.substream(1));
  const auto ideal = ideal_conjugation(polynomial_matrix(*poly, states), a.t, sigma);
  const double err = trace_distance(run.state, ideal);

  Report r{.subcommand = "poly-sim", .seed = c.seed};
  r.params = {{"poly", a.poly.empty() ? "random" : a.poly}, {"t", a.t}, {"delta", a.delta}, {"mode", a.mode},
              {"budget_constant", a.budget_constant}};
  if (a.poly.empty()) {
    r.params["k"] = a.k;
    r.params["dim"] = a.dim;
    r.params["terms"] = a.terms;
    r.params["max_degree"] = a.max_degree;
  }
  r.columns = {"t", "delta", "mode", "norm", "steps", "trace_distance"};
  r.add_row({a.t, a.delta, a.mode, run.norm, run.steps, err});
  // "coeff*e^{i phase}*indices" per term
  std::string terms;
  for (const auto& t : poly->terms()) {
    terms += (terms.empty() ? "" : "; ") + format_double(t.coeff) + "*e^{i " + format_double(t.phase) + "}*" +
             format_indices(t.indices);
  }
  std::string counts;
  for (std::size_t i = 0; i < run.sample_counts.size(); ++i) counts += (i ? ";" : "") + format_double(run.sample_counts[i]);
  r.summary = {{"terms", terms}, {"sample_counts", counts}};
  r.criterion = "trace_distance <= delta";
  r.pass = err <= a.delta;
  return r;
}

struct JordanArgs {
  int cases = 50;
  int max_degree = 4;
  int k = 3;
  int dim = 2;
};

Report jordan_cmd(const JordanArgs& a, const Common& c) {
  require(a.cases >= 1 && a.max_degree >= 1 && a.max_degree <= 8, "--cases >= 1 and --max-degree in 1..8");
  require(a.k >= 1 && a.k <= 9 && a.dim >= 1 && a.dim <= 16, "--k must lie in 1..9 and --dim in 1..16");
  CounterRng root(need_seed(c));
  Report r{.subcommand = "jordan-lie", .seed = c.seed};
  r.params = {{"cases", a.cases}, {"max_degree", a.max_degree}, {"k", a.k}, {"dim", a.dim}};
  r.columns = {"case", "indices", "z_re", "z_im", "nodes", "error", "expression"};
  double worst = 0.0;
  for (int i = 0; i < a.cases; ++i) {
    CounterRng rng = root.substream(static_cast<std::uint64_t>(i));
    std::vector<DensityMatrix> states;
    for (int j = 0; j < a.k; ++j) states.push_back(random_state(a.dim, 1 + rng.below(static_cast<std::uint64_t>(a.dim)), rng));
    const int len = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(a.max_degree)));
    std::vector<int> idx;
    for (int j = 0; j < len; ++j) idx.push_back(1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(a.k))));
    const Complex z(rng.normal(), rng.normal());
    const auto expr = jordan_lie_expand(idx, z);
    ComplexMatrix mono = identity(a.dim);
    for (int j : idx) mono = mono * states[static_cast<std::size_t>(j - 1)].matrix();
    const double err = max_abs(eval_jordan_lie(expr, states) - (z * mono + (z * mono).adjoint()));
    worst = std::max(worst, err);
    r.add_row({i, format_indices(idx), z.real(), z.imag(), static_cast<long>(node_count(expr)), err, to_string(expr)});
  }
  r.summary = {{"max_error", worst}};
  r.criterion = "max_error <= 1e-10";
  r.pass = worst <= 1e-10;
  return r;
}

struct UniversalArgs {
  std::string circuit;
  std::optional<int> qubits;
  double delta = 0.002;
  double depolarize = 0.0;
};

Report universal_cmd(const UniversalArgs& a, const Common& c) {
  const Circuit circuit = a.circuit.empty()
                              ? Circuit{CircuitGate::single(0, pauli::hadamard()), CircuitGate::cnot(0, 1)}
                              : io::circuit_from_json(io::read_json_file(a.circuit));
  const int n = a.qubits.value_or(std::max(2, io::circuit_width(circuit)));
  require(n >= io::circuit_width(circuit), "--qubits is smaller than the circuit");
  ChainMachine machine(n, a.depolarize);
  const auto run = run_circuit(machine, circuit, a.delta);
  const ComplexMatrix u = ideal_circuit(n, circuit);
  const PureState target = PureState::normalized(u.col(0));
  const auto ideal = DensityMatrix::pure(target);
  const double dist = trace_distance(run.state, ideal);
  const double budget = a.delta * static_cast<double>(circuit.size());

  Report r{.subcommand = "universal-demo", .seed = c.seed};
  r.params = {{"circuit", a.circuit.empty() ? "bell" : a.circuit}, {"qubits", n}, {"delta", a.delta},
              {"depolarize", a.depolarize}};
  r.columns = {"n_qubits", "gates", "single_qubit_gates", "cnots", "exchange_pulses", "swaps", "resource_zero",
               "resource_plus", "resources", "predicted_shape", "trace_distance", "fidelity"};
  const auto& k = run.cost;
  r.add_row({n, static_cast<long>(circuit.size()), k.single_qubit_gates, k.cnots, k.exchange_pulses, k.swaps,
             k.resource_zero, k.resource_plus, k.resources(), k.predicted_shape(), dist, fidelity(target, run.state)});
  long blocks = 0;
  for (const auto& b : machine.gate_log()) blocks += static_cast<long>(b.body.size());
  r.summary = {{"error_budget", budget}, {"gate_log_entries", blocks}};
  r.criterion = "trace_distance <= delta * gates";
  r.pass = dist <= budget;
  return r;
}

struct TomoArgs {
  double d = 2;
  double r = 1;
  double t = 1;
  std::string deltas = "0.1,0.01,0.001";
  double budget_constant = 4.0;
};

Report tomo_cmd(const TomoArgs& a, const Common& c) {
  const auto deltas = parse_list(a.deltas, "--deltas");
  Report r{.subcommand = "tomo-compare", .seed = c.seed};
  r.params = {{"d", a.d}, {"r", a.r}, {"t", a.t}, {"deltas", a.deltas}, {"budget_constant", a.budget_constant}};
  r.columns = {"delta", "lmr_budget", "tomography_bound", "ratio"};
  std::vector<std::pair<double, double>> by_delta;
  for (double d : deltas) {
    const double lmr = lmr_budget_shape(a.t, d, a.budget_constant);
    const double tomo = tomography_bound(a.d, a.r, a.t, d);
    r.add_row({d, lmr, tomo, tomo / lmr});
    by_delta.emplace_back(d, tomo / lmr);
  }
  std::sort(by_delta.begin(), by_delta.end(), [](auto x, auto y) { return x.first > y.first; });
  bool grows = true;
  for (std::size_t i = 1; i < by_delta.size(); ++i) grows = grows && by_delta[i].second > by_delta[i - 1].second;
  r.criterion = "ratio grows as delta shrinks";
  r.pass = grows;
  return r;
}

Report selftest_report(const Command& cmd, const Common& c) {
  Report r{.subcommand = cmd.name + " --selftest", .seed = c.seed};
  r.columns = {"module", "check", "error", "tolerance", "pass"};
  bool all = true;
  for (const auto& check : run_selftest(cmd.selftest_modules)) {
    r.add_row({check.module, check.name, check.error, check.tolerance, check.pass()});
    all = all && check.pass();
  }
  r.criterion = "every check within tolerance";
  r.pass = all;
  return r;
}

void print_error(const std::string& kind, const std::string& message) {
  const ojson j = {{"error", kind}, {"message", message}};
  std::cerr << j.dump() << "\n";
}

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("DMEXP_SEED");
  if (s == nullptr || *s == '\0') return std::nullopt;
  const std::string text = s;
  require(text.find_first_not_of("0123456789") == std::string::npos && text.size() <= 20,
          "DMEXP_SEED must be a non-negative integer");
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw ValidationError("DMEXP_SEED is out of range");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sample-based Hamiltonian simulation experiments"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  Common common;
  std::vector<Command> commands;
  const Command* chosen = nullptr;

  auto add = [&](const std::string& name, const std::string& about, bool stochastic, std::vector<std::string> modules,
                 std::function<Report(const Common&)> run) {
    auto* sub = app.add_subcommand(name, about);
    sub->add_option("--seed", common.seed, "RNG seed (default: $DMEXP_SEED)");
    sub->add_option("--out", common.out, "Report path (default: stdout)");
    sub->add_option("--format", common.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_flag("--selftest", common.selftest, "Run the module's exact-identity checks instead");
    sub->add_flag("--wall-time", common.wall_time, "Include wall time (breaks byte-identity)");
    commands.push_back({name, stochastic, std::move(modules), std::move(run)});
    return sub;
  };

  LmrConvergeArgs lc;
  auto* s = add("lmr-converge", "Trace distance of LMR vs n, with fitted slope", true, {"linalg", "lmr"},
                [&](const Common& c) { return lmr_converge(lc, c); });
  s->add_option("--dim", lc.dim);
  s->add_option("--t", lc.t);
  s->add_option("--ns", lc.ns, "Step counts, e.g. 16,32,...,1024");
  s->add_option("--rank-sigma", lc.rank_sigma);
  s->add_option("--rank-rho", lc.rank_rho);
  s->add_option("--budget-deltas", lc.budget_deltas, "Deltas whose default budget is checked");
  s->add_option("--sigma", lc.sigma, "State file or 0/1/+/- (default: random)");
  s->add_option("--rho", lc.rho, "State file or 0/1/+/- (default: random)");

  DiscriminateArgs da;
  s = add("discriminate", "Decide rho(x) vs rho(x + eps) from one evolved probe", true, {"lmr", "applications"},
          [&](const Common& c) { return discriminate_cmd(da, c); });
  s->add_option("--x", da.x);
  s->add_option("--eps", da.eps);
  s->add_option("--eta", da.eta, "Margin from the endpoints, 0 disables the check");
  s->add_option("--trials", da.trials);
  s->add_option("--protocol", da.protocol)->check(CLI::IsMember({"ideal", "lmr"}));
  s->add_option("--delta", da.delta);
  s->add_option("--steps", da.steps, "Override the LMR step count");
  s->add_option("--budget-constant", da.budget_constant);
  s->add_option("--min-success", da.min_success, "Pass threshold (default: 2/3 minus 3 sigma)");

  PhaseArgs pa;
  s = add("phase-est", "Kitaev phase estimation of the spectrum of rho", true, {"lmr", "applications"},
          [&](const Common& c) { return phase_cmd(pa, c); });
  s->add_option("--diag", pa.diag, "rho = diag(x, 1 - x)");
  s->add_option("--state", pa.state, "State file instead of --diag");
  s->add_option("--precision", pa.precision);
  s->add_option("--protocol", pa.protocol)->check(CLI::IsMember({"ideal", "lmr"}));
  s->add_option("--shots", pa.shots, "Shots per round");
  s->add_option("--runs", pa.runs, "Runs in spectrum mode");
  s->add_option("--budget-constant", pa.budget_constant);
  s->add_option("--per-use-delta", pa.per_use_delta);
  s->add_option("--eigenvector", pa.eigenvector, "Basis index of a known eigenvector");
  s->add_option("--expect", pa.expect, "Comma list of eigenvalues that must be found");

  OrthoArgs oa;
  s = add("ortho-test", "Decide |<psi1|psi2>|^2 = 0 or >= w", true, {"gadgets", "applications"},
          [&](const Common& c) { return ortho_cmd(oa, c); });
  s->add_option("--psi1", oa.psi1, "State file or 0/1/+/-");
  s->add_option("--psi2", oa.psi2, "State file or 0/1/+/-");
  s->add_option("--w", oa.w);
  s->add_option("--eps", oa.eps, "Failure probability");
  s->add_option("--protocol", oa.protocol)->check(CLI::IsMember({"ideal", "lmr"}));
  s->add_option("--runs", oa.runs);
  s->add_option("--expect", oa.expect, "orthogonal or overlapping");

  AddArgs aa;
  s = add("add-states", "Coherent addition of two pure states", false, {"gadgets", "applications"},
          [&](const Common& c) { return add_cmd(aa, c); });
  s->add_option("--psi1", aa.psi1, "State file or 0/1/+/-");
  s->add_option("--psi2", aa.psi2, "State file or 0/1/+/-");
  auto* chi = s->add_option("--chi", aa.chi);
  s->add_option("--chi-frac", aa.chi_frac, "chi as a fraction of the angle between the states")->excludes(chi);
  s->add_option("--protocol", aa.protocol)->check(CLI::IsMember({"ideal", "lmr"}));
  s->add_option("--delta", aa.delta);
  s->add_option("--budget-constant", aa.budget_constant);

  GroverArgs ga;
  s = add("grover", "Grover decision with the start state given as copies", true, {"lmr", "applications"},
          [&](const Common& c) { return grover_cmd(ga, c); });
  s->add_option("--dim", ga.dim);
  s->add_option("--marked", ga.marked, "Comma list of marked basis indices, or none");
  s->add_option("--start", ga.start, "uniform, 0/1/+/- or a state file");
  s->add_option("--w", ga.w, "Promised lower bound on the overlap");
  s->add_option("--eps", ga.eps, "Failure probability");
  s->add_option("--delta", ga.delta, "Per-reflection LMR error (default: sqrt(w)/10)");
  s->add_option("--protocol", ga.protocol)->check(CLI::IsMember({"ideal", "lmr"}));
  s->add_option("--runs", ga.runs);
  s->add_option("--expect", ga.expect, "found or not_found");

  PolyArgs po;
  s = add("poly-sim", "Hermitian polynomial simulation vs the exact exponential", true, {"gadgets"},
          [&](const Common& c) { return poly_cmd(po, c); });
  s->add_option("--poly", po.poly, "Polynomial file (default: random instance)");
  s->add_option("--k", po.k, "States in a random instance");
  s->add_option("--dim", po.dim);
  s->add_option("--terms", po.terms);
  s->add_option("--max-degree", po.max_degree);
  s->add_option("--t", po.t);
  s->add_option("--delta", po.delta);
  s->add_option("--mode", po.mode)->check(CLI::IsMember({"exact", "sampled"}));
  s->add_option("--budget-constant", po.budget_constant);

  JordanArgs ja;
  s = add("jordan-lie", "Round trip of the nested commutator expansion", true, {"jordan_lie"},
          [&](const Common& c) { return jordan_cmd(ja, c); });
  s->add_option("--cases", ja.cases);
  s->add_option("--max-degree", ja.max_degree);
  s->add_option("--k", ja.k);
  s->add_option("--dim", ja.dim);

  UniversalArgs ua;
  s = add("universal-demo", "Run a circuit on the exchange-only chain", false, {"universal"},
          [&](const Common& c) { return universal_cmd(ua, c); });
  s->add_option("--circuit", ua.circuit, "Circuit file (default: Bell pair)");
  s->add_option("--qubits", ua.qubits);
  s->add_option("--delta", ua.delta, "Per-gate error budget");
  s->add_option("--depolarize", ua.depolarize, "Resource depolarization p");

  TomoArgs ta;
  s = add("tomo-compare", "LMR budget vs the tomography bound", false, {"tomography"},
          [&](const Common& c) { return tomo_cmd(ta, c); });
  s->add_option("--d", ta.d);
  s->add_option("--r", ta.r);
  s->add_option("--t", ta.t);
  s->add_option("--deltas", ta.deltas);
  s->add_option("--budget-constant", ta.budget_constant);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    print_error("usage", e.what());
    return kExitInvalid;
  }
  for (const auto& cmd : commands) {
    if (app.got_subcommand(cmd.name)) chosen = &cmd;
  }

  try {
    if (!common.seed) common.seed = env_seed();
    if (!common.selftest && chosen->stochastic) {
      require(common.seed.has_value(), chosen->name + " needs --seed or DMEXP_SEED");
    }
    const auto t0 = std::chrono::steady_clock::now();
    Report report = common.selftest ? selftest_report(*chosen, common) : chosen->run(common);
    if (common.wall_time) report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::string text = common.format == "json" ? to_json(report) : to_csv(report);
    if (common.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream f(common.out, std::ios::binary);
      require(f.good(), "cannot write \"" + common.out + "\"");
      f << text;
    }
    return report.pass ? 0 : kExitCheckFailed;
  } catch (const ValidationError& e) {
    print_error("validation", e.what());
    return kExitInvalid;
  } catch (const nlohmann::json::exception& e) {
    print_error("validation", e.what());
    return kExitInvalid;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
}
