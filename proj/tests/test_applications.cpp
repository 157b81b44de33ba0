#include <cmath>
#include <numbers>

#include "dmexp/applications/discrimination.hpp"
#include "dmexp/applications/grover.hpp"
#include "dmexp/applications/orthogonality.hpp"
#include "dmexp/applications/phase_estimation.hpp"
#include "dmexp/applications/state_addition.hpp"
#include "dmexp/applications/tomography.hpp"
#include "test_support.hpp"

using namespace dmexp;
using dmexp::testing::loglog_slope;
using Catch::Matchers::WithinAbs;

namespace {

// direct binomial pmf by products, independent of the lgamma route
double binomial_pmf(int n, int k, double p) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c * std::pow(p, k) * std::pow(1.0 - p, n - k);
}

}  // namespace

TEST_CASE("ideal discrimination at eps t = pi/2 is perfect", "[applications][discrimination]") {
  const auto r = discriminate({.x = 0.5, .epsilon = 0.5, .trials = 100, .seed = 1}, Protocol::ideal);
  CHECK(r.success_rate == 1.0);
  CHECK(r.time == Catch::Approx(std::numbers::pi));
  for (double x : {0.2, 0.35}) {
    const auto q = discriminate({.x = x, .epsilon = 0.1, .eta = 0.15, .trials = 300, .seed = 2}, Protocol::ideal);
    CHECK(q.success_rate == 1.0);
    CHECK_THAT(q.p_correct_given_low, WithinAbs(1.0, 1e-12));
    CHECK_THAT(q.p_correct_given_high, WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("LMR discrimination at delta = 1/3", "[applications][discrimination]") {
  const auto r = discriminate({.x = 0.5, .epsilon = 0.5, .trials = 1000, .seed = 3}, Protocol::lmr,
                              {.delta = 1.0 / 3.0});
  // 2/3 minus a 3 sigma binomial band
  CHECK(r.success_rate >= 2.0 / 3.0 - 3.0 * std::sqrt(2.0 / 9.0 / 1000.0));
  CHECK(r.steps == sample_budget({.t = std::numbers::pi, .delta = 1.0 / 3.0}));
}

TEST_CASE("a single LMR step cannot resolve a small gap", "[applications][discrimination]") {
  const auto r = discriminate({.x = 0.3, .epsilon = 0.01, .trials = 1000, .seed = 4}, Protocol::lmr,
                              {.delta = 0.1, .n_override = 1});
  CHECK(r.success_rate <= 0.6);
}

TEST_CASE("discrimination task validation", "[applications][discrimination]") {
  CHECK_THROWS_AS(discriminate({.x = 0.9, .epsilon = 0.2}, Protocol::ideal), ValidationError);
  CHECK_THROWS_AS(discriminate({.x = 0.3, .epsilon = 0.2, .eta = 0.1}, Protocol::ideal), ValidationError);
  CHECK_THROWS_AS(discriminate({.x = 0.3, .epsilon = 0.0}, Protocol::ideal), ValidationError);
  CHECK_THROWS_AS(discriminate({.x = 0.3, .epsilon = 0.1, .trials = 0}, Protocol::ideal), ValidationError);
}

TEST_CASE("discrimination is reproducible from the seed", "[applications][discrimination]") {
  const DiscriminationTask task{.x = 0.4, .epsilon = 0.05, .trials = 200, .seed = 9};
  const auto a = discriminate(task, Protocol::lmr, {.delta = 0.5});
  const auto b = discriminate(task, Protocol::lmr, {.delta = 0.5});
  CHECK(a.successes == b.successes);
}

TEST_CASE("binomial total variation", "[applications][binomial]") {
  CHECK_THAT(binomial_tv(1, 0.5, 0.5), WithinAbs(0.5, 1e-15));
  CHECK(binomial_tv(50, 0.3, 0.0) == 0.0);
  const double a = binomial_tv(100, 0.5, 0.05), b = binomial_tv(200, 0.5, 0.05), c = binomial_tv(400, 0.5, 0.05);
  CHECK(a > 1.0 / 3.0);
  CHECK(a < 1.0);
  CHECK(a < b);
  CHECK(b < c);
  double direct = 0.0;
  for (int k = 0; k <= 30; ++k) direct += std::abs(binomial_pmf(30, k, 0.2) - binomial_pmf(30, k, 0.35));
  CHECK_THAT(binomial_tv(30, 0.2, 0.15), WithinAbs(0.5 * direct, 1e-12));
  CHECK_THROWS_AS(binomial_tv(10, 0.8, 0.3), ValidationError);
}

TEST_CASE("phase estimation on a known eigenvector", "[applications][phase]") {
  const auto rho = DensityMatrix::basis(2, 0);
  for (auto protocol : {Protocol::ideal, Protocol::lmr}) {
    const auto r = phase_estimate(rho, {.precision = 0.1, .protocol = protocol, .seed = 1}, PureState::basis(2, 0));
    REQUIRE(r.eigenvalues.size() == 1);
    CHECK_THAT(r.eigenvalues[0], WithinAbs(1.0, 0.1));
  }
}

TEST_CASE("phase estimation samples the spectrum", "[applications][phase]") {
  const auto rho = DensityMatrix::qubit_diagonal(0.8);
  const auto r = phase_estimate(rho, {.precision = 0.05, .protocol = Protocol::ideal, .seed = 2});
  REQUIRE(r.eigenvalues.size() == 2);
  CHECK_THAT(r.eigenvalues[0], WithinAbs(0.2, 0.05));
  CHECK_THAT(r.eigenvalues[1], WithinAbs(0.8, 0.05));
  CHECK(r.support[1] > r.support[0]);
}

TEST_CASE("phase estimation succeeds with probability at least 3/4", "[applications][phase]") {
  const auto rho = DensityMatrix::qubit_diagonal(0.8);
  int hits = 0;
  const int runs = 40;
  for (int s = 0; s < runs; ++s) {
    const auto r = phase_estimate(rho, {.precision = 0.05, .protocol = Protocol::lmr, .seed = std::uint64_t(100 + s)},
                                  PureState::basis(2, 0));
    hits += std::abs(r.eigenvalues[0] - 0.8) <= 0.05 ? 1 : 0;
  }
  CHECK(hits >= 3 * runs / 4);
}

TEST_CASE("phase estimation step count scales as 1/eps^2", "[applications][phase][property]") {
  const auto rho = DensityMatrix::qubit_diagonal(0.8);
  std::vector<double> inv_eps, steps;
  for (double eps : {0.2, 0.1, 0.05}) {
    const auto r = phase_estimate(rho, {.precision = eps, .protocol = Protocol::lmr, .seed = 3}, PureState::basis(2, 0));
    inv_eps.push_back(eps);
    steps.push_back(static_cast<double>(r.lmr_steps));
  }
  CHECK_THAT(loglog_slope(inv_eps, steps), WithinAbs(-2.0, 0.3));
  CHECK_THROWS_AS(phase_estimate(rho, {.precision = 0.6}), ValidationError);
}

TEST_CASE("orthogonality test verdicts", "[applications][orthogonality]") {
  const auto zero = PureState::basis(2, 0), one = PureState::basis(2, 1);
  for (int s = 0; s < 50; ++s) {
    CHECK(orthogonality_test(zero, one, 0.5, 0.01, Protocol::ideal, s).verdict == OrthogonalityVerdict::orthogonal);
  }
  const auto same = orthogonality_test(zero, zero, 1.0, 0.01, Protocol::ideal, 1);
  CHECK(same.verdict == OrthogonalityVerdict::overlapping);
  CHECK_THAT(same.p_minus, WithinAbs(1.0, 1e-12));
  CHECK(orthogonality_test(zero, one, 0.5, 0.05, Protocol::lmr, 2).verdict == OrthogonalityVerdict::orthogonal);
  int detected = 0;
  for (int s = 0; s < 20; ++s)
    detected += orthogonality_test(zero, PureState::plus(), 0.5, 0.05, Protocol::lmr, s).verdict ==
                OrthogonalityVerdict::overlapping;
  CHECK(detected >= 18);
}

TEST_CASE("orthogonality test rotation angle", "[applications][orthogonality]") {
  // P(-) = (1 - cos(theta T))/2 with theta = sqrt(lambda/2 (1 - lambda/2))
  CounterRng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = random_pure_state(3, rng);
    const auto b = random_pure_state(3, rng);
    const double lambda = std::norm(a.inner(b));
    const double theta = std::sqrt(lambda / 2 * (1 - lambda / 2));
    const auto r = orthogonality_test(a, b, 0.3, 0.1, Protocol::ideal, 1);
    CHECK_THAT(r.p_minus, WithinAbs(0.5 * (1 - std::cos(theta * r.time)), 1e-12));
  }
  const auto plan = orthogonality_plan(0.5, 0.01);
  CHECK(plan.p_min > 0.9);
  CHECK_THROWS_AS(orthogonality_plan(0.0, 0.1), ValidationError);
}

TEST_CASE("state addition endpoints and midpoint", "[applications][addition]") {
  const auto zero = PureState::basis(2, 0);
  const auto plus = PureState::plus();
  const double d = std::numbers::pi / 4;
  CHECK_THAT(addition_angle(zero, plus), WithinAbs(d, 1e-15));

  const auto start = add_states(zero, plus, 0.0, Protocol::lmr, {.delta = 0.01});
  CHECK(fidelity(zero, start.state) >= 1.0 - 1e-12);

  for (auto protocol : {Protocol::ideal, Protocol::lmr}) {
    const auto end = add_states(zero, plus, d, protocol, {.delta = 0.01});
    CHECK(fidelity(plus, end.state) >= 1.0 - 0.01);
    const auto mid = add_states(zero, plus, d / 2, protocol, {.delta = 0.01});
    ComplexVector sum = zero.amplitudes() + plus.amplitudes();
    CHECK(fidelity(PureState::normalized(sum), mid.state) >= 1.0 - 0.01);
    if (protocol == Protocol::ideal) CHECK_THAT(mid.fidelity, WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("state addition keeps purity and stays in the span", "[applications][addition][property]") {
  CounterRng rng(6);
  const double delta = 0.02;
  for (int trial = 0; trial < 6; ++trial) {
    const auto a = random_pure_state(3, rng);
    const auto b = random_pure_state(3, rng);
    const double chi = rng.uniform() * addition_angle(a, b);
    const auto r = add_states(a, b, chi, Protocol::lmr, {.delta = delta});
    CHECK(r.state.purity() >= 1.0 - 2.0 * delta);
    CHECK(r.fidelity >= 1.0 - delta);
    // projector onto span{a, b}
    ComplexMatrix basis(3, 2);
    basis.col(0) = a.amplitudes();
    basis.col(1) = b.amplitudes();
    const ComplexMatrix q = Eigen::HouseholderQR<ComplexMatrix>(basis).householderQ() * ComplexMatrix::Identity(3, 2);
    const double leakage = 1.0 - (q.adjoint() * r.state.matrix() * q).trace().real();
    CHECK(leakage <= delta);
  }
}

TEST_CASE("state addition rejects degenerate pairs", "[applications][addition]") {
  const auto zero = PureState::basis(2, 0);
  CHECK_THROWS_AS(add_states(zero, zero, 0.1, Protocol::ideal), ValidationError);
  CHECK_THROWS_AS(add_states(zero, PureState::basis(2, 1), 0.1, Protocol::ideal), ValidationError);
}

TEST_CASE("Grover search verdicts", "[applications][grover]") {
  const ComplexMatrix p1 = DensityMatrix::basis(2, 1).matrix();
  GroverTask task{.target_projector = p1, .w = 0.5, .epsilon_fail = 0.01, .state_budget_delta = 0.05};
  for (int s = 0; s < 30; ++s) {
    CHECK(sample_grover(task, PureState::basis(2, 0), Protocol::ideal, s).verdict == SearchVerdict::not_found);
    CHECK(sample_grover(task, PureState::plus(), Protocol::ideal, s).verdict == SearchVerdict::found);
  }

  const ComplexMatrix p11 = DensityMatrix::basis(4, 3).matrix();
  GroverTask two{.target_projector = p11, .w = 0.25, .epsilon_fail = 0.05, .state_budget_delta = 0.05};
  const auto start = PureState::plus().tensor(PureState::plus());
  int found = 0;
  for (int s = 0; s < 50; ++s) found += sample_grover(two, start, Protocol::lmr, s).verdict == SearchVerdict::found;
  CHECK(found >= 45);

  const auto zero2 = PureState::basis(4, 0);
  for (int s = 0; s < 20; ++s) CHECK(sample_grover(two, zero2, Protocol::lmr, s).verdict == SearchVerdict::not_found);

  two.target_projector(0, 1) = 0.3;
  CHECK_THROWS_AS(sample_grover(two, start, Protocol::ideal, 1), ValidationError);
}

TEST_CASE("LMR reflections barely move the Grover statistics", "[applications][grover][property]") {
  // lambda = 1/8 against w = 1/8 leaves room for failures, so the rates are informative
  const ComplexMatrix p = DensityMatrix::basis(8, 7).matrix();
  const double w = 1.0 / 8.0;
  GroverTask task{.target_projector = p, .w = w, .epsilon_fail = 0.3, .state_budget_delta = std::sqrt(w) / 10.0};
  const auto start = PureState::normalized(ComplexVector::Ones(8));
  const int runs = 500;
  int ideal = 0, lmr = 0;
  for (int s = 0; s < runs; ++s) {
    ideal += sample_grover(task, start, Protocol::ideal, s).verdict == SearchVerdict::found;
    lmr += sample_grover(task, start, Protocol::lmr, s).verdict == SearchVerdict::found;
  }
  CHECK(std::abs(ideal - lmr) <= runs * 5 / 100);
}

TEST_CASE("tomography bound", "[applications][tomography]") {
  CHECK(tomography_bound(2, 1, 1, 0.01) > 1e4);
  CHECK_THAT(tomography_bound(2, 1, 1, 0.5e-6) / tomography_bound(2, 1, 1, 1e-6), WithinAbs(4.0, 0.1));
  double previous = 0.0;
  for (double delta : {1e-2, 1e-3, 1e-4, 1e-5}) {
    const double ratio = tomography_bound(2, 1, 1, delta) / lmr_budget_shape(1, delta);
    CHECK(ratio > previous);
    previous = ratio;
  }
  CHECK_THROWS_AS(tomography_bound(2, 1, 0.5, 1.0), ValidationError);
  CHECK_THROWS_AS(tomography_bound(1, 2, 1, 0.1), ValidationError);
}
