#pragma once

// Grover's decision problem when the start state |s> is only available as
// copies: R_s = e^{-i pi |s><s|} is simulated from those copies, R_T is free.

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>

#include "dmexp/applications/common.hpp"
#include "dmexp/lmr.hpp"

namespace dmexp {

struct GroverTask {
  ComplexMatrix target_projector;
  double w = 0.25;
  double epsilon_fail = 0.05;
  double state_budget_delta = 0.05;  // per-reflection error for the lmr protocol

  void validate() const {
    const auto& p = target_projector;
    require(p.rows() == p.cols() && p.rows() > 0, "GroverTask: projector must be square");
    require(all_finite(p) && is_hermitian(p), "GroverTask: projector must be Hermitian");
    require(max_abs(p * p - p) <= tol::validation, "GroverTask: projector is not idempotent");
    require(w > 0.0 && w <= 1.0, "GroverTask: w must lie in (0, 1]");
    require(epsilon_fail > 0.0 && epsilon_fail < 1.0, "GroverTask: epsilon_fail must lie in (0, 1)");
    require(state_budget_delta > 0.0 && state_budget_delta <= 1.0, "GroverTask: state_budget_delta must lie in (0, 1]");
  }
};

enum class SearchVerdict { found, not_found };

inline const char* to_string(SearchVerdict v) { return v == SearchVerdict::found ? "found" : "not_found"; }

struct GroverResult {
  SearchVerdict verdict;
  int rounds;             // measurement rounds performed
  long iterations;        // Grover iterates over all rounds
  long copies;            // copies of |s>: one per round plus LMR copies
};

/// Round budget: ramp until m reaches 1/sqrt(w), then ceil(ln(1/eps)/ln(4/3)) more.
inline int grover_round_budget(double w, double epsilon_fail) {
  const double ramp = std::ceil(std::log(1.0 / std::sqrt(w)) / std::log(1.2));
  const double tail = std::ceil(std::log(1.0 / epsilon_fail) / std::log(4.0 / 3.0));
  return static_cast<int>(std::max(0.0, ramp) + tail);
}

/// BBHT-style schedule: round r draws j uniform in [0, ceil(m)), applies
/// G^j with G = -R_s R_T to a fresh copy of |s>, measures the target, and on
/// failure grows m <- min(6m/5, 1/sqrt(w)). The states G^j|s> do not depend on
/// the seed, so one GroverSearch caches them across runs.
class GroverSearch {
 public:
  GroverSearch(GroverTask task, const PureState& start, Protocol protocol)
      : task_(std::move(task)), protocol_(protocol), s_(DensityMatrix::pure(start)) {
    task_.validate();
    const Index d = task_.target_projector.rows();
    require(start.dim() == d, "sample_grover: start state dimension mismatch");
    reflect_target_ = identity(d) - 2.0 * task_.target_projector;
    reflect_start_ = identity(d) - 2.0 * s_.matrix();
    copies_per_reflection_ = protocol == Protocol::lmr ? sample_budget(reflection()) : 0;
    powers_.emplace(0, s_.matrix());
  }

  /// <s|P_T|s>
  double overlap() const { return born(task_.target_projector, s_.matrix()); }

  GroverResult run(std::uint64_t seed) {
    const int budget = grover_round_budget(task_.w, task_.epsilon_fail);
    const double m_max = 1.0 / std::sqrt(task_.w);
    const CounterRng root(seed);
    double m = 1.0;
    GroverResult out{SearchVerdict::not_found, 0, 0, 0};
    for (int r = 0; r < budget; ++r) {
      CounterRng rng = root.substream(static_cast<std::uint64_t>(r));
      const long j = static_cast<long>(rng.below(static_cast<std::uint64_t>(std::ceil(m))));
      const double p = born(task_.target_projector, evolved(j));
      out.rounds += 1;
      out.iterations += j;
      out.copies += 1 + j * copies_per_reflection_;
      if (rng.bernoulli(p)) {
        out.verdict = SearchVerdict::found;
        break;
      }
      m = std::min(1.2 * m, m_max);
    }
    return out;
  }

 private:
  LmrConfig reflection() const { return {.t = std::numbers::pi, .delta = task_.state_budget_delta}; }

  // G^j |s><s| (G^j)^dag, built incrementally
  const ComplexMatrix& evolved(long j) {
    const auto known = std::prev(powers_.upper_bound(j));
    long k = known->first;
    ComplexMatrix rho = known->second;
    for (; k < j; ++k) {
      rho = hermitian_part(reflect_target_ * rho * reflect_target_);
      if (protocol_ == Protocol::ideal) {
        rho = hermitian_part(reflect_start_ * rho * reflect_start_);
      } else {
        rho = lmr_simulate(DensityMatrix::from_matrix(rho), s_, reflection()).state.matrix();
      }
      powers_.emplace(k + 1, rho);
    }
    return powers_.at(j);
  }

  GroverTask task_;
  Protocol protocol_;
  DensityMatrix s_;
  ComplexMatrix reflect_target_;
  ComplexMatrix reflect_start_;
  long copies_per_reflection_ = 0;
  std::map<long, ComplexMatrix> powers_;
};

inline GroverResult sample_grover(const GroverTask& task, const PureState& start, Protocol protocol,
                                  std::uint64_t seed) {
  return GroverSearch(task, start, protocol).run(seed);
}

}  // namespace dmexp
