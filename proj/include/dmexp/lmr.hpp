#pragma once

// Partial-swap simulation of e^{-i rho t} from copies of rho.

#include <cmath>
#include <numbers>
#include <optional>

#include "dmexp/linalg.hpp"

namespace dmexp {

struct LmrConfig {
  double t = 1.0;
  double delta = 0.01;
  double budget_constant = 4.0;
  std::optional<long> n_override;

  void validate() const {
    require(std::isfinite(t), "LmrConfig: t must be finite");
    require(delta > 0.0 && delta <= 1.0, "LmrConfig: delta must lie in (0, 1]");
    require(budget_constant > 0.0 && std::isfinite(budget_constant), "LmrConfig: budget_constant must be positive");
    require(!n_override || *n_override >= 1, "LmrConfig: n_override must be positive");
  }
};

struct SimulationResult {
  DensityMatrix state;
  long steps;
};

/// n_override if set, otherwise ceil(budget_constant * t^2 / delta), at least 1.
inline long sample_budget(const LmrConfig& config) {
  config.validate();
  if (config.n_override) return *config.n_override;
  const double raw = config.budget_constant * config.t * config.t / config.delta;
  require(raw < 1e15, "sample_budget: step count overflows");
  // shave roundoff so that e.g. 4 * 1 / 0.01 gives 400, not 401
  const long n = static_cast<long>(std::ceil(raw * (1.0 - 1e-12)));
  return std::max(1L, n);
}

/// e^{-iht} sigma e^{iht}
inline DensityMatrix ideal_conjugation(const ComplexMatrix& h, double t, const DensityMatrix& sigma) {
  require(h.rows() == sigma.dim() && h.cols() == sigma.dim(),
          "ideal_conjugation: generator is " + dims_string(h.rows(), h.cols()) + ", state has dim " +
              std::to_string(sigma.dim()));
  const ComplexMatrix u = herm_exp(h, t);
  return DensityMatrix::from_matrix(hermitian_part(conjugate(u, sigma.matrix())));
}

namespace detail {

inline Index trailing_dim(Index total, Index lead, const char* who) {
  require(lead >= 1 && total % lead == 0,
          std::string(who) + ": dim " + std::to_string(lead) + " does not divide " + std::to_string(total));
  return total / lead;
}

inline void check_step(double delta_step, const char* who) {
  require(std::isfinite(delta_step), std::string(who) + ": non-finite step");
  require(std::abs(delta_step) <= std::numbers::pi / 2 + 1e-12, std::string(who) + ": |delta_step| exceeds pi/2");
}

/// One LMR step on raw matrices. sigma lives on A x B, rho on A.
inline ComplexMatrix lmr_step_raw(const ComplexMatrix& sigma, const ComplexMatrix& rho, Index dim_b, double c,
                                  double s) {
  const ComplexMatrix r = dim_b == 1 ? rho : kron(rho, identity(dim_b));
  const ComplexMatrix marginal = dim_b == 1 ? ComplexMatrix::Constant(1, 1, sigma.trace())
                                            : partial_trace(sigma, {rho.rows(), dim_b}, 0);
  // c^2 sigma + s^2 rho x marginal, arranged so that c^2 + s^2 != 1 in floating
  // point cannot leak into the trace over many steps
  ComplexMatrix out = sigma + (s * s) * (kron(rho, marginal) - sigma) - (kI * s * c) * commutator(r, sigma);
  return hermitian_part(out);
}

/// Reduces delta mod pi into [-pi/2, pi/2]; e^{-iS(d+pi)} = -e^{-iSd} gives the same channel.
inline double wrap_step(double d) {
  if (std::abs(d) <= std::numbers::pi / 2) return d;
  return d - std::numbers::pi * std::round(d / std::numbers::pi);
}

}  // namespace detail

/// sigma cos^2 d - i[rho x 1_B, sigma] sin d cos d + rho x Tr_A(sigma) sin^2 d
inline DensityMatrix lmr_step(const DensityMatrix& sigma, const DensityMatrix& rho, double delta_step) {
  detail::check_step(delta_step, "lmr_step");
  const Index dim_b = detail::trailing_dim(sigma.dim(), rho.dim(), "lmr_step");
  return DensityMatrix::from_matrix(
      detail::lmr_step_raw(sigma.matrix(), rho.matrix(), dim_b, std::cos(delta_step), std::sin(delta_step)));
}

/// Same channel by brute force: Tr_F[(e^{-i S_AF d} x 1_B)(sigma x rho)(...)^dag].
inline DensityMatrix lmr_step_explicit(const DensityMatrix& sigma, const DensityMatrix& rho, double delta_step) {
  detail::check_step(delta_step, "lmr_step_explicit");
  const Index da = rho.dim();
  const Index db = detail::trailing_dim(sigma.dim(), da, "lmr_step_explicit");
  const std::vector<Index> dims{da, db, da};
  const ComplexMatrix swap = subsystem_swap(dims, 0, 2);
  const ComplexMatrix u =
      std::cos(delta_step) * identity(swap.rows()) - kI * std::sin(delta_step) * swap;
  const ComplexMatrix joint = conjugate(u, kron(sigma.matrix(), rho.matrix()));
  return DensityMatrix::from_matrix(hermitian_part(partial_trace(joint, dims, 2)));
}

/// n = sample_budget(config) steps of size t/n.
inline SimulationResult lmr_simulate(const DensityMatrix& sigma, const DensityMatrix& rho, const LmrConfig& config) {
  const long n = sample_budget(config);
  const Index dim_b = detail::trailing_dim(sigma.dim(), rho.dim(), "lmr_simulate");
  const double d = detail::wrap_step(config.t / static_cast<double>(n));
  const double c = std::cos(d), s = std::sin(d);
  ComplexMatrix m = sigma.matrix();
  for (long k = 0; k < n; ++k) m = detail::lmr_step_raw(m, rho.matrix(), dim_b, c, s);
  return {DensityMatrix::from_matrix(m), n};
}

// ---------------------------------------------------------------------------
// controlled variant: control qubit C in front of A (x B)

namespace detail {

inline ComplexMatrix controlled_step_raw(const ComplexMatrix& joint, const ComplexMatrix& rho, Index dim_b, double c,
                                         double s) {
  const Index n = joint.rows() / 2;
  const ComplexMatrix r = dim_b == 1 ? rho : kron(rho, identity(dim_b));
  ComplexMatrix out(joint.rows(), joint.cols());
  out.topLeftCorner(n, n) = joint.topLeftCorner(n, n);
  const ComplexMatrix j01 = joint.topRightCorner(n, n);
  out.topRightCorner(n, n) = c * j01 + (kI * s) * (j01 * r);
  out.bottomLeftCorner(n, n) = out.topRightCorner(n, n).adjoint();
  out.bottomRightCorner(n, n) = lmr_step_raw(joint.bottomRightCorner(n, n), rho, dim_b, c, s);
  return hermitian_part(out);
}

}  // namespace detail

/// Controlled partial swap |0><0| x 1 + |1><1| x e^{-iS d} on joint x rho, fresh register traced.
inline DensityMatrix controlled_lmr_step(const DensityMatrix& joint, const DensityMatrix& rho, double delta_step) {
  detail::check_step(delta_step, "controlled_lmr_step");
  require(joint.dim() % 2 == 0, "controlled_lmr_step: joint state has no control qubit");
  const Index dim_b = detail::trailing_dim(joint.dim() / 2, rho.dim(), "controlled_lmr_step");
  return DensityMatrix::from_matrix(detail::controlled_step_raw(joint.matrix(), rho.matrix(), dim_b,
                                                                std::cos(delta_step), std::sin(delta_step)));
}

inline DensityMatrix controlled_lmr_step_explicit(const DensityMatrix& joint, const DensityMatrix& rho,
                                                  double delta_step) {
  detail::check_step(delta_step, "controlled_lmr_step_explicit");
  require(joint.dim() % 2 == 0, "controlled_lmr_step_explicit: joint state has no control qubit");
  const Index da = rho.dim();
  const Index db = detail::trailing_dim(joint.dim() / 2, da, "controlled_lmr_step_explicit");
  const std::vector<Index> dims{2, da, db, da};
  const ComplexMatrix swap = subsystem_swap(dims, 1, 3);
  const Index n = swap.rows();
  ComplexMatrix p1 = ComplexMatrix::Zero(2, 2);
  p1(1, 1) = 1.0;
  const ComplexMatrix on_one = kron(p1, identity(n / 2));
  const ComplexMatrix u = (identity(n) - on_one) +
                          on_one * (std::cos(delta_step) * identity(n) - kI * std::sin(delta_step) * swap);
  const ComplexMatrix out = conjugate(u, kron(joint.matrix(), rho.matrix()));
  return DensityMatrix::from_matrix(hermitian_part(partial_trace(out, dims, 3)));
}

/// Controlled e^{-i rho t} to error O(delta). No step wrapping: shifting the
/// step by pi would add a relative phase between the control branches.
inline SimulationResult controlled_lmr_simulate(const DensityMatrix& joint, const DensityMatrix& rho,
                                                const LmrConfig& config) {
  const long n = sample_budget(config);
  require(joint.dim() % 2 == 0, "controlled_lmr_simulate: joint state has no control qubit");
  const Index dim_b = detail::trailing_dim(joint.dim() / 2, rho.dim(), "controlled_lmr_simulate");
  const double d = config.t / static_cast<double>(n);
  detail::check_step(d, "controlled_lmr_simulate");
  const double c = std::cos(d), s = std::sin(d);
  ComplexMatrix m = joint.matrix();
  for (long k = 0; k < n; ++k) m = detail::controlled_step_raw(m, rho.matrix(), dim_b, c, s);
  return {DensityMatrix::from_matrix(m), n};
}

/// |0><0| x 1 + |1><1| x u
inline ComplexMatrix controlled(const ComplexMatrix& u) {
  const Index n = u.rows();
  ComplexMatrix out = ComplexMatrix::Zero(2 * n, 2 * n);
  out.topLeftCorner(n, n) = identity(n);
  out.bottomRightCorner(n, n) = u;
  return out;
}

}  // namespace dmexp
