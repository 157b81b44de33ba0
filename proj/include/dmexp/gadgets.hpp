#pragma once

// Signed partial swaps, linear combinations and the product gadgets that turn
// copies of several states into an effective Hamiltonian rho_plus - rho_minus.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "dmexp/lmr.hpp"

namespace dmexp {

/// |0><0| x plus + |1><1| x minus, encoding H = plus - minus.
class BlockPair {
 public:
  static BlockPair from_blocks(const ComplexMatrix& plus, const ComplexMatrix& minus) {
    require(plus.rows() == plus.cols() && plus.rows() > 0, "BlockPair: plus block must be square");
    require(minus.rows() == plus.rows() && minus.cols() == plus.cols(), "BlockPair: block dims differ");
    require(all_finite(plus) && all_finite(minus), "BlockPair: non-finite entry");
    require(is_hermitian(plus) && is_hermitian(minus), "BlockPair: blocks must be Hermitian");
    const double total = plus.trace().real() + minus.trace().real();
    require(std::abs(total - 1.0) <= tol::validation,
            "BlockPair: Tr(plus) + Tr(minus) = " + std::to_string(total) + ", expected 1");
    for (const ComplexMatrix* b : {&plus, &minus}) {
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(*b), Eigen::EigenvaluesOnly);
      require(es.eigenvalues().minCoeff() >= -tol::validation, "BlockPair: block is not positive semidefinite");
    }
    // rescaling only repairs roundoff; repeated steps would otherwise compound it
    return BlockPair(hermitian_part(plus) / total, hermitian_part(minus) / total);
  }

  /// Whole weight on one sign: plus = rho (sign > 0) or minus = rho (sign < 0).
  static BlockPair single(const DensityMatrix& rho, int sign) {
    const ComplexMatrix zero = ComplexMatrix::Zero(rho.dim(), rho.dim());
    return sign >= 0 ? BlockPair(rho.matrix(), zero) : BlockPair(zero, rho.matrix());
  }

  [[nodiscard]] Index dim() const { return plus_.rows(); }
  [[nodiscard]] const ComplexMatrix& plus() const { return plus_; }
  [[nodiscard]] const ComplexMatrix& minus() const { return minus_; }
  [[nodiscard]] ComplexMatrix hamiltonian() const { return plus_ - minus_; }

  /// The flagged state on ancilla x data.
  [[nodiscard]] ComplexMatrix joint() const {
    ComplexMatrix out = ComplexMatrix::Zero(2 * dim(), 2 * dim());
    out.topLeftCorner(dim(), dim()) = plus_;
    out.bottomRightCorner(dim(), dim()) = minus_;
    return out;
  }

 private:
  BlockPair(ComplexMatrix plus, ComplexMatrix minus) : plus_(std::move(plus)), minus_(std::move(minus)) {}
  ComplexMatrix plus_;
  ComplexMatrix minus_;
};

/// Convex combination sum_i w_i pair_i (weights non-negative, summing to one).
inline BlockPair mix_pairs(const std::vector<BlockPair>& pairs, const std::vector<double>& weights) {
  require(!pairs.empty() && pairs.size() == weights.size(), "mix_pairs: need one weight per pair");
  ComplexMatrix plus = ComplexMatrix::Zero(pairs[0].dim(), pairs[0].dim());
  ComplexMatrix minus = plus;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    require(pairs[i].dim() == pairs[0].dim(), "mix_pairs: dimension mismatch");
    require(weights[i] >= 0.0, "mix_pairs: negative weight");
    plus += weights[i] * pairs[i].plus();
    minus += weights[i] * pairs[i].minus();
  }
  return BlockPair::from_blocks(plus, minus);
}

// ---------------------------------------------------------------------------
// signed steps

namespace detail {

inline ComplexMatrix signed_step_raw(const ComplexMatrix& sigma, const BlockPair& pair, Index dim_b, double c,
                                     double s) {
  const ComplexMatrix h = pair.hamiltonian();
  const ComplexMatrix sum = pair.plus() + pair.minus();
  const ComplexMatrix r = dim_b == 1 ? h : kron(h, identity(dim_b));
  const ComplexMatrix marginal = dim_b == 1 ? ComplexMatrix::Constant(1, 1, sigma.trace())
                                            : partial_trace(sigma, {h.rows(), dim_b}, 0);
  // Tr(plus) + Tr(minus) = 1 lets c^2 sigma be written as sigma - s^2 sigma
  ComplexMatrix out = sigma + (s * s) * (kron(sum, marginal) - sigma) - (kI * s * c) * commutator(r, sigma);
  return hermitian_part(out);
}

}  // namespace detail

/// e^{-iS'd} on rho' x sigma with S' = |0><0| x S + |1><1| x (-S); ancilla and
/// fresh register traced out.
inline DensityMatrix signed_lmr_step(const DensityMatrix& sigma, const BlockPair& pair, double delta_step) {
  detail::check_step(delta_step, "signed_lmr_step");
  const Index dim_b = detail::trailing_dim(sigma.dim(), pair.dim(), "signed_lmr_step");
  return DensityMatrix::from_matrix(
      detail::signed_step_raw(sigma.matrix(), pair, dim_b, std::cos(delta_step), std::sin(delta_step)));
}

inline DensityMatrix signed_lmr_step_explicit(const DensityMatrix& sigma, const BlockPair& pair, double delta_step) {
  detail::check_step(delta_step, "signed_lmr_step_explicit");
  const Index da = pair.dim();
  const Index db = detail::trailing_dim(sigma.dim(), da, "signed_lmr_step_explicit");
  // registers: ancilla, A, B, fresh
  const std::vector<Index> dims{2, da, db, da};
  const ComplexMatrix signed_swap = kron(pauli::z(), identity(da * db * da)) * subsystem_swap(dims, 1, 3);
  const Index n = signed_swap.rows();
  const ComplexMatrix u = std::cos(delta_step) * identity(n) - kI * std::sin(delta_step) * signed_swap;
  ComplexMatrix p0 = ComplexMatrix::Zero(2, 2), p1 = ComplexMatrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  const ComplexMatrix joint =
      kron_all({p0, sigma.matrix(), pair.plus()}) + kron_all({p1, sigma.matrix(), pair.minus()});
  ComplexMatrix out = partial_trace(conjugate(u, joint), dims, 3);
  out = partial_trace(out, std::vector<Index>{2, da * db}, 0);
  return DensityMatrix::from_matrix(hermitian_part(out));
}

/// n = sample_budget(config) signed steps of size t/n with a fixed pair.
inline SimulationResult signed_lmr_simulate(const DensityMatrix& sigma, const BlockPair& pair,
                                            const LmrConfig& config) {
  const long n = sample_budget(config);
  const Index dim_b = detail::trailing_dim(sigma.dim(), pair.dim(), "signed_lmr_simulate");
  const double d = detail::wrap_step(config.t / static_cast<double>(n));
  const double c = std::cos(d), s = std::sin(d);
  ComplexMatrix m = sigma.matrix();
  for (long k = 0; k < n; ++k) m = detail::signed_step_raw(m, pair, dim_b, c, s);
  return {DensityMatrix::from_matrix(m), n};
}

// ---------------------------------------------------------------------------
// linear combinations

namespace detail {

inline double l1_norm(const std::vector<double>& coeffs) {
  double c = 0.0;
  for (double x : coeffs) {
    require(std::isfinite(x), "linear combination: non-finite coefficient");
    c += std::abs(x);
  }
  require(c > 0.0, "linear combination: all coefficients are zero");
  return c;
}

inline void check_states(const std::vector<DensityMatrix>& states, const char* who) {
  require(!states.empty(), std::string(who) + ": no states");
  for (const auto& s : states) require(s.dim() == states[0].dim(), std::string(who) + ": state dims differ");
}

}  // namespace detail

/// (1/c)[|0><0| x sum_{c_j>0} c_j rho_j + |1><1| x sum_{c_j<0} |c_j| rho_j], c = sum |c_j|.
inline BlockPair mix_linear_combination(const std::vector<DensityMatrix>& states, const std::vector<double>& coeffs) {
  detail::check_states(states, "mix_linear_combination");
  require(states.size() == coeffs.size(), "mix_linear_combination: need one coefficient per state");
  const double c = detail::l1_norm(coeffs);
  ComplexMatrix plus = ComplexMatrix::Zero(states[0].dim(), states[0].dim());
  ComplexMatrix minus = plus;
  for (std::size_t j = 0; j < states.size(); ++j) {
    if (coeffs[j] > 0.0) plus += (coeffs[j] / c) * states[j].matrix();
    if (coeffs[j] < 0.0) minus += (-coeffs[j] / c) * states[j].matrix();
  }
  return BlockPair::from_blocks(plus, minus);
}

/// Sampled form: each draw picks j with probability |c_j|/c and flags rho_j by sign(c_j).
class LinearCombinationSampler {
 public:
  LinearCombinationSampler(std::vector<DensityMatrix> states, std::vector<double> coeffs)
      : states_(std::move(states)), coeffs_(std::move(coeffs)) {
    detail::check_states(states_, "LinearCombinationSampler");
    require(states_.size() == coeffs_.size(), "LinearCombinationSampler: need one coefficient per state");
    c_ = detail::l1_norm(coeffs_);
    for (double x : coeffs_) weights_.push_back(std::abs(x));
  }

  [[nodiscard]] double norm() const { return c_; }

  std::size_t draw_index(CounterRng& rng) const { return rng.categorical(weights_); }

  BlockPair draw(CounterRng& rng) const {
    const std::size_t j = draw_index(rng);
    return BlockPair::single(states_[j], coeffs_[j] >= 0.0 ? 1 : -1);
  }

 private:
  std::vector<DensityMatrix> states_;
  std::vector<double> coeffs_;
  std::vector<double> weights_;
  double c_ = 0.0;
};

// ---------------------------------------------------------------------------
// product gadgets

/// Ancilla (|0> + e^{-i phi}|1>)/sqrt2 controls a cyclic shift of
/// rho_1 x ... x rho_k; registers 2..k are traced, the ancilla is Hadamarded and
/// dephased. plus - minus = (e^{i phi} rho_1...rho_k + e^{-i phi} rho_k...rho_1)/2.
inline BlockPair polynomial_gadget(const std::vector<DensityMatrix>& states, double phi) {
  detail::check_states(states, "polynomial_gadget");
  require(std::isfinite(phi), "polynomial_gadget: non-finite phase");
  const int k = static_cast<int>(states.size());
  if (k == 1) {
    require(std::abs(std::remainder(phi, 2.0 * std::numbers::pi)) <= tol::exact,
            "polynomial_gadget: a single-state term needs phi = 0");
    return BlockPair::single(states[0], 1);
  }
  const Index d = states[0].dim();
  ComplexMatrix regs = ComplexMatrix::Identity(1, 1);
  for (const auto& s : states) regs = kron(regs, s.matrix());
  const Index n = regs.rows();

  ComplexVector anc(2);
  anc << 1.0 / std::sqrt(2.0), std::exp(-kI * phi) / std::sqrt(2.0);
  const ComplexMatrix anc_state = anc * anc.adjoint();

  const ComplexMatrix shift = cyclic_shift(k, d);
  // controlled shift applied blockwise: block (a,b) picks up S^a on the left, S^-b on the right
  ComplexMatrix blocks[2][2];
  blocks[0][0] = anc_state(0, 0) * regs;
  blocks[0][1] = anc_state(0, 1) * regs * shift.adjoint();
  blocks[1][0] = anc_state(1, 0) * shift * regs;
  blocks[1][1] = anc_state(1, 1) * shift * regs * shift.adjoint();

  // trace registers 2..k: view each block on C^d x C^{d^{k-1}}
  const std::vector<Index> split{d, n / d};
  ComplexMatrix reduced[2][2];
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) reduced[a][b] = partial_trace(blocks[a][b], split, 1);

  // Hadamard then keep diagonal ancilla blocks
  const ComplexMatrix plus = 0.5 * (reduced[0][0] + reduced[0][1] + reduced[1][0] + reduced[1][1]);
  const ComplexMatrix minus = 0.5 * (reduced[0][0] - reduced[0][1] - reduced[1][0] + reduced[1][1]);
  return BlockPair::from_blocks(plus, minus);
}

/// Two-state case: plus - minus = (e^{i phi} rho1 rho2 + e^{-i phi} rho2 rho1)/2.
inline BlockPair commutator_gadget(const DensityMatrix& rho1, const DensityMatrix& rho2, double phi) {
  require(rho1.dim() == rho2.dim(), "commutator_gadget: state dims differ");
  return polynomial_gadget({rho1, rho2}, phi);
}

// ---------------------------------------------------------------------------
// Hermitian polynomials

struct PolynomialTerm {
  std::vector<int> indices;  // 1-based
  double phase = 0.0;
  double coeff = 1.0;
};

/// "12" -> {1, 2}; "1,10,3" -> {1, 10, 3}
inline std::vector<int> parse_indices(const std::string& r) {
  std::vector<int> out;
  require(!r.empty(), "parse_indices: empty index string");
  if (r.find(',') == std::string::npos) {
    for (char ch : r) {
      require(ch >= '1' && ch <= '9', "parse_indices: bad index character in \"" + r + "\"");
      out.push_back(ch - '0');
    }
    return out;
  }
  std::size_t pos = 0;
  while (pos <= r.size()) {
    const std::size_t next = std::min(r.find(',', pos), r.size());
    const std::string tok = r.substr(pos, next - pos);
    require(!tok.empty() && tok.find_first_not_of("0123456789") == std::string::npos,
            "parse_indices: bad index \"" + tok + "\"");
    out.push_back(std::stoi(tok));
    pos = next + 1;
  }
  return out;
}

inline std::string format_indices(const std::vector<int>& idx) {
  bool short_form = true;
  for (int i : idx) short_form = short_form && i >= 1 && i <= 9;
  std::string out;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (!short_form && i > 0) out += ',';
    out += std::to_string(idx[i]);
  }
  return out;
}

class HermitianPolynomial {
 public:
  HermitianPolynomial(int k, std::vector<PolynomialTerm> terms) : k_(k), terms_(std::move(terms)) {
    require(k_ >= 1, "HermitianPolynomial: K must be positive");
    require(!terms_.empty(), "HermitianPolynomial: no terms");
    double c = 0.0;
    for (auto& term : terms_) {
      require(!term.indices.empty(), "HermitianPolynomial: empty index string");
      for (int i : term.indices)
        require(i >= 1 && i <= k_, "HermitianPolynomial: index " + std::to_string(i) + " outside 1.." +
                                       std::to_string(k_));
      require(std::isfinite(term.phase) && std::isfinite(term.coeff), "HermitianPolynomial: non-finite term");
      term.phase = normalize_angle(term.phase);
      c += std::abs(term.coeff);
    }
    require(c > 0.0, "HermitianPolynomial: sum of |c_r| must be positive");
  }

  [[nodiscard]] int num_states() const { return k_; }
  [[nodiscard]] const std::vector<PolynomialTerm>& terms() const { return terms_; }

  /// c = sum |c_r|
  [[nodiscard]] double c() const {
    double c = 0.0;
    for (const auto& t : terms_) c += std::abs(t.coeff);
    return c;
  }

  /// L = max |r|
  [[nodiscard]] std::size_t max_degree() const {
    std::size_t l = 0;
    for (const auto& t : terms_) l = std::max(l, t.indices.size());
    return l;
  }

  /// kappa_j = sum_r v_j(r) |c_r| / c, v_j(r) the multiplicity of j in r (1-based j).
  [[nodiscard]] double kappa(int j) const {
    double acc = 0.0;
    for (const auto& t : terms_)
      acc += static_cast<double>(std::count(t.indices.begin(), t.indices.end(), j)) * std::abs(t.coeff);
    return acc / c();
  }

  /// Terms rewritten for the gadget: c_r >= 0 with the sign folded into the
  /// phase; degree-one terms carry c_r cos(phi_r) at phase 0. Zero terms dropped.
  [[nodiscard]] std::vector<PolynomialTerm> canonical_terms() const {
    std::vector<PolynomialTerm> out;
    for (const auto& t : terms_) {
      PolynomialTerm u = t;
      if (u.indices.size() == 1) {
        // a negative degree-one term keeps its sign; the minus block carries it
        u.coeff = t.coeff * std::cos(t.phase);
        u.phase = 0.0;
      } else if (u.coeff < 0.0) {
        u.coeff = -u.coeff;
        u.phase = normalize_angle(u.phase + std::numbers::pi);
      }
      if (u.coeff != 0.0) out.push_back(u);
    }
    require(!out.empty(), "HermitianPolynomial: polynomial is identically zero");
    return out;
  }

  static double normalize_angle(double a) {
    double r = std::fmod(a, 2.0 * std::numbers::pi);
    if (r < 0.0) r += 2.0 * std::numbers::pi;
    if (r >= 2.0 * std::numbers::pi) r = 0.0;
    return r;
  }

 private:
  int k_;
  std::vector<PolynomialTerm> terms_;
};

namespace detail {

inline void check_poly_states(const HermitianPolynomial& poly, const std::vector<DensityMatrix>& states) {
  check_states(states, "polynomial");
  require(static_cast<int>(states.size()) == poly.num_states(),
          "polynomial: expected " + std::to_string(poly.num_states()) + " states, got " +
              std::to_string(states.size()));
}

inline std::vector<DensityMatrix> select_states(const std::vector<DensityMatrix>& states,
                                                const std::vector<int>& idx) {
  std::vector<DensityMatrix> out;
  out.reserve(idx.size());
  for (int i : idx) {
    require(i >= 1 && static_cast<std::size_t>(i) <= states.size(), "polynomial: index out of range");
    out.push_back(states[static_cast<std::size_t>(i - 1)]);
  }
  return out;
}

inline BlockPair term_pair(const PolynomialTerm& term, const std::vector<DensityMatrix>& states) {
  if (term.indices.size() == 1)
    return BlockPair::single(states[static_cast<std::size_t>(term.indices[0] - 1)], term.coeff >= 0.0 ? 1 : -1);
  return polynomial_gadget(select_states(states, term.indices), term.phase);
}

}  // namespace detail

/// H = sum_r c_r (e^{i phi_r} rho_r1...rho_rk + h.c.)/2 by direct multiplication.
inline ComplexMatrix polynomial_matrix(const HermitianPolynomial& poly, const std::vector<DensityMatrix>& states) {
  detail::check_poly_states(poly, states);
  const Index d = states[0].dim();
  ComplexMatrix h = ComplexMatrix::Zero(d, d);
  for (const auto& term : poly.terms()) {
    ComplexMatrix prod = identity(d);
    for (const auto& s : detail::select_states(states, term.indices)) prod = prod * s.matrix();
    const ComplexMatrix x = std::exp(kI * term.phase) * prod;
    h += (0.5 * term.coeff) * (x + x.adjoint());
  }
  return h;
}

/// Mixture of the per-term gadgets weighted |c_r|/c; plus - minus = H/c.
inline BlockPair polynomial_block_pair(const HermitianPolynomial& poly, const std::vector<DensityMatrix>& states) {
  detail::check_poly_states(poly, states);
  const auto terms = poly.canonical_terms();
  double c = 0.0;
  for (const auto& t : terms) c += std::abs(t.coeff);
  std::vector<BlockPair> pairs;
  std::vector<double> weights;
  for (const auto& t : terms) {
    pairs.push_back(detail::term_pair(t, states));
    weights.push_back(std::abs(t.coeff) / c);
  }
  return mix_pairs(pairs, weights);
}

enum class SamplingMode { exact, sampled };

struct PolynomialRun {
  DensityMatrix state;
  long steps;
  double norm;                       // c of the canonical terms; the protocol runs for time c t
  std::vector<double> sample_counts;  // copies of rho_j consumed (expected in exact mode)
};

/// e^{-iHt} sigma e^{iHt} for H = polynomial_matrix(poly, states), via signed
/// steps of size ct/n with n = sample_budget at time ct.
inline PolynomialRun simulate_polynomial(const DensityMatrix& sigma, const HermitianPolynomial& poly,
                                         const std::vector<DensityMatrix>& states, const LmrConfig& config,
                                         SamplingMode mode, CounterRng rng) {
  detail::check_poly_states(poly, states);
  const auto terms = poly.canonical_terms();
  double c = 0.0;
  for (const auto& t : terms) c += std::abs(t.coeff);
  LmrConfig scaled = config;
  scaled.t = c * config.t;
  const long n = sample_budget(scaled);
  const Index dim_b = detail::trailing_dim(sigma.dim(), states[0].dim(), "simulate_polynomial");
  const double d = detail::wrap_step(scaled.t / static_cast<double>(n));
  const double cs = std::cos(d), sn = std::sin(d);
  std::vector<double> counts(states.size(), 0.0);
  ComplexMatrix m = sigma.matrix();

  if (mode == SamplingMode::exact) {
    const BlockPair pair = polynomial_block_pair(poly, states);
    for (long k = 0; k < n; ++k) m = detail::signed_step_raw(m, pair, dim_b, cs, sn);
    for (std::size_t j = 0; j < states.size(); ++j) {
      double kappa = 0.0;
      for (const auto& t : terms)
        kappa += static_cast<double>(std::count(t.indices.begin(), t.indices.end(), static_cast<int>(j + 1))) *
                 std::abs(t.coeff) / c;
      counts[j] = static_cast<double>(n) * kappa;
    }
  } else {
    std::vector<BlockPair> pairs;
    std::vector<double> weights;
    for (const auto& t : terms) {
      pairs.push_back(detail::term_pair(t, states));
      weights.push_back(std::abs(t.coeff));
    }
    for (long k = 0; k < n; ++k) {
      const std::size_t r = rng.categorical(weights);
      for (int j : terms[r].indices) counts[static_cast<std::size_t>(j - 1)] += 1.0;
      m = detail::signed_step_raw(m, pairs[r], dim_b, cs, sn);
    }
  }
  return {DensityMatrix::from_matrix(m), n, c, std::move(counts)};
}

}  // namespace dmexp
