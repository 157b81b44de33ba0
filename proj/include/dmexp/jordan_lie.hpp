#pragma once

// Rewriting z rho_r1 ... rho_rk + h.c. as nested anticommutators and
// i-commutators, plus a numerical evaluator.

#include <complex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dmexp/linalg.hpp"

namespace dmexp {

struct JordanLieExpr {
  enum class Kind { leaf, anticommutator, icommutator, scale, sum };

  Kind kind = Kind::leaf;
  int index = 0;        // leaf: 1-based state index
  double factor = 1.0;  // scale
  std::vector<JordanLieExpr> children;

  static JordanLieExpr leaf(int i) { return {Kind::leaf, i, 1.0, {}}; }
  static JordanLieExpr anticomm(JordanLieExpr a, JordanLieExpr b) {
    return {Kind::anticommutator, 0, 1.0, {std::move(a), std::move(b)}};
  }
  static JordanLieExpr icomm(JordanLieExpr a, JordanLieExpr b) {
    return {Kind::icommutator, 0, 1.0, {std::move(a), std::move(b)}};
  }
  static JordanLieExpr scale(double f, JordanLieExpr a) { return {Kind::scale, 0, f, {std::move(a)}}; }
  static JordanLieExpr sum(std::vector<JordanLieExpr> terms) { return {Kind::sum, 0, 1.0, std::move(terms)}; }

  friend bool operator==(const JordanLieExpr&, const JordanLieExpr&) = default;
};

namespace detail {

// linear combination of coefficient-free bracket trees
using JordanLieTerms = std::vector<std::pair<double, JordanLieExpr>>;

template <class Bracket>
void append_bracketed(JordanLieTerms& out, const JordanLieTerms& in, double weight, int next, Bracket bracket) {
  for (const auto& [coef, tree] : in) out.emplace_back(weight * coef, bracket(tree, JordanLieExpr::leaf(next)));
}

}  // namespace detail

/// Expression equal to z rho_r1...rho_rk + (z rho_r1...rho_rk)^dag.
///
/// With P_k = A_k + i B_k (A, B Hermitian) and P_k = P_{k-1} rho:
///   A_k =  {A_{k-1}, rho}/2 + i[B_{k-1}, rho]/2
///   B_k = -i[A_{k-1}, rho]/2 + {B_{k-1}, rho}/2
/// and z P + h.c. = 2 Re(z) A - 2 Im(z) B.
inline JordanLieExpr jordan_lie_expand(const std::vector<int>& indices, Complex z) {
  require(!indices.empty(), "jordan_lie_expand: empty index string");
  for (int i : indices) require(i >= 1, "jordan_lie_expand: indices are 1-based");
  using detail::JordanLieTerms;
  JordanLieTerms a{{1.0, JordanLieExpr::leaf(indices[0])}};
  JordanLieTerms b;
  for (std::size_t k = 1; k < indices.size(); ++k) {
    JordanLieTerms na, nb;
    detail::append_bracketed(na, a, 0.5, indices[k], JordanLieExpr::anticomm);
    detail::append_bracketed(na, b, 0.5, indices[k], JordanLieExpr::icomm);
    detail::append_bracketed(nb, a, -0.5, indices[k], JordanLieExpr::icomm);
    detail::append_bracketed(nb, b, 0.5, indices[k], JordanLieExpr::anticomm);
    a = std::move(na);
    b = std::move(nb);
  }
  std::vector<JordanLieExpr> terms;
  auto emit = [&terms](const JordanLieTerms& part, double weight) {
    if (weight == 0.0) return;
    for (const auto& [coef, tree] : part) {
      const double f = weight * coef;
      if (f == 0.0) continue;
      terms.push_back(f == 1.0 ? tree : JordanLieExpr::scale(f, tree));
    }
  };
  emit(a, 2.0 * z.real());
  emit(b, -2.0 * z.imag());
  if (terms.empty()) return JordanLieExpr::scale(0.0, JordanLieExpr::leaf(indices[0]));
  if (terms.size() == 1) return terms.front();
  return JordanLieExpr::sum(std::move(terms));
}

inline ComplexMatrix eval_jordan_lie(const JordanLieExpr& e, const std::vector<DensityMatrix>& states) {
  using K = JordanLieExpr::Kind;
  switch (e.kind) {
    case K::leaf:
      require(e.index >= 1 && static_cast<std::size_t>(e.index) <= states.size(),
              "eval_jordan_lie: leaf index " + std::to_string(e.index) + " out of range");
      return states[static_cast<std::size_t>(e.index - 1)].matrix();
    case K::anticommutator:
      require(e.children.size() == 2, "eval_jordan_lie: bracket needs two children");
      return anticommutator(eval_jordan_lie(e.children[0], states), eval_jordan_lie(e.children[1], states));
    case K::icommutator:
      require(e.children.size() == 2, "eval_jordan_lie: bracket needs two children");
      return kI * commutator(eval_jordan_lie(e.children[0], states), eval_jordan_lie(e.children[1], states));
    case K::scale:
      require(e.children.size() == 1, "eval_jordan_lie: scale needs one child");
      return e.factor * eval_jordan_lie(e.children[0], states);
    case K::sum: {
      require(!e.children.empty(), "eval_jordan_lie: empty sum");
      ComplexMatrix acc = eval_jordan_lie(e.children[0], states);
      for (std::size_t i = 1; i < e.children.size(); ++i) acc += eval_jordan_lie(e.children[i], states);
      return acc;
    }
  }
  throw ValidationError("eval_jordan_lie: unknown node kind");
}

/// Human-readable form: {a, b} for anticommutators, i[a, b] for i-commutators.
inline std::string to_string(const JordanLieExpr& e) {
  using K = JordanLieExpr::Kind;
  switch (e.kind) {
    case K::leaf:
      return "p" + std::to_string(e.index);
    case K::anticommutator:
      return "{" + to_string(e.children[0]) + ", " + to_string(e.children[1]) + "}";
    case K::icommutator:
      return "i[" + to_string(e.children[0]) + ", " + to_string(e.children[1]) + "]";
    case K::scale: {
      std::ostringstream os;
      os.precision(17);
      os << e.factor << "*" << to_string(e.children[0]);
      return os.str();
    }
    case K::sum: {
      std::string out;
      for (std::size_t i = 0; i < e.children.size(); ++i) out += (i ? " + " : "") + to_string(e.children[i]);
      return out;
    }
  }
  return {};
}

/// Number of nodes, a rough size measure for reports.
inline std::size_t node_count(const JordanLieExpr& e) {
  std::size_t n = 1;
  for (const auto& c : e.children) n += node_count(c);
  return n;
}

}  // namespace dmexp
