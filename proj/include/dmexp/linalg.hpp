#pragma once

// Dense complex linear algebra: the exact oracle layer.
//
// Operators are plain Eigen::MatrixXcd. States carry their invariants in the
// DensityMatrix and PureState value types, which can only be obtained through
// validating factories.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dmexp/error.hpp"
#include "dmexp/rng.hpp"

namespace dmexp {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr Complex kI{0.0, 1.0};

namespace tol {
inline constexpr double exact = 1e-12;       // algebraic identities
inline constexpr double validation = 1e-10;  // input checks
inline constexpr double clip = 1e-10;        // eigenvalue clipping window
}  // namespace tol

// ---------------------------------------------------------------------------
// small helpers

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool all_finite(const ComplexMatrix& m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

inline double hermiticity_defect(const ComplexMatrix& m) { return max_abs(m - m.adjoint()); }

inline bool is_hermitian(const ComplexMatrix& m, double tolerance = tol::validation) {
  return m.rows() == m.cols() && hermiticity_defect(m) <= tolerance;
}

inline bool is_unitary(const ComplexMatrix& m, double tolerance = tol::validation) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m.adjoint() * m - ComplexMatrix::Identity(m.rows(), m.cols())) <= tolerance;
}

inline ComplexMatrix hermitian_part(const ComplexMatrix& m) { return 0.5 * (m + m.adjoint()); }

inline ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b - b * a;
}

inline ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b + b * a;
}

inline ComplexMatrix conjugate(const ComplexMatrix& u, const ComplexMatrix& m) {
  return u * m * u.adjoint();
}

inline ComplexMatrix identity(Index d) { return ComplexMatrix::Identity(d, d); }

inline std::string dims_string(Index r, Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

namespace pauli {
inline ComplexMatrix x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
inline ComplexMatrix y() {
  ComplexMatrix m(2, 2);
  m << 0, -kI, kI, 0;
  return m;
}
inline ComplexMatrix z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
inline ComplexMatrix hadamard() {
  ComplexMatrix m(2, 2);
  m << 1, 1, 1, -1;
  return m / std::sqrt(2.0);
}
}  // namespace pauli

// ---------------------------------------------------------------------------
// state types

class PureState {
 public:
  /// Rejects vectors whose norm is not within 1e-12 of one.
  static PureState from_amplitudes(ComplexVector amplitudes) {
    require(amplitudes.size() > 0, "PureState: empty amplitude vector");
    require(all_finite(amplitudes), "PureState: non-finite amplitude");
    require(std::abs(amplitudes.norm() - 1.0) <= tol::exact,
            "PureState: norm deviates from 1 by " + std::to_string(std::abs(amplitudes.norm() - 1.0)));
    return PureState(std::move(amplitudes));
  }

  static PureState normalized(ComplexVector amplitudes) {
    require(amplitudes.size() > 0 && all_finite(amplitudes), "PureState: invalid amplitudes");
    const double n = amplitudes.norm();
    require(n > 0.0, "PureState: zero vector");
    return PureState(amplitudes / n);
  }

  static PureState basis(Index dim, Index k) {
    require(dim >= 1 && k >= 0 && k < dim, "PureState::basis: index out of range");
    ComplexVector v = ComplexVector::Zero(dim);
    v(k) = 1.0;
    return PureState(std::move(v));
  }

  /// |+> = (|0> + |1>)/sqrt(2) on one qubit.
  static PureState plus() {
    ComplexVector v(2);
    v << 1.0, 1.0;
    return PureState(v / std::sqrt(2.0));
  }

  static PureState minus() {
    ComplexVector v(2);
    v << 1.0, -1.0;
    return PureState(v / std::sqrt(2.0));
  }

  [[nodiscard]] Index dim() const { return amplitudes_.size(); }
  [[nodiscard]] const ComplexVector& amplitudes() const { return amplitudes_; }
  [[nodiscard]] ComplexMatrix projector() const { return amplitudes_ * amplitudes_.adjoint(); }
  [[nodiscard]] Complex inner(const PureState& other) const { return amplitudes_.dot(other.amplitudes_); }

  [[nodiscard]] PureState tensor(const PureState& other) const {
    ComplexVector v(dim() * other.dim());
    for (Index i = 0; i < dim(); ++i) v.segment(i * other.dim(), other.dim()) = amplitudes_(i) * other.amplitudes_;
    return PureState(std::move(v));
  }

 private:
  explicit PureState(ComplexVector v) : amplitudes_(std::move(v)) {}
  ComplexVector amplitudes_;
};

class DensityMatrix {
 public:
  /// Validates Hermiticity (1e-12), unit trace (1e-12) and positivity
  /// (min eigenvalue >= -1e-10). Eigenvalues in [-1e-10, 0) are clipped to 0.
  static DensityMatrix from_matrix(const ComplexMatrix& m) {
    require(m.rows() == m.cols() && m.rows() > 0,
            "DensityMatrix: expected non-empty square matrix, got " + dims_string(m.rows(), m.cols()));
    require(all_finite(m), "DensityMatrix: non-finite entry");
    const double herm = hermiticity_defect(m);
    require(herm <= tol::exact, "DensityMatrix: not Hermitian (defect " + std::to_string(herm) + ")");
    ComplexMatrix h = hermitian_part(m);
    const double tr_err = std::abs(h.trace() - Complex(1.0));
    require(tr_err <= tol::exact, "DensityMatrix: trace deviates from 1 by " + std::to_string(tr_err));
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
    const double min_eig = es.eigenvalues().minCoeff();
    require(min_eig >= -tol::clip, "DensityMatrix: negative eigenvalue " + std::to_string(min_eig));
    if (min_eig < 0.0) {
      Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
      h = es.eigenvectors() * ev.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
      h = hermitian_part(h);
    }
    return DensityMatrix(std::move(h));
  }

  static DensityMatrix pure(const PureState& psi) { return DensityMatrix(psi.projector()); }

  static DensityMatrix basis(Index dim, Index k) { return pure(PureState::basis(dim, k)); }

  static DensityMatrix maximally_mixed(Index dim) {
    require(dim >= 1, "DensityMatrix::maximally_mixed: dim must be positive");
    return DensityMatrix(identity(dim) / static_cast<double>(dim));
  }

  /// rho(x) = x|0><0| + (1-x)|1><1|
  static DensityMatrix qubit_diagonal(double x) {
    require(x >= 0.0 && x <= 1.0, "DensityMatrix::qubit_diagonal: x outside [0,1]");
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 0) = x;
    m(1, 1) = 1.0 - x;
    return DensityMatrix(std::move(m));
  }

  [[nodiscard]] Index dim() const { return m_.rows(); }
  [[nodiscard]] const ComplexMatrix& matrix() const { return m_; }
  [[nodiscard]] double purity() const { return (m_ * m_).trace().real(); }

  [[nodiscard]] double expectation(const ComplexMatrix& observable) const {
    return (observable * m_).trace().real();
  }

 private:
  explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {}
  ComplexMatrix m_;
};

// ---------------------------------------------------------------------------
// tensor structure

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline ComplexMatrix kron_all(std::initializer_list<ComplexMatrix> factors) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

inline Index product(std::span<const Index> dims) {
  return std::accumulate(dims.begin(), dims.end(), Index{1}, std::multiplies<>());
}

/// Trace over subsystem `which` of an operator on dims[0] x dims[1] x ...
inline ComplexMatrix partial_trace(const ComplexMatrix& m, std::span<const Index> dims, std::size_t which) {
  require(!dims.empty() && which < dims.size(), "partial_trace: subsystem index out of range");
  for (Index d : dims) require(d >= 1, "partial_trace: subsystem dims must be positive");
  const Index total = product(dims);
  require(m.rows() == total && m.cols() == total,
          "partial_trace: matrix is " + dims_string(m.rows(), m.cols()) + " but dims multiply to " +
              std::to_string(total));
  const Index left = product(dims.first(which));
  const Index mid = dims[which];
  const Index right = product(dims.subspan(which + 1));
  const Index out_dim = left * right;
  ComplexMatrix out = ComplexMatrix::Zero(out_dim, out_dim);
  for (Index l1 = 0; l1 < left; ++l1)
    for (Index r1 = 0; r1 < right; ++r1)
      for (Index l2 = 0; l2 < left; ++l2)
        for (Index r2 = 0; r2 < right; ++r2) {
          Complex acc = 0.0;
          for (Index j = 0; j < mid; ++j) acc += m((l1 * mid + j) * right + r1, (l2 * mid + j) * right + r2);
          out(l1 * right + r1, l2 * right + r2) = acc;
        }
  return out;
}

inline ComplexMatrix partial_trace(const ComplexMatrix& m, std::initializer_list<Index> dims, std::size_t which) {
  std::vector<Index> d(dims);
  return partial_trace(m, std::span<const Index>(d), which);
}

/// Permutation operator mapping |i_0 ... i_{k-1}> to the basis state whose
/// subsystem perm[s] holds i_s. Requires dims[s] == dims[perm[s]] wherever the
/// permutation moves a factor into a slot of different size.
inline ComplexMatrix permute_subsystems(std::span<const Index> dims, std::span<const std::size_t> perm) {
  const std::size_t k = dims.size();
  require(perm.size() == k, "permute_subsystems: permutation size mismatch");
  std::vector<Index> out_dims(k);
  std::vector<bool> seen(k, false);
  for (std::size_t s = 0; s < k; ++s) {
    require(perm[s] < k && !seen[perm[s]], "permute_subsystems: not a permutation");
    seen[perm[s]] = true;
    out_dims[perm[s]] = dims[s];
  }
  const Index total = product(dims);
  ComplexMatrix p = ComplexMatrix::Zero(total, total);
  std::vector<Index> digits(k), out_digits(k);
  for (Index src = 0; src < total; ++src) {
    Index rem = src;
    for (std::size_t s = k; s-- > 0;) {
      digits[s] = rem % dims[s];
      rem /= dims[s];
    }
    for (std::size_t s = 0; s < k; ++s) out_digits[perm[s]] = digits[s];
    Index dst = 0;
    for (std::size_t s = 0; s < k; ++s) dst = dst * out_dims[s] + out_digits[s];
    p(dst, src) = 1.0;
  }
  return p;
}

/// Swap of two equal-dimension subsystems i and j inside a larger register.
inline ComplexMatrix subsystem_swap(std::span<const Index> dims, std::size_t i, std::size_t j) {
  require(i < dims.size() && j < dims.size() && dims[i] == dims[j], "subsystem_swap: incompatible subsystems");
  std::vector<std::size_t> perm(dims.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::swap(perm[i], perm[j]);
  return permute_subsystems(dims, perm);
}

/// S_k |j_1 ... j_k> = |j_k j_1 ... j_{k-1}> on k copies of C^d.
inline ComplexMatrix cyclic_shift(int k, Index d) {
  require(k >= 2, "cyclic_shift: k must be at least 2");
  require(d >= 1, "cyclic_shift: d must be positive");
  std::vector<Index> dims(static_cast<std::size_t>(k), d);
  std::vector<std::size_t> perm(dims.size());
  for (std::size_t s = 0; s < perm.size(); ++s) perm[s] = (s + 1) % perm.size();
  return permute_subsystems(dims, perm);
}

inline ComplexMatrix swap_operator(Index d) { return cyclic_shift(2, d); }

// ---------------------------------------------------------------------------
// exponentials and distances

/// e^{-i h t} by Hermitian eigendecomposition.
inline ComplexMatrix herm_exp(const ComplexMatrix& h, double t) {
  require(h.rows() == h.cols(), "herm_exp: matrix must be square");
  require(all_finite(h), "herm_exp: non-finite entry");
  require(hermiticity_defect(h) <= tol::validation, "herm_exp: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(h));
  ComplexVector phases(h.rows());
  for (Index i = 0; i < h.rows(); ++i) phases(i) = std::exp(-kI * es.eigenvalues()(i) * t);
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// (1/2)||a - b||_1 for Hermitian a, b (not necessarily normalized).
inline double trace_norm_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "trace_distance: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(a - b), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  require(a.dim() == b.dim(), "trace_distance: dimension mismatch");
  return std::clamp(trace_norm_distance(a.matrix(), b.matrix()), 0.0, 1.0);
}

/// <psi|rho|psi>
inline double fidelity(const PureState& psi, const DensityMatrix& rho) {
  require(psi.dim() == rho.dim(), "fidelity: dimension mismatch");
  return psi.amplitudes().dot(rho.matrix() * psi.amplitudes()).real();
}

namespace geometry {

struct Point {
  double x;
  double y;
};

inline double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

/// Convex hull in counter-clockwise order; collinear points dropped.
inline std::vector<Point> convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Point& a, const Point& b) {
                          return std::abs(a.x - b.x) <= tol::exact && std::abs(a.y - b.y) <= tol::exact;
                        }),
            pts.end());
  if (pts.size() <= 2) return pts;
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

inline double distance_to_segment(const Point& p, const Point& a, const Point& b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double s = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return std::hypot(p.x - (a.x + s * dx), p.y - (a.y + s * dy));
}

/// Euclidean distance from the origin to the convex hull of `pts`.
inline double origin_distance_to_hull(const std::vector<Point>& pts) {
  require(!pts.empty(), "origin_distance_to_hull: no points");
  const auto hull = convex_hull(pts);
  const Point origin{0.0, 0.0};
  if (hull.size() == 1) return std::hypot(hull[0].x, hull[0].y);
  if (hull.size() == 2) return distance_to_segment(origin, hull[0], hull[1]);
  bool inside = true;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    if (cross(a, b, origin) < 0.0) inside = false;
    best = std::min(best, distance_to_segment(origin, a, b));
  }
  return inside ? 0.0 : best;
}

}  // namespace geometry

/// (1/2)||U . U^dag - V . V^dag||_diamond = sqrt(1 - d^2), d the distance from
/// the origin to the convex hull of the spectrum of U^dag V.
inline double unitary_diamond_distance(const ComplexMatrix& u, const ComplexMatrix& v) {
  require(u.rows() == v.rows() && u.cols() == v.cols(), "unitary_diamond_distance: dimension mismatch");
  require(is_unitary(u) && is_unitary(v), "unitary_diamond_distance: inputs must be unitary");
  Eigen::ComplexEigenSolver<ComplexMatrix> es(u.adjoint() * v, false);
  std::vector<geometry::Point> pts;
  pts.reserve(static_cast<std::size_t>(u.rows()));
  for (Index i = 0; i < u.rows(); ++i) pts.push_back({es.eigenvalues()(i).real(), es.eigenvalues()(i).imag()});
  const double d = std::min(1.0, geometry::origin_distance_to_hull(pts));
  return std::clamp(std::sqrt(std::max(0.0, 1.0 - d * d)), 0.0, 1.0);
}

/// sum_{n <= order} ad_a^n(b) / n!  (truncated e^a b e^{-a})
inline ComplexMatrix hadamard_series(const ComplexMatrix& a, const ComplexMatrix& b, int order) {
  require(a.rows() == a.cols() && b.rows() == b.cols() && a.rows() == b.rows(),
          "hadamard_series: operands must be square with equal dims");
  require(order >= 0, "hadamard_series: order must be non-negative");
  ComplexMatrix term = b;
  ComplexMatrix sum = b;
  for (int n = 1; n <= order; ++n) {
    term = commutator(a, term) / static_cast<double>(n);
    sum += term;
  }
  return sum;
}

// ---------------------------------------------------------------------------
// random inputs

inline ComplexVector gaussian_vector(Index n, CounterRng& rng) {
  ComplexVector g(n);
  for (Index i = 0; i < n; ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    g(i) = Complex(re, im);
  }
  return g;
}

inline PureState random_pure_state(Index dim, CounterRng& rng) {
  require(dim >= 1, "random_pure_state: dim must be positive");
  return PureState::normalized(gaussian_vector(dim, rng));
}

/// Rank-`rank` state: partial trace of a Haar-random pure state on dim x rank.
inline DensityMatrix random_state(Index dim, Index rank, CounterRng& rng) {
  require(dim >= 1, "random_state: dim must be positive");
  require(rank >= 1 && rank <= dim, "random_state: rank must lie in [1, dim]");
  ComplexVector g = gaussian_vector(dim * rank, rng);
  g /= g.norm();
  const ComplexMatrix amp = Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      g.data(), dim, rank);
  ComplexMatrix rho = amp * amp.adjoint();
  rho = hermitian_part(rho);
  rho /= rho.trace().real();
  return DensityMatrix::from_matrix(rho);
}

inline DensityMatrix random_state(Index dim, Index rank, std::uint64_t seed) {
  CounterRng rng(seed);
  return random_state(dim, rank, rng);
}

/// Haar-random unitary (QR of a Ginibre matrix with phase correction).
inline ComplexMatrix random_unitary(Index dim, CounterRng& rng) {
  ComplexMatrix z(dim, dim);
  for (Index j = 0; j < dim; ++j) z.col(j) = gaussian_vector(dim, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < dim; ++j) {
    const Complex d = r(j, j);
    q.col(j) *= std::abs(d) > 0.0 ? d / std::abs(d) : Complex(1.0);
  }
  return q;
}

}  // namespace dmexp
