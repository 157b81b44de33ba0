#pragma once

#include <cmath>
#include <vector>

#include <catch_amalgamated.hpp>

#include "dmexp/linalg.hpp"

namespace dmexp::testing {

inline ComplexMatrix random_hermitian(Index d, CounterRng& rng, double scale = 1.0) {
  ComplexMatrix g(d, d);
  for (Index j = 0; j < d; ++j) g.col(j) = gaussian_vector(d, rng);
  return scale * 0.5 * (g + g.adjoint());
}

inline ComplexMatrix ket_bra(const ComplexVector& a, const ComplexVector& b) { return a * b.adjoint(); }

inline ComplexMatrix mat2(Complex a, Complex b, Complex c, Complex d) {
  ComplexMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
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

}  // namespace dmexp::testing
