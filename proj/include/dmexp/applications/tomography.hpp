#pragma once

// Sample-count shape of tomography-then-exponentiate versus LMR.

#include <cmath>

#include "dmexp/error.hpp"

namespace dmexp {

/// C d r (t - delta)^2 / (delta^2 ln(d t / (r delta))) + t^2 / delta^2 with C = 1.
inline double tomography_bound(double d, double r, double t, double delta) {
  require(std::isfinite(d) && std::isfinite(r) && std::isfinite(t) && std::isfinite(delta),
          "tomography_bound: non-finite input");
  require(d >= r && r >= 1.0, "tomography_bound: need d >= r >= 1");
  require(t > delta && delta > 0.0, "tomography_bound: need t > delta > 0");
  const double arg = d * t / (r * delta);
  require(arg > 1.0, "tomography_bound: log argument d t / (r delta) must exceed 1");
  return d * r * (t - delta) * (t - delta) / (delta * delta * std::log(arg)) + t * t / (delta * delta);
}

/// 4 t^2 / delta, the default LMR budget before rounding.
inline double lmr_budget_shape(double t, double delta, double budget_constant = 4.0) {
  require(delta > 0.0, "lmr_budget_shape: delta must be positive");
  return budget_constant * t * t / delta;
}

}  // namespace dmexp
