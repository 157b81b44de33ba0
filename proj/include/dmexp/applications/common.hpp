#pragma once

#include <algorithm>
#include <string>

#include "dmexp/error.hpp"
#include "dmexp/linalg.hpp"

namespace dmexp {

/// ideal: exact unitaries; lmr: the sample-based channel.
enum class Protocol { ideal, lmr };

inline Protocol parse_protocol(const std::string& s) {
  if (s == "ideal") return Protocol::ideal;
  if (s == "lmr") return Protocol::lmr;
  throw ValidationError("unknown protocol \"" + s + "\" (expected ideal or lmr)");
}

inline const char* to_string(Protocol p) { return p == Protocol::ideal ? "ideal" : "lmr"; }

/// Born probability Tr(P rho), clipped into [0, 1] against roundoff.
inline double born(const ComplexMatrix& projector, const ComplexMatrix& rho) {
  return std::clamp((projector * rho).trace().real(), 0.0, 1.0);
}

inline double born(const ComplexVector& ket, const ComplexMatrix& rho) {
  return std::clamp(ket.dot(rho * ket).real(), 0.0, 1.0);
}

}  // namespace dmexp
