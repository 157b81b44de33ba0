#pragma once

// JSON formats for states, polynomials and circuits.
//
//   complex   number | [re, im]
//   matrix    [[complex, ...], ...]           row major
//   state     {"amplitudes": [complex...]} | {"matrix": matrix} | "0" "1" "+" "-"
//   poly      {"states": [state...], "terms": [{"indices": "12" | [1, 2], "phase": x, "coeff": c}]}
//   circuit   [{"gate": "u", "q": i, "matrix": matrix} | {"gate": "cnot", "c": i, "t": j}]

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "dmexp/gadgets.hpp"
#include "dmexp/universal.hpp"

namespace dmexp::io {

using nlohmann::json;

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& what) {
  require(j.is_object(), what + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    require(ok.count(key) > 0, what + ": unknown key \"" + key + "\"");
  }
}

inline Complex complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  require(j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number(),
          "complex entries must be numbers or [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

inline ComplexMatrix matrix_from_json(const json& j) {
  require(j.is_array() && !j.empty(), "matrix must be a non-empty array of rows");
  const auto rows = static_cast<Index>(j.size());
  require(j[0].is_array() && !j[0].empty(), "matrix rows must be non-empty arrays");
  const auto cols = static_cast<Index>(j[0].size());
  ComplexMatrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    require(row.is_array() && static_cast<Index>(row.size()) == cols, "matrix rows must all have the same length");
    for (Index c = 0; c < cols; ++c) m(r, c) = complex_from_json(row[static_cast<std::size_t>(c)]);
  }
  require(all_finite(m), "matrix has non-finite entries");
  return m;
}

inline json matrix_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline ComplexVector vector_from_json(const json& j) {
  require(j.is_array() && !j.empty(), "amplitudes must be a non-empty array");
  ComplexVector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = complex_from_json(j[i]);
  return v;
}

/// Named qubit states "0", "1", "+", "-".
inline std::optional<PureState> named_state(const std::string& s) {
  if (s == "0") return PureState::basis(2, 0);
  if (s == "1") return PureState::basis(2, 1);
  if (s == "+") return PureState::plus();
  if (s == "-") return PureState::minus();
  return std::nullopt;
}

inline DensityMatrix state_from_json(const json& j) {
  if (j.is_string()) {
    const auto named = named_state(j.get<std::string>());
    require(named.has_value(), "unknown named state \"" + j.get<std::string>() + "\"");
    return DensityMatrix::pure(*named);
  }
  check_keys(j, {"amplitudes", "matrix"}, "state");
  require(j.contains("amplitudes") != j.contains("matrix"), "state: give exactly one of amplitudes, matrix");
  if (j.contains("amplitudes")) return DensityMatrix::pure(PureState::from_amplitudes(vector_from_json(j["amplitudes"])));
  return DensityMatrix::from_matrix(matrix_from_json(j["matrix"]));
}

/// A pure state; density matrices must have rank one.
inline PureState pure_state_from_json(const json& j) {
  if (j.is_object() && j.contains("amplitudes")) {
    check_keys(j, {"amplitudes"}, "state");
    return PureState::from_amplitudes(vector_from_json(j["amplitudes"]));
  }
  const DensityMatrix rho = state_from_json(j);
  require(std::abs(rho.purity() - 1.0) <= tol::validation, "state: expected a pure state");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho.matrix());
  return PureState::normalized(es.eigenvectors().col(rho.dim() - 1));
}

inline json state_to_json(const DensityMatrix& rho) { return json{{"matrix", matrix_to_json(rho.matrix())}}; }

struct PolynomialSpec {
  std::vector<DensityMatrix> states;
  HermitianPolynomial poly;
};

inline PolynomialSpec polynomial_from_json(const json& j) {
  check_keys(j, {"states", "terms"}, "polynomial");
  require(j.contains("states") && j["states"].is_array() && !j["states"].empty(), "polynomial: states missing");
  require(j.contains("terms") && j["terms"].is_array() && !j["terms"].empty(), "polynomial: terms missing");
  std::vector<DensityMatrix> states;
  for (const auto& s : j["states"]) states.push_back(state_from_json(s));
  std::vector<PolynomialTerm> terms;
  for (const auto& t : j["terms"]) {
    check_keys(t, {"indices", "phase", "coeff"}, "polynomial term");
    require(t.contains("indices"), "polynomial term: indices missing");
    PolynomialTerm term;
    if (t["indices"].is_string()) {
      term.indices = parse_indices(t["indices"].get<std::string>());
    } else {
      require(t["indices"].is_array(), "polynomial term: indices must be a string or an array");
      for (const auto& i : t["indices"]) {
        require(i.is_number_integer(), "polynomial term: indices must be integers");
        term.indices.push_back(i.get<int>());
      }
    }
    for (const char* key : {"phase", "coeff"}) {
      if (!t.contains(key)) continue;
      require(t[key].is_number(), std::string("polynomial term: ") + key + " must be a number");
    }
    if (t.contains("phase")) term.phase = t["phase"].get<double>();
    if (t.contains("coeff")) term.coeff = t["coeff"].get<double>();
    terms.push_back(std::move(term));
  }
  const int k = static_cast<int>(states.size());
  return {std::move(states), HermitianPolynomial(k, std::move(terms))};
}

inline json polynomial_to_json(const PolynomialSpec& spec) {
  json states = json::array();
  for (const auto& s : spec.states) states.push_back(state_to_json(s));
  json terms = json::array();
  for (const auto& t : spec.poly.terms()) {
    terms.push_back({{"indices", format_indices(t.indices)}, {"phase", t.phase}, {"coeff", t.coeff}});
  }
  return {{"states", states}, {"terms", terms}};
}

inline Circuit circuit_from_json(const json& j) {
  require(j.is_array(), "circuit: expected a list of gates");
  Circuit out;
  for (const auto& g : j) {
    require(g.is_object() && g.contains("gate") && g["gate"].is_string(), "circuit: each gate needs a \"gate\" field");
    const auto kind = g["gate"].get<std::string>();
    auto index = [&](const char* key) {
      require(g.contains(key) && g[key].is_number_integer(), std::string("circuit: gate needs integer \"") + key + "\"");
      return g[key].get<int>();
    };
    if (kind == "u") {
      check_keys(g, {"gate", "q", "matrix"}, "circuit gate");
      require(g.contains("matrix"), "circuit: u gate needs \"matrix\"");
      out.push_back(CircuitGate::single(index("q"), matrix_from_json(g["matrix"])));
    } else if (kind == "cnot") {
      check_keys(g, {"gate", "c", "t"}, "circuit gate");
      out.push_back(CircuitGate::cnot(index("c"), index("t")));
    } else {
      require(false, "circuit: unknown gate \"" + kind + "\"");
    }
  }
  return out;
}

inline json circuit_to_json(const Circuit& c) {
  json out = json::array();
  for (const auto& g : c) {
    if (g.kind == CircuitGate::Kind::unitary) {
      out.push_back({{"gate", "u"}, {"q", g.q}, {"matrix", matrix_to_json(g.u)}});
    } else {
      out.push_back({{"gate", "cnot"}, {"c", g.control}, {"t", g.target}});
    }
  }
  return out;
}

/// Smallest qubit count that fits every gate.
inline int circuit_width(const Circuit& c) {
  int n = 1;
  for (const auto& g : c) {
    if (g.kind == CircuitGate::Kind::unitary) {
      n = std::max(n, g.q + 1);
    } else {
      n = std::max({n, g.control + 1, g.target + 1});
    }
  }
  return n;
}

inline json cost_to_json(const CostReport& c) {
  return {{"single_qubit_gates", c.single_qubit_gates},
          {"cnots", c.cnots},
          {"exchange_pulses", c.exchange_pulses},
          {"swaps", c.swaps},
          {"resource_zero", c.resource_zero},
          {"resource_plus", c.resource_plus},
          {"resources", c.resources()},
          {"n_qubits", c.n_qubits},
          {"predicted_shape", c.predicted_shape()}};
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open \"" + path + "\"");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("\"" + path + "\" is not valid JSON: " + e.what());
  }
}

}  // namespace dmexp::io
