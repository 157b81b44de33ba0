#pragma once

// Flat experiment reports. CSV: '#'-prefixed metadata and summary lines, then
// a header row and the table. JSON carries the same content as one object.
// Doubles are printed with %.17g so reports round-trip and compare bytewise.

#include <cinttypes>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace dmexp {

inline constexpr const char* version = "0.1.0";

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// For labels and keys, not for data.
inline std::string format_short(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

struct Report {
  std::string subcommand;
  std::optional<std::uint64_t> seed;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::ordered_json>> rows;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  bool pass = true;
  std::string criterion;  // what pass means, empty if nothing is checked
  std::optional<double> wall_time;

  void add_row(std::vector<nlohmann::ordered_json> row) { rows.push_back(std::move(row)); }
};

namespace detail {

inline std::string csv_cell(const nlohmann::ordered_json& v) {
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
      if (ch == '"') out += '"';
      out += ch;
    }
    return out + "\"";
  }
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_null()) return "";
  return v.dump();
}

// comment lines are not CSV records, so strings go out unquoted
inline std::string meta_cell(const nlohmann::ordered_json& v) {
  return v.is_string() ? v.get<std::string>() : csv_cell(v);
}

}  // namespace detail

inline std::string to_csv(const Report& r) {
  std::string out = "# dmexp " + std::string(version) + " " + r.subcommand + "\n";
  if (r.seed) out += "# seed: " + std::to_string(*r.seed) + "\n";
  for (const auto& [k, v] : r.params.items()) out += "# param " + k + ": " + detail::meta_cell(v) + "\n";
  for (const auto& [k, v] : r.summary.items()) out += "# " + k + ": " + detail::meta_cell(v) + "\n";
  if (!r.criterion.empty()) out += "# check: " + r.criterion + " -> " + (r.pass ? "pass" : "fail") + "\n";
  if (r.wall_time) out += "# wall_time_s: " + format_double(*r.wall_time) + "\n";
  for (std::size_t i = 0; i < r.columns.size(); ++i) out += (i ? "," : "") + r.columns[i];
  out += "\n";
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + detail::csv_cell(row[i]);
    out += "\n";
  }
  return out;
}

inline std::string to_json(const Report& r) {
  nlohmann::ordered_json j;
  j["subcommand"] = r.subcommand;
  j["version"] = version;
  j["seed"] = r.seed ? nlohmann::ordered_json(*r.seed) : nlohmann::ordered_json(nullptr);
  j["params"] = r.params;
  j["columns"] = r.columns;
  j["rows"] = r.rows;
  j["summary"] = r.summary;
  if (!r.criterion.empty()) j["check"] = {{"criterion", r.criterion}, {"pass", r.pass}};
  if (r.wall_time) j["wall_time_s"] = *r.wall_time;
  return j.dump(2) + "\n";
}

}  // namespace dmexp
