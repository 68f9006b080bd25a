#pragma once
// JSON and CSV serialization.  Numbers are written with '.' as decimal
// separator and the shortest round-trip representation, independent of the
// process locale.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hbac/analysis.hpp"
#include "hbac/engine.hpp"
#include "hbac/oracle.hpp"
#include "hbac/program.hpp"

namespace hbac {

using json = nlohmann::ordered_json;

/// Shortest round-trip decimal form; "inf", "-inf", "nan" for non-finite.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, end);
}

inline std::string to_string(Regime r) { return r == Regime::linear ? "linear" : "exact"; }
inline std::string to_string(ResetModel m) { return m == ResetModel::general ? "general" : "paper"; }
inline std::string to_string(DonorPolicy p) { return p == DonorPolicy::discard ? "discard" : "propagate"; }

inline json to_json(Extended e) {
  if (e.is_infinite()) return "inf";
  return e.value();
}

inline json to_json(const ProgramInfo& info) {
  json j;
  j["name"] = info.name;
  j["n"] = info.n;
  j["n_reset"] = info.n_reset;
  if (info.m) j["m"] = *info.m;
  if (info.delta) j["delta"] = *info.delta;
  if (info.order) j["order"] = *info.order;
  if (!info.m_table.empty()) {
    json t = json::object();
    for (auto [k, m] : info.m_table) t[std::to_string(k)] = m;
    j["m_table"] = std::move(t);
  }
  if (info.redundant_resets_removed) j["redundant_resets_removed"] = true;
  return j;
}

/// Biases listed from spin 1 (LSB) to spin n (MSB).
inline json biases_json(const BiasVector& b, double scale) {
  json a = json::array();
  for (double v : b.lsb_first()) a.push_back(v * scale);
  return a;
}

/// `absolute` selects absolute biases; otherwise units of eps0.
inline json to_json(const RunReport& r, bool absolute = false) {
  const bool linear = r.mode == Regime::linear;
  double scale = 1.0;
  if (absolute && linear) scale = r.eps0;
  if (!absolute && !linear) scale = 1.0 / r.eps0;
  json j;
  j["program"] = r.program;
  j["backend"] = r.backend;
  j["mode"] = to_string(r.mode);
  j["eps0"] = r.eps0;
  j["units"] = absolute ? "absolute" : "eps0";
  j["final_biases"] = biases_json(r.final_biases, scale);
  j["cooling_factor"] = r.cooling_factor;
  j["peak_factor"] = r.peak_factor;
  j["resets_at_peak"] = r.resets_at_peak;
  j["n_resets"] = r.n_resets;
  j["n_instructions"] = r.n_instructions;
  j["t_run"] = to_json(r.t_run);
  j["truncated"] = r.truncated;
  if (linear) j["left_linear_regime"] = r.left_linear_regime;
  return j;
}

inline json to_json(const EntropyLedger& l) {
  json j;
  j["h_init_bits"] = l.h_init;
  j["h_fin_bits"] = l.h_fin;
  j["removed_bits"] = l.cumulative();
  j["reset_deltas_bits"] = l.reset_deltas;
  return j;
}

inline json to_json(const ComparisonRecord& c) {
  json j;
  j["program"] = c.program;
  j["n_resets"] = c.n_resets;
  j["reset_multiplier"] = c.reset_multiplier;
  j["degenerate"] = c.degenerate;
  j["ac"] = c.ac_factor;
  j["multiscan"] = c.multiscan_factor;
  j["ac_acquisitions"] = c.ac_acquisitions;
  j["multiscan_acquisitions"] = c.multiscan_acquisitions;
  j["multiscan_better"] = c.multiscan_better;
  return j;
}

inline std::string quote_csv(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

/// step,instr,spin_1,...,spin_n
inline void write_trajectory_csv(std::ostream& os, const RunReport& r, bool absolute = false) {
  const bool linear = r.mode == Regime::linear;
  double scale = 1.0;
  if (absolute && linear) scale = r.eps0;
  if (!absolute && !linear) scale = 1.0 / r.eps0;
  const int n = r.final_biases.size();
  os << "step,instr";
  for (int i = 1; i <= n; ++i) os << ",spin_" << i;
  os << "\r\n";
  for (const auto& pt : r.trajectory) {
    os << pt.step << ',' << quote_csv(pt.instruction.to_string());
    for (double v : pt.biases.lsb_first()) os << ',' << format_number(v * scale);
    os << "\r\n";
  }
}

/// index,prob with index the basis state, bit i-1 holding spin i.
inline void write_state_csv(std::ostream& os, const DiagState& s) {
  os << "index,prob\r\n";
  for (std::size_t b = 0; b < s.dimension(); ++b) os << b << ',' << format_number(s.probability(b)) << "\r\n";
}

struct SweepRow {
  int n = 0;
  Extended R;
  double max_bias_over_eps0 = 0.0;
  std::uint64_t resets_at_max = 0;
  Extended t_run;
};

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "n,R,max_bias_over_eps0,resets_at_max,t_run\r\n";
  for (const auto& r : rows)
    os << r.n << ',' << r.R.to_string() << ',' << format_number(r.max_bias_over_eps0) << ',' << r.resets_at_max
       << ',' << r.t_run.to_string() << "\r\n";
}

}  // namespace hbac
