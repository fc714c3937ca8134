#pragma once

// CSV and JSON report emission. Each report is a table of rows with a fixed
// column order; CSV and JSON are two renderings of the same rows.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "newton/evaluator.hpp"
#include "newton/mapper.hpp"
#include "newton/verify.hpp"

namespace newton {

inline constexpr int kReportSchemaVersion = 1;

enum class ReportFormat { csv, json };

inline ReportFormat parse_format(const std::string& s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "json") return ReportFormat::json;
  throw ConfigError("unknown format '" + s + "' (expected csv or json)");
}

// Components in every breakdown, in column order.
inline const std::vector<std::string>& breakdown_components() {
  static const std::vector<std::string> c = {
      "adc",  "crossbar", "dac", "sample_hold", "shift_add", "ima_registers", "htree",
      "edram", "bus",     "tile_digital", "router", "hyper_transport"};
  return c;
}

// Constants that are modeling choices rather than published figures.
inline const std::vector<std::string>& report_assumptions() {
  static const std::vector<std::string> a = {
      "edram_per_kb: assumed 32 nm figures",
      "htree wire density: calibrated constants",
      "router and link energy: rated power over rated bandwidth, per byte moved",
      "leakage and eDRAM refresh: ignored"};
  return a;
}

struct Report {
  using Json = nlohmann::ordered_json;
  std::string kind;
  std::vector<std::string> columns;
  std::vector<Json> rows;
  Json extra = Json::object();  // JSON-only context

  void add(Json row) {
    Json full = Json::object();
    full["schema_version"] = kReportSchemaVersion;
    for (auto& [k, v] : row.items()) full[k] = v;
    if (columns.empty()) {
      for (const auto& [k, v] : full.items()) columns.push_back(k);
    }
    rows.push_back(std::move(full));
  }
};

namespace detail {

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string csv_cell(const Report::Json& v) {
  std::string s;
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number()) return format_number(v.get<double>());
  s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

// Non-finite doubles are not JSON; they become strings.
inline Report::Json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

}  // namespace detail

inline std::string to_csv(const Report& r) {
  std::string out;
  for (std::size_t i = 0; i < r.columns.size(); ++i) {
    out += (i ? "," : "") + r.columns[i];
  }
  out += "\n";
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < r.columns.size(); ++i) {
      if (i) out += ",";
      if (row.contains(r.columns[i])) out += detail::csv_cell(row[r.columns[i]]);
    }
    out += "\n";
  }
  return out;
}

inline std::string to_json(const Report& r) {
  Report::Json j = Report::Json::object();
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = r.kind;
  j["assumptions"] = report_assumptions();
  for (const auto& [k, v] : r.extra.items()) j[k] = v;
  j["columns"] = r.columns;
  j["rows"] = r.rows;
  return j.dump(2) + "\n";
}

inline std::string render(const Report& r, ReportFormat f) {
  return f == ReportFormat::csv ? to_csv(r) : to_json(r);
}

namespace detail {

inline void put_breakdown(Report::Json& row, const std::string& prefix, const Breakdown& b,
                          double scale = 1.0) {
  const auto& comps = breakdown_components();
  for (const auto& c : comps) row[prefix + "." + c] = json_number(b.get(c) * scale);
  double other = 0;
  for (const auto& [k, v] : b.items) {
    if (std::find(comps.begin(), comps.end(), k) == comps.end()) other += v;
  }
  row[prefix + ".other"] = json_number(other * scale);
}

inline Report::Json eval_row(const EvalReport& r) {
  Report::Json row = Report::Json::object();
  row["network"] = r.network;
  row["point"] = r.point;
  row["conv_tiles"] = r.conv_tiles;
  row["fc_tiles"] = r.fc_tiles;
  row["chips"] = r.chips;
  row["conv_imas"] = r.conv_imas;
  row["fc_imas"] = r.fc_imas;
  row["ops_per_image"] = json_number(r.ops_per_image);
  row["latency_s"] = json_number(r.latency_s);
  row["throughput_img_s"] = json_number(r.throughput);
  row["compute_throughput_img_s"] = json_number(r.compute_throughput);
  row["binding"] = r.binding;
  row["energy_per_image_j"] = json_number(r.energy_per_image_j);
  row["energy_per_op_pj"] = json_number(r.energy_per_op_pj);
  row["peak_power_w"] = json_number(r.peak_power_w);
  row["average_power_w"] = json_number(r.average_power_w);
  row["area_mm2"] = json_number(r.area_mm2);
  row["ee_gops_w"] = json_number(r.ee_gops_w);
  row["ce_gops_mm2"] = json_number(r.ce_gops_mm2);
  row["pe_gops_w"] = json_number(r.pe_gops_w);
  row["preload_s"] = json_number(r.preload_s);
  row["fc_time_s"] = json_number(r.fc_time_s);
  row["fc_critical"] = r.fc_critical;
  row["max_tile_buffer_kb"] = json_number(r.max_tile_buffer_kb);
  row["buffer_overflow"] = r.buffer_overflow;
  row["utilization"] = json_number(r.utilization);
  row["adc_energy_ratio"] = json_number(r.adc_energy_ratio);
  row["adc_power_share"] = json_number(r.power_mw.total() > 0
                                           ? r.power_mw.get("adc") / r.power_mw.total()
                                           : 0.0);
  put_breakdown(row, "energy_pj", r.energy_pj);
  put_breakdown(row, "power_mw", r.power_mw);
  put_breakdown(row, "area_mm2", r.area);
  return row;
}

inline Breakdown mean_energy(const std::vector<EvalReport>& reps) {
  Breakdown b;
  for (const auto& r : reps) b += r.energy_pj.scaled(1.0 / r.ops_per_image);
  return b.scaled(reps.empty() ? 0.0 : 1.0 / reps.size());
}

inline void put_ratios(Report::Json& row, const CompareRow& c) {
  row["power_ratio"] = json_number(c.power_ratio);
  row["ee_ratio"] = json_number(c.ee_ratio);
  row["ce_ratio"] = json_number(c.ce_ratio);
  row["pe_ratio"] = json_number(c.pe_ratio);
  row["area_ratio"] = json_number(c.area_ratio);
  row["throughput_ratio"] = json_number(c.throughput_ratio);
  row["peak_power_ratio"] = json_number(c.peak_power_ratio);
  row["energy_per_op_ratio"] = json_number(c.energy_per_op_ratio);
}

inline CompareRow mean_row(const Comparison& c) {
  CompareRow m;
  m.network = "mean";
  m.power_ratio = c.mean(&CompareRow::power_ratio);
  m.ee_ratio = c.mean(&CompareRow::ee_ratio);
  m.ce_ratio = c.mean(&CompareRow::ce_ratio);
  m.pe_ratio = c.mean(&CompareRow::pe_ratio);
  m.area_ratio = c.mean(&CompareRow::area_ratio);
  m.throughput_ratio = c.mean(&CompareRow::throughput_ratio);
  m.peak_power_ratio = c.mean(&CompareRow::peak_power_ratio);
  m.energy_per_op_ratio = c.mean(&CompareRow::energy_per_op_ratio);
  return m;
}

// Per-op energy by component for both sides, in pJ/op.
inline Report::Json compare_row(const std::string& type, const std::string& name,
                                const Comparison& c, const CompareRow& ratios,
                                const std::vector<EvalReport>& base,
                                const std::vector<EvalReport>& cand) {
  Report::Json row = Report::Json::object();
  row["row_type"] = type;
  row["name"] = name;
  row["baseline"] = c.baseline;
  row["candidate"] = c.candidate;
  put_ratios(row, ratios);
  put_breakdown(row, "baseline_energy_pj_per_op", mean_energy(base));
  put_breakdown(row, "candidate_energy_pj_per_op", mean_energy(cand));
  return row;
}

}  // namespace detail

inline Report simulate_report(const std::vector<EvalReport>& reps) {
  Report r;
  r.kind = "simulate";
  for (const auto& e : reps) r.add(detail::eval_row(e));
  return r;
}

inline Report map_report(const std::string& network, const MappingPlan& plan) {
  Report r;
  r.kind = "map";
  r.extra["plan"] = {{"network", network},
                     {"mode", plan.mode == MappingMode::spread ? "spread" : "naive"},
                     {"constrained", plan.constrained},
                     {"conv_tiles", plan.conv_tiles},
                     {"fc_tiles", plan.fc_tiles},
                     {"conv_imas", plan.conv_imas},
                     {"fc_imas", plan.fc_imas},
                     {"max_tile_buffer_bytes", plan.max_tile_buffer},
                     {"buffer_overflow", plan.buffer_overflow},
                     {"utilization", plan.utilization()}};
  for (const auto& m : plan.layers) {
    Report::Json row = Report::Json::object();
    row["network"] = network;
    row["layer"] = m.name;
    row["kind"] = to_string(m.kind);
    row["tile_kind"] = m.tile_kind == TileKind::fc ? "fc" : "conv";
    row["rows"] = m.rows;
    row["cols"] = m.cols;
    row["replication"] = m.replication;
    row["pack"] = m.pack;
    row["imas"] = m.imas;
    row["crossbars"] = m.crossbars;
    row["utilization"] = detail::json_number(m.utilization);
    row["strassen"] = m.strassen;
    row["strassen_freed_imas"] = m.strassen_freed_imas;
    row["windows"] = m.windows;
    row["window_iterations"] = m.window_iterations;
    row["buffer_bytes_per_tile"] = detail::json_number(m.buffer_bytes_per_tile);
    row["first_tile"] = m.host_first_tile;
    row["last_tile"] = m.host_last_tile;
    r.add(std::move(row));
  }
  return r;
}

inline Report compare_report(const Comparison& cmp, const std::vector<AttributionStep>& steps) {
  Report r;
  r.kind = "compare";
  for (std::size_t i = 0; i < cmp.rows.size(); ++i) {
    r.add(detail::compare_row("network", cmp.rows[i].network, cmp, cmp.rows[i],
                              {cmp.baseline_reports[i]}, {cmp.candidate_reports[i]}));
  }
  r.add(detail::compare_row("mean", "suite", cmp, detail::mean_row(cmp), cmp.baseline_reports,
                            cmp.candidate_reports));
  for (const auto& s : steps) {
    const auto& c = s.vs_previous;
    r.add(detail::compare_row("step", s.name, c, detail::mean_row(c), c.baseline_reports,
                              c.candidate_reports));
  }
  return r;
}

inline Report sweep_report(const std::vector<SweepRow>& rows) {
  Report r;
  r.kind = "sweep";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& s = rows[i];
    Report::Json row = Report::Json::object();
    row["index"] = i;
    for (const auto& [k, v] : s.settings) row["set." + k] = v;
    row["valid"] = s.valid;
    row["error"] = s.error;
    row["rank"] = s.rank;
    row["pareto"] = s.pareto;
    row["area_mm2"] = detail::json_number(s.summary.area_mm2);
    row["peak_power_w"] = detail::json_number(s.summary.peak_power_w);
    row["throughput_img_s"] = detail::json_number(s.summary.throughput);
    row["latency_s"] = detail::json_number(s.summary.latency_s);
    row["energy_per_op_pj"] = detail::json_number(s.summary.energy_per_op_pj);
    row["ee_gops_w"] = detail::json_number(s.summary.ee_gops_w);
    row["ce_gops_mm2"] = detail::json_number(s.summary.ce_gops_mm2);
    row["pe_gops_w"] = detail::json_number(s.summary.pe_gops_w);
    r.add(std::move(row));
  }
  return r;
}

inline Report verify_report(const VerifyReport& v) {
  Report r;
  r.kind = "verify";
  r.extra["seed"] = v.seed;
  r.extra["passed"] = v.passed();
  for (const auto& s : v.suites) {
    Report::Json row = Report::Json::object();
    row["suite"] = s.name;
    row["cases"] = s.cases;
    row["mismatches"] = s.mismatches;
    row["passed"] = s.passed();
    r.add(std::move(row));
  }
  return r;
}

}  // namespace newton
