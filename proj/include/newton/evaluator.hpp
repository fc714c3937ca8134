#pragma once

// Deterministic analytic execution model.
//
// A mapped network runs as a pipeline: every conv layer advances one window
// per step on each replica, so the image period is set by the layer with the
// most sequential windows. Classifier tiles run off that path. Energy is
// activity based: IMA work is charged per executed window, tile blocks for
// the time they are busy.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "newton/adaptive_adc.hpp"
#include "newton/arch.hpp"
#include "newton/error.hpp"
#include "newton/mapper.hpp"
#include "newton/network.hpp"
#include "newton/strassen.hpp"
#include "newton/verify.hpp"

namespace newton {

struct DesignPoint {
  std::string name = "newton";
  Catalog catalog{};
  ImaConfig ima{};  // conv IMA, carries compact_htree and karatsuba_level
  unsigned imas_per_tile = 16;
  bool adaptive_adc = true;
  unsigned guard_bits = 9;
  bool strassen = true;
  bool spread_buffers = true;
  bool fc_tiles = true;
  unsigned fc_adc_share = 4;
  double fc_slowdown = 128.0;
  double conv_edram_kb = 16;
  double fc_edram_kb = 4;
  double replication_scale = 1.0;
  unsigned input_size = 0;  // 0: network as written
  std::uint64_t max_tiles = 0;
  bool verify_numerics = true;

  // The compact tree needs the one-layer, 128-input IMA discipline.
  bool constrained() const { return ima.compact_htree; }

  // See fc_tile(): shared ADCs serve extra crossbars, not fewer ADCs.
  ImaConfig fc_ima() const {
    ImaConfig f = ima;
    f.karatsuba_level = 0;
    if (fc_tiles) {
      f.adc_share = fc_adc_share;
      f.adc_slowdown = fc_slowdown;
      f.outputs *= fc_adc_share;
    }
    return f;
  }

  void validate() const {
    ima.validate();
    fc_ima().validate();
    if (imas_per_tile == 0) throw ConfigError("tile has no IMAs");
    if (conv_edram_kb < 0 || fc_edram_kb < 0) throw ConfigError("negative eDRAM size");
    if (!(replication_scale > 0)) throw ConfigError("replication scale must be positive");
    if (guard_bits > 10) throw ConfigError("guard bits must be in [0, 10]");
  }

  static DesignPoint isaac() {
    DesignPoint p;
    p.name = "isaac";
    p.ima.compact_htree = false;
    p.ima.karatsuba_level = 0;
    p.adaptive_adc = false;
    p.strassen = false;
    p.spread_buffers = false;
    p.fc_tiles = false;
    p.conv_edram_kb = 64;
    p.fc_edram_kb = 64;
    return p;
  }

  static DesignPoint newton() {
    DesignPoint p;
    p.name = "newton";
    p.ima.karatsuba_level = 1;
    return p;
  }
};

inline MapOptions map_options(const DesignPoint& p) {
  MapOptions o;
  o.ima = p.ima;
  o.fc_ima = p.fc_ima();
  o.imas_per_tile = p.imas_per_tile;
  o.constrained = p.constrained();
  o.mode = p.spread_buffers ? MappingMode::spread : MappingMode::naive;
  o.fc_tiles = p.fc_tiles;
  o.strassen = p.strassen;
  o.conv_edram_kb = p.conv_edram_kb;
  o.fc_edram_kb = p.fc_edram_kb;
  o.max_tiles = p.max_tiles;
  o.replication_scale = p.replication_scale;
  return o;
}

inline std::vector<LayerDesc> design_layers(const NetworkDesc& net, const DesignPoint& p) {
  return expand_layers(p.input_size ? with_input_size(net, p.input_size) : net);
}

// Mean conversion energy relative to full resolution. Karatsuba's
// subtraction needs every sample bit, so the grid only applies without it.
inline double adc_energy_ratio(const DesignPoint& p, const ImaConfig& ima) {
  if (!p.adaptive_adc || ima.karatsuba_level > 0) return 1.0;
  DatapathShape shape;
  shape.cell_bits = ima.cell_bits;
  shape.rows = ima.xbar_rows;
  shape.cols = ima.xbar_cols;
  const auto grid = derive_grid(p.guard_bits, shape);
  return adc_energy(grid, p.catalog.adc_model, p.catalog.adc_rate_gsps).ratio();
}

// Runs the equivalence suites for the numeric paths a point uses, once per
// distinct path combination.
inline void require_functional_equivalence(const DesignPoint& p) {
  if (!p.verify_numerics) return;
  using Key = std::tuple<unsigned, bool, unsigned, bool>;
  static std::mutex mu;
  static std::map<Key, std::string> cache;  // empty string: passed
  const Key key{p.ima.karatsuba_level, p.adaptive_adc, p.adaptive_adc ? p.guard_bits : 0,
                p.strassen};
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) {
    VerifyOptions o;
    o.seed = 1;
    o.random_cases = 200;
    o.decomposition_cases = 50;
    o.exhaustive = false;
    o.karatsuba = p.ima.karatsuba_level > 0;
    o.strassen = p.strassen;
    o.adaptive = p.adaptive_adc;
    o.guard_bits = p.guard_bits;
    auto rep = run_verification(o);
    std::string failed;
    for (const auto& s : rep.suites) {
      if (s.name.rfind("karatsuba.level", 0) == 0 &&
          s.name != "karatsuba.level" + std::to_string(p.ima.karatsuba_level)) {
        continue;
      }
      if (!s.passed()) failed += (failed.empty() ? "" : ", ") + s.name;
    }
    it = cache.emplace(key, failed).first;
  }
  if (!it->second.empty()) {
    throw VerificationError("design point '" + p.name + "' fails equivalence: " + it->second);
  }
}

struct EvalReport {
  std::string network;
  std::string point;
  std::uint64_t conv_tiles = 0, fc_tiles = 0, chips = 0;
  std::uint64_t conv_imas = 0, fc_imas = 0;
  double ops_per_image = 0;
  double latency_s = 0;
  double throughput = 0;          // images per second
  double compute_throughput = 0;  // before bandwidth caps
  std::string binding = "compute";
  double energy_per_image_j = 0;
  double energy_per_op_pj = 0;
  double peak_power_w = 0;
  double average_power_w = 0;
  double area_mm2 = 0;
  double ee_gops_w = 0;   // ops per joule, in GOPS/W
  double ce_gops_mm2 = 0;
  double pe_gops_w = 0;
  double preload_s = 0;
  double fc_time_s = 0;
  bool fc_critical = false;  // classifier slower than the conv pipeline
  double max_tile_buffer_kb = 0;
  bool buffer_overflow = false;
  double utilization = 0;
  double adc_energy_ratio = 1;
  Breakdown energy_pj;  // per image
  Breakdown power_mw;   // peak
  Breakdown area;       // mm^2
};

namespace detail {

inline double activation_bytes(const std::vector<LayerDesc>& layers) {
  if (layers.empty()) return 0;
  double b = static_cast<double>(layers.front().input_w) * layers.front().input_h *
             layers.front().ni;
  for (const auto& l : layers) {
    b += l.kind == LayerKind::fc || l.kind == LayerKind::spp
             ? static_cast<double>(l.no)
             : static_cast<double>(l.output_w()) * l.output_h() * l.no;
  }
  return 2.0 * b;
}

}  // namespace detail

inline EvalReport simulate(const MappingPlan& plan, const DesignPoint& p,
                           const std::vector<LayerDesc>& layers,
                           const std::string& network = "") {
  p.validate();
  require_functional_equivalence(p);
  const Catalog& cat = p.catalog;
  const ImaConfig conv_ima = p.ima;
  const ImaConfig fc_ima = p.fc_ima();
  TileConfig conv_t{TileKind::conv, p.imas_per_tile, p.conv_edram_kb, conv_ima};
  TileConfig fc_t{TileKind::fc, p.imas_per_tile, p.fc_edram_kb, fc_ima};

  EvalReport r;
  r.network = network;
  r.point = p.name;
  r.conv_tiles = plan.conv_tiles;
  r.fc_tiles = plan.fc_tiles;
  r.conv_imas = plan.conv_imas;
  r.fc_imas = plan.fc_imas;
  const std::uint64_t tiles = plan.total_tiles();
  r.chips = ceil_div(tiles, cat.tiles_per_chip);
  r.utilization = plan.utilization();
  r.max_tile_buffer_kb = plan.max_tile_buffer / 1024.0;
  r.buffer_overflow = plan.buffer_overflow;

  std::vector<const LayerDesc*> weighted;
  for (const auto& l : layers) {
    if (l.has_weights()) weighted.push_back(&l);
    r.ops_per_image += 2.0 * static_cast<double>(l.macs());
  }
  if (weighted.size() != plan.layers.size()) {
    throw ConfigError("mapping plan does not match the layer list");
  }

  const double ratio_conv = adc_energy_ratio(p, conv_ima);
  const double ratio_fc = adc_energy_ratio(p, fc_ima);
  r.adc_energy_ratio = ratio_conv;
  const double strassen_scale = strassen_conversions() / (8.0 * karatsuba_cost(0).adc_conversions);

  // Time.
  double conv_ns = 0, fc_ns = 0, latency_ns = 0;
  for (const auto& m : plan.layers) {
    const ImaConfig& ima = m.tile_kind == TileKind::fc ? fc_ima : conv_ima;
    const double win = m.window_iterations * cat.cycle_ns * ima.adc_share * ima.adc_slowdown;
    const double t = static_cast<double>(m.windows) * win;
    latency_ns += t;
    if (m.kind == LayerKind::conv) {
      conv_ns = std::max(conv_ns, t);
    } else {
      fc_ns = std::max(fc_ns, t);
    }
  }
  if (conv_ns == 0) conv_ns = fc_ns;  // classifier-only network
  r.latency_s = latency_ns * 1e-9;
  r.fc_time_s = fc_ns * 1e-9;
  r.fc_critical = fc_ns > conv_ns;
  r.compute_throughput = 1e9 / conv_ns;

  // Bandwidth caps. Every activation crosses one router; the chip links
  // carry the input image and any layer output whose consumer sits on
  // another chip.
  const double bytes = detail::activation_bytes(layers);
  const auto& first = layers.front();
  double cross = 2.0 * first.input_w * first.input_h * first.ni;
  for (std::size_t i = 1; i < plan.layers.size(); ++i) {
    const auto& a = plan.layers[i - 1];
    const auto& b = plan.layers[i];
    if (a.host_last_tile / cat.tiles_per_chip != b.host_first_tile / cat.tiles_per_chip) {
      const auto& l = *weighted[i];
      cross += 2.0 * (l.kind == LayerKind::fc ? l.ni : double(l.input_w) * l.input_h * l.ni);
    }
  }
  const double routers = std::ceil(static_cast<double>(tiles) / cat.tiles_per_router);
  const double router_bw = routers * cat.router_ports * cat.router_flit_bits / 8.0 *
                           cat.router_clock_ghz * 1e9;
  double period_s = conv_ns * 1e-9;
  if (router_bw > 0 && bytes / router_bw > period_s) {
    period_s = bytes / router_bw;
    r.binding = "router";
  }
  const double ht_bw = static_cast<double>(r.chips) * cat.ht_links * cat.ht_link_gbytes * 1e9;
  if (ht_bw > 0 && cross / ht_bw > period_s) {
    period_s = cross / ht_bw;
    r.binding = "hypertransport";
  }
  r.throughput = 1.0 / period_s;

  // Energy per image.
  for (std::size_t i = 0; i < plan.layers.size(); ++i) {
    const auto& m = plan.layers[i];
    const bool fc = m.tile_kind == TileKind::fc;
    ImaActivity act;
    act.column_fraction = m.column_fraction;
    act.row_fraction = m.row_fraction;
    act.adc_energy_ratio = fc ? ratio_fc : ratio_conv;
    act.conversion_scale = m.strassen ? strassen_scale : 1.0;
    const auto e = ima_window_energy(fc ? fc_ima : conv_ima, cat, act);
    r.energy_pj += to_breakdown(e).scaled(static_cast<double>(m.ima_windows));
  }
  const double period_ns = period_s * 1e9;
  const double fc_busy_ns = std::min(period_ns, fc_ns);
  auto busy = [&](const TileConfig& t) {
    auto b = tile_overhead(t, cat).power_mw;
    b.items.erase("router");
    return b;
  };
  r.energy_pj += busy(conv_t).scaled(plan.conv_tiles * period_ns);
  r.energy_pj += busy(fc_t).scaled(plan.fc_tiles * fc_busy_ns);
  r.energy_pj.add("router", bytes * cat.router_pj_per_byte());
  r.energy_pj.add("hyper_transport", cross * cat.ht_pj_per_byte());
  r.energy_per_image_j = r.energy_pj.total() * 1e-12;
  r.energy_per_op_pj = r.ops_per_image > 0 ? r.energy_pj.total() / r.ops_per_image : 0;

  // Peak power and area.
  ImaActivity conv_act, fc_act;
  conv_act.adc_energy_ratio = ratio_conv;
  fc_act.adc_energy_ratio = ratio_fc;
  if (plan.conv_tiles) {
    const auto t = build_tile(conv_t, cat, conv_act);
    r.power_mw += t.power_mw.scaled(static_cast<double>(plan.conv_tiles));
    r.area += t.area_mm2.scaled(static_cast<double>(plan.conv_tiles));
  }
  if (plan.fc_tiles) {
    const auto t = build_tile(fc_t, cat, fc_act);
    r.power_mw += t.power_mw.scaled(static_cast<double>(plan.fc_tiles));
    r.area += t.area_mm2.scaled(static_cast<double>(plan.fc_tiles));
  }
  const auto ht = ht_share(cat, static_cast<double>(tiles));
  r.power_mw += ht.power_mw;
  r.area += ht.area_mm2;
  r.peak_power_w = r.power_mw.total() * 1e-3;
  r.area_mm2 = r.area.total();

  r.average_power_w = r.energy_per_image_j * r.throughput;
  const double ops_s = r.ops_per_image * r.throughput;
  r.ee_gops_w = r.energy_per_image_j > 0 ? r.ops_per_image / r.energy_per_image_j * 1e-9 : 0;
  r.ce_gops_mm2 = r.area_mm2 > 0 ? ops_s / r.area_mm2 * 1e-9 : 0;
  r.pe_gops_w = r.peak_power_w > 0 ? ops_s / r.peak_power_w * 1e-9 : 0;

  // Weights stream in over the chip links before the first image.
  double weight_bytes = 0;
  for (std::size_t i = 0; i < plan.layers.size(); ++i) {
    const auto& m = plan.layers[i];
    weight_bytes += 2.0 * m.rows * m.cols * m.replication;
  }
  r.preload_s = ht_bw > 0 ? weight_bytes / ht_bw : 0;
  return r;
}

inline EvalReport simulate(const NetworkDesc& net, const DesignPoint& p) {
  const auto layers = design_layers(net, p);
  const auto plan = plan_network(layers, map_options(p));
  return simulate(plan, p, layers, net.name);
}

inline std::vector<EvalReport> simulate_suite(const std::vector<NetworkDesc>& nets,
                                              const DesignPoint& p) {
  std::vector<EvalReport> out;
  out.reserve(nets.size());
  for (const auto& n : nets) out.push_back(simulate(n, p));
  return out;
}

// Candidate over baseline, per network. Power is compared at equal
// throughput, i.e. as peak power per image per second.
struct CompareRow {
  std::string network;
  double power_ratio = 1;
  double ee_ratio = 1;
  double ce_ratio = 1;
  double pe_ratio = 1;
  double area_ratio = 1;
  double throughput_ratio = 1;
  double peak_power_ratio = 1;
  double energy_per_op_ratio = 1;
};

struct Comparison {
  std::string baseline, candidate;
  std::vector<CompareRow> rows;
  std::vector<EvalReport> baseline_reports, candidate_reports;

  double mean(double CompareRow::*f) const {
    if (rows.empty()) return 1.0;
    double s = 0;
    for (const auto& r : rows) s += r.*f;
    return s / rows.size();
  }
  double power_delta() const { return mean(&CompareRow::power_ratio) - 1.0; }
  double ee_delta() const { return mean(&CompareRow::ee_ratio) - 1.0; }
  double ce_delta() const { return mean(&CompareRow::ce_ratio) - 1.0; }
  double pe_delta() const { return mean(&CompareRow::pe_ratio) - 1.0; }
  double area_delta() const { return mean(&CompareRow::area_ratio) - 1.0; }
  double peak_power_delta() const { return mean(&CompareRow::peak_power_ratio) - 1.0; }
};

inline CompareRow compare_reports(const EvalReport& b, const EvalReport& c) {
  CompareRow row;
  row.network = c.network;
  row.power_ratio = (c.peak_power_w / c.throughput) / (b.peak_power_w / b.throughput);
  row.ee_ratio = c.ee_gops_w / b.ee_gops_w;
  row.ce_ratio = c.ce_gops_mm2 / b.ce_gops_mm2;
  row.pe_ratio = c.pe_gops_w / b.pe_gops_w;
  row.area_ratio = c.area_mm2 / b.area_mm2;
  row.throughput_ratio = c.throughput / b.throughput;
  row.peak_power_ratio = c.peak_power_w / b.peak_power_w;
  row.energy_per_op_ratio = c.energy_per_op_pj / b.energy_per_op_pj;
  return row;
}

inline Comparison compare(const std::vector<NetworkDesc>& nets, const DesignPoint& baseline,
                          const DesignPoint& candidate) {
  Comparison cmp;
  cmp.baseline = baseline.name;
  cmp.candidate = candidate.name;
  cmp.baseline_reports = simulate_suite(nets, baseline);
  cmp.candidate_reports = simulate_suite(nets, candidate);
  for (std::size_t i = 0; i < nets.size(); ++i) {
    cmp.rows.push_back(compare_reports(cmp.baseline_reports[i], cmp.candidate_reports[i]));
  }
  return cmp;
}

// Incremental attribution: toggles applied one at a time in a fixed order.
struct AttributionStep {
  std::string name;
  DesignPoint point;
  Comparison vs_previous;
};

using Toggle = std::function<void(DesignPoint&, const DesignPoint&)>;

inline const std::vector<std::pair<std::string, Toggle>>& attribution_order() {
  static const std::vector<std::pair<std::string, Toggle>> order = {
      {"htree", [](DesignPoint& p, const DesignPoint& t) { p.ima.compact_htree = t.ima.compact_htree; }},
      {"adaptive_adc",
       [](DesignPoint& p, const DesignPoint& t) {
         p.adaptive_adc = t.adaptive_adc;
         p.guard_bits = t.guard_bits;
       }},
      {"karatsuba", [](DesignPoint& p, const DesignPoint& t) { p.ima.karatsuba_level = t.ima.karatsuba_level; }},
      {"buffers",
       [](DesignPoint& p, const DesignPoint& t) {
         p.spread_buffers = t.spread_buffers;
         p.conv_edram_kb = t.conv_edram_kb;
       }},
      {"fc_tiles",
       [](DesignPoint& p, const DesignPoint& t) {
         p.fc_tiles = t.fc_tiles;
         p.fc_adc_share = t.fc_adc_share;
         p.fc_slowdown = t.fc_slowdown;
         p.fc_edram_kb = t.fc_edram_kb;
       }},
      {"strassen", [](DesignPoint& p, const DesignPoint& t) { p.strassen = t.strassen; }},
  };
  return order;
}

inline std::vector<AttributionStep> attribute(const std::vector<NetworkDesc>& nets,
                                              const DesignPoint& baseline,
                                              const DesignPoint& target) {
  std::vector<AttributionStep> steps;
  DesignPoint cur = baseline;
  auto prev = simulate_suite(nets, cur);
  for (const auto& [name, toggle] : attribution_order()) {
    DesignPoint next = cur;
    toggle(next, target);
    next.name = cur.name + "+" + name;
    AttributionStep s;
    s.name = name;
    s.point = next;
    s.vs_previous.baseline = cur.name;
    s.vs_previous.candidate = next.name;
    s.vs_previous.baseline_reports = prev;
    s.vs_previous.candidate_reports = simulate_suite(nets, next);
    for (std::size_t i = 0; i < nets.size(); ++i) {
      s.vs_previous.rows.push_back(
          compare_reports(prev[i], s.vs_previous.candidate_reports[i]));
    }
    prev = s.vs_previous.candidate_reports;
    cur = next;
    steps.push_back(std::move(s));
  }
  return steps;
}

// Suite means of the headline metrics.
struct SuiteSummary {
  double area_mm2 = 0, peak_power_w = 0, throughput = 0, latency_s = 0;
  double energy_per_op_pj = 0, ee_gops_w = 0, ce_gops_mm2 = 0, pe_gops_w = 0;
};

inline SuiteSummary summarize(const std::vector<EvalReport>& reps) {
  SuiteSummary s;
  if (reps.empty()) return s;
  for (const auto& r : reps) {
    s.area_mm2 += r.area_mm2;
    s.peak_power_w += r.peak_power_w;
    s.throughput += r.throughput;
    s.latency_s += r.latency_s;
    s.energy_per_op_pj += r.energy_per_op_pj;
    s.ee_gops_w += r.ee_gops_w;
    s.ce_gops_mm2 += r.ce_gops_mm2;
    s.pe_gops_w += r.pe_gops_w;
  }
  const double n = static_cast<double>(reps.size());
  s.area_mm2 /= n;
  s.peak_power_w /= n;
  s.throughput /= n;
  s.latency_s /= n;
  s.energy_per_op_pj /= n;
  s.ee_gops_w /= n;
  s.ce_gops_mm2 /= n;
  s.pe_gops_w /= n;
  return s;
}

// Design-point keys accepted by sweeps and config overrides.
inline const std::vector<std::string>& setting_keys() {
  static const std::vector<std::string> keys = {
      "adaptive_adc",   "guard_bits",    "karatsuba_level", "compact_htree", "strassen",
      "spread_buffers", "fc_tiles",      "fc_adc_share",    "fc_slowdown",   "conv_edram_kb",
      "fc_edram_kb",    "imas_per_tile", "ima_inputs",      "ima_outputs",   "replication_scale",
      "input_size"};
  return keys;
}

namespace detail {

inline bool parse_flag(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on") return true;
  if (v == "0" || v == "false" || v == "off") return false;
  throw ConfigError("setting " + key + " expects a boolean, got '" + v + "'");
}

inline double parse_number(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) {
    throw ConfigError("setting " + key + " expects a number, got '" + v + "'");
  }
  return d;
}

inline unsigned parse_count(const std::string& key, const std::string& v) {
  const double d = parse_number(key, v);
  if (d < 0 || d != std::floor(d) || d > 1e9) {
    throw ConfigError("setting " + key + " expects a non-negative integer, got '" + v + "'");
  }
  return static_cast<unsigned>(d);
}

}  // namespace detail

inline void apply_setting(DesignPoint& p, const std::string& key, const std::string& v) {
  using namespace detail;
  if (key == "adaptive_adc") p.adaptive_adc = parse_flag(key, v);
  else if (key == "guard_bits") p.guard_bits = parse_count(key, v);
  else if (key == "karatsuba_level") p.ima.karatsuba_level = parse_count(key, v);
  else if (key == "compact_htree") p.ima.compact_htree = parse_flag(key, v);
  else if (key == "strassen") p.strassen = parse_flag(key, v);
  else if (key == "spread_buffers") p.spread_buffers = parse_flag(key, v);
  else if (key == "fc_tiles") p.fc_tiles = parse_flag(key, v);
  else if (key == "fc_adc_share") p.fc_adc_share = parse_count(key, v);
  else if (key == "fc_slowdown") p.fc_slowdown = parse_number(key, v);
  else if (key == "conv_edram_kb") p.conv_edram_kb = parse_number(key, v);
  else if (key == "fc_edram_kb") p.fc_edram_kb = parse_number(key, v);
  else if (key == "imas_per_tile") p.imas_per_tile = parse_count(key, v);
  else if (key == "ima_inputs") p.ima.inputs = parse_count(key, v);
  else if (key == "ima_outputs") p.ima.outputs = parse_count(key, v);
  else if (key == "replication_scale") p.replication_scale = parse_number(key, v);
  else if (key == "input_size") p.input_size = parse_count(key, v);
  else throw ConfigError("unknown setting '" + key + "'");
}

struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};

struct SweepRow {
  std::vector<std::pair<std::string, std::string>> settings;
  bool valid = true;
  std::string error;
  SuiteSummary summary;
  std::vector<EvalReport> reports;
  bool pareto = false;
  unsigned rank = 0;  // non-dominated layer on (CE, PE), 1 = front
};

// Full factorial grid in axis order (last axis varies fastest). Points that
// fail validation or verification stay in the table, marked invalid.
inline std::vector<SweepRow> sweep(const std::vector<NetworkDesc>& nets, const DesignPoint& base,
                                   const std::vector<SweepAxis>& axes) {
  for (const auto& a : axes) {
    if (a.values.empty()) throw ConfigError("sweep axis " + a.key + " has no values");
  }
  std::vector<SweepRow> rows;
  std::vector<std::size_t> idx(axes.size(), 0);
  while (true) {
    SweepRow row;
    DesignPoint p = base;
    for (std::size_t i = 0; i < axes.size(); ++i) {
      row.settings.emplace_back(axes[i].key, axes[i].values[idx[i]]);
    }
    try {
      for (const auto& [k, v] : row.settings) apply_setting(p, k, v);
      std::string tag;
      for (const auto& [k, v] : row.settings) tag += (tag.empty() ? "" : ",") + k + "=" + v;
      if (!tag.empty()) p.name = base.name + "[" + tag + "]";
      row.reports = simulate_suite(nets, p);
      row.summary = summarize(row.reports);
    } catch (const ConfigError& e) {
      row.valid = false;
      row.error = e.what();
    } catch (const VerificationError& e) {
      row.valid = false;
      row.error = e.what();
    } catch (const CapacityError& e) {
      row.valid = false;
      row.error = e.what();
    }
    rows.push_back(std::move(row));
    std::size_t k = axes.size();
    while (k > 0) {
      if (++idx[k - 1] < axes[k - 1].values.size()) break;
      idx[k - 1] = 0;
      --k;
    }
    if (k == 0) break;
  }

  // Non-dominated sorting on (CE, PE), both maximized.
  std::set<std::size_t> left;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].valid) left.insert(i);
  }
  auto dominates = [&](std::size_t a, std::size_t b) {
    const auto& x = rows[a].summary;
    const auto& y = rows[b].summary;
    return x.ce_gops_mm2 >= y.ce_gops_mm2 && x.pe_gops_w >= y.pe_gops_w &&
           (x.ce_gops_mm2 > y.ce_gops_mm2 || x.pe_gops_w > y.pe_gops_w);
  };
  for (unsigned layer = 1; !left.empty(); ++layer) {
    std::vector<std::size_t> front;
    for (auto i : left) {
      bool dominated = false;
      for (auto j : left) {
        if (j != i && dominates(j, i)) {
          dominated = true;
          break;
        }
      }
      if (!dominated) front.push_back(i);
    }
    for (auto i : front) {
      rows[i].rank = layer;
      rows[i].pareto = layer == 1;
      left.erase(i);
    }
  }
  return rows;
}

// Grows replication until throughput stops improving by more than `gain`
// (doubling), then bisects for the smallest scale within that margin of the
// saturated rate.
struct SaturationResult {
  double scale = 1;
  EvalReport report;
  unsigned evaluations = 0;
};

inline SaturationResult saturate(const NetworkDesc& net, DesignPoint p, double gain = 0.01,
                                 double max_scale = 1024) {
  SaturationResult out;
  auto eval = [&](double s) {
    p.replication_scale = s;
    ++out.evaluations;
    return simulate(net, p);
  };
  double s = 1;
  EvalReport best = eval(s);
  while (s < max_scale) {
    EvalReport next;
    try {
      next = eval(2 * s);
    } catch (const CapacityError&) {
      break;
    }
    if (next.throughput <= best.throughput * (1 + gain)) break;
    s *= 2;
    best = next;
  }
  double lo = std::max(1.0, s / 2), hi = s;
  const double target = best.throughput / (1 + gain);
  EvalReport hi_rep = best;
  for (int i = 0; i < 8 && hi - lo > 1e-3; ++i) {
    const double mid = 0.5 * (lo + hi);
    auto r = eval(mid);
    if (r.throughput >= target) {
      hi = mid;
      hi_rep = r;
    } else {
      lo = mid;
    }
  }
  out.scale = hi;
  out.report = hi_rep;
  return out;
}

}  // namespace newton
