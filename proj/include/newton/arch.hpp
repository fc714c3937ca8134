#pragma once

// Component catalog and the crossbar -> IMA -> tile -> chip composition.
//
// Peak power of an IMA is its full-activity window energy divided by the
// window time, so slowing a tile's ADCs lowers the power of everything in
// its IMAs. Tile-level blocks (router share, bus, eDRAM, pooling) draw
// their nominal power whenever the tile is provisioned.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "newton/adaptive_adc.hpp"
#include "newton/error.hpp"
#include "newton/karatsuba.hpp"

namespace newton {

struct ComponentSpec {
  double power_mw = 0.0;
  double area_mm2 = 0.0;
};

struct Catalog {
  // Published component table.
  ComponentSpec router{168.0, 0.604};
  unsigned tiles_per_router = 4;
  double router_flit_bits = 32;
  unsigned router_ports = 8;
  double router_clock_ghz = 1.0;
  ComponentSpec adc{3.1, 0.0015};  // 8-bit SAR at 1.2 GSps
  double adc_rate_gsps = 1.2;
  ComponentSpec hyper_transport{10400.0, 22.88};  // per chip, 4 links
  unsigned ht_links = 4;
  double ht_link_gbytes = 6.4;
  ComponentSpec dac_array{0.5, 0.00002};  // 128 1-bit DACs, one per crossbar
  ComponentSpec crossbar{0.3, 0.0001};    // 128 x 128, 2-bit cells

  // Modeling assumptions (ISAAC-style 32 nm figures).
  ComponentSpec edram_per_kb{20.7 / 64.0, 0.083 / 64.0};
  ComponentSpec bus{7.0, 0.090};
  ComponentSpec sigmoid{0.52, 0.0006};
  ComponentSpec maxpool{0.4, 0.00024};
  ComponentSpec tile_output_reg{1.68, 0.0032};  // 3 KB
  ComponentSpec tile_shift_add{0.05, 0.00006};
  ComponentSpec input_reg{1.24, 0.0021};   // 2 KB per IMA
  ComponentSpec output_reg{0.23, 0.00077};  // 256 B per IMA
  ComponentSpec shift_add{0.05, 0.00006};  // per unit, 4 per IMA
  unsigned shift_add_per_ima = 4;
  ComponentSpec sample_hold{0.00125, 0.000005};  // 128 units, per crossbar
  ComponentSpec input_adders{0.05, 0.00006};     // 128 1-bit full adders

  // HTree wires, per bit of link width times normalized link length.
  // Calibrated, see docs/formats.md.
  double htree_area_mm2 = 9.5e-6;
  double htree_energy_pj = 0.055;

  // Energy per byte moved, from rated power over rated bandwidth.
  double router_pj_per_byte() const {
    return router.power_mw / (router_ports * router_flit_bits / 8.0 * router_clock_ghz);
  }
  double ht_pj_per_byte() const { return hyper_transport.power_mw / (ht_links * ht_link_gbytes); }

  double cycle_ns = 100.0;
  unsigned tiles_per_chip = 168;
  AdcPowerModel adc_model{};
};

enum class TileKind { conv, fc };

inline const char* to_string(TileKind k) { return k == TileKind::conv ? "conv" : "fc"; }

struct ImaConfig {
  unsigned inputs = 128;   // distinct inputs per IMA
  unsigned outputs = 256;  // neurons per IMA
  unsigned xbar_rows = 128;
  unsigned xbar_cols = 128;
  unsigned cell_bits = 2;
  unsigned weight_bits = 16;
  unsigned input_bits = 16;
  unsigned adc_share = 1;    // crossbars per ADC
  double adc_slowdown = 1.0;  // ADC rate divisor
  bool compact_htree = true;
  unsigned karatsuba_level = 0;

  unsigned slices() const { return weight_bits / cell_bits; }
  unsigned row_groups() const { return inputs / xbar_rows; }
  unsigned col_groups() const { return outputs * slices() / xbar_cols; }
  // Crossbars holding one copy of the weights.
  unsigned crossbars() const { return row_groups() * col_groups(); }
  unsigned output_groups() const { return outputs / xbar_cols; }
  unsigned mats() const { return crossbars(); }
  // Karatsuba adds crossbars to every mat; mats keep one DAC and one ADC.
  unsigned physical_crossbars() const {
    if (karatsuba_level == 0) return crossbars();
    const unsigned per_group = karatsuba_level == 1 ? 16 : 20;
    return crossbars() / slices() * per_group;
  }
  unsigned adcs() const { return crossbars() / adc_share; }
  unsigned iterations() const { return karatsuba_cost(karatsuba_level).iterations; }
  // Window: every crossbar output column converted once per iteration.
  double window_ns(double cycle_ns) const {
    return iterations() * cycle_ns * adc_share * adc_slowdown;
  }

  void validate() const {
    if (inputs == 0 || outputs == 0 || xbar_rows == 0 || xbar_cols == 0) {
      throw ConfigError("IMA dimensions must be positive");
    }
    if (inputs % xbar_rows != 0) throw ConfigError("IMA inputs must be a multiple of crossbar rows");
    if (cell_bits == 0 || weight_bits % cell_bits != 0) {
      throw ConfigError("weight bits must be a multiple of cell bits");
    }
    if ((outputs * slices()) % xbar_cols != 0) {
      throw ConfigError("IMA outputs do not fill whole crossbars");
    }
    if (crossbars() == 0) throw ConfigError("IMA has no crossbars");
    if (adc_share == 0 || crossbars() % adc_share != 0) {
      throw ConfigError("crossbar count must be a multiple of the ADC share ratio");
    }
    if (adc_slowdown < 1.0) throw ConfigError("ADC slowdown must be >= 1");
    if (karatsuba_level > 2) throw ConfigError("karatsuba level must be 0, 1 or 2");
    if (karatsuba_level > 0 && (weight_bits != 16 || output_groups() == 0)) {
      throw ConfigError("karatsuba needs 16-bit weights and whole output groups");
    }
  }
};

// Link widths of the IMA input and output trees, root level first. A tree
// over n leaves has ceil(log2 n) link levels; level l (1-based from the
// root) has 2^l links of normalized length 2^-(l-1)/2.
struct HTreeShape {
  std::vector<double> input_widths;
  std::vector<double> output_widths;
  double root_output_width = 0;

  static double level_length(std::size_t level) {
    return std::pow(2.0, -static_cast<double>(level - 1) / 2.0);
  }
  static double wire(const std::vector<double>& widths) {
    double sum = 0.0;
    for (std::size_t l = 1; l <= widths.size(); ++l) {
      sum += std::pow(2.0, static_cast<double>(l)) * widths[l - 1] * level_length(l);
    }
    return sum;
  }
  double input_wire() const { return wire(input_widths); }
  double output_wire() const { return wire(output_widths); }
  double total_wire() const { return input_wire() + output_wire(); }
};

inline unsigned ceil_log2(unsigned n) {
  unsigned l = 0;
  while ((1u << l) < n) ++l;
  return l;
}

inline HTreeShape htree_shape(const ImaConfig& cfg) {
  const unsigned leaves = cfg.crossbars();
  const unsigned levels = ceil_log2(leaves);
  // Shared ADCs sit at the root of a crossbar subtree; digital outputs only
  // travel on the links above them.
  const unsigned adc_levels = ceil_log2(cfg.adcs());
  const double sample_bits = ceil_log2(cfg.xbar_rows * ((1u << cfg.cell_bits) - 1) + 1);
  HTreeShape h;
  for (unsigned l = 1; l <= levels; ++l) {
    const double below = static_cast<double>(leaves) / std::pow(2.0, l);
    if (cfg.compact_htree) {
      // One input vector per row group, broadcast to every slice.
      const double groups = std::max(1.0, cfg.row_groups() / std::pow(2.0, l));
      double in = cfg.xbar_rows * groups;
      // Karatsuba sends both input halves where a subtree holds both
      // weight halves.
      if (cfg.karatsuba_level > 0 &&
          below >= static_cast<double>(cfg.slices()) / cfg.karatsuba_level) {
        in *= 2;
      }
      h.input_widths.push_back(in);
      // Shift-and-add at every junction grows the sample by 2 bits.
      h.output_widths.push_back(l <= adc_levels ? sample_bits + 2.0 * (adc_levels - l) : 0.0);
    } else {
      h.input_widths.push_back(cfg.xbar_rows * below);
      h.output_widths.push_back(l <= adc_levels ? sample_bits * cfg.adcs() / std::pow(2.0, l)
                                                : 0.0);
    }
  }
  h.root_output_width = cfg.compact_htree ? sample_bits + 2.0 * adc_levels
                                          : sample_bits * cfg.adcs();
  return h;
}

// Per-component energy of one IMA window, in pJ.
struct ImaEnergy {
  double adc = 0, crossbar = 0, dac = 0, sample_hold = 0, htree_in = 0,
         htree_out = 0, registers = 0, shift_add = 0, adders = 0;

  double total() const {
    return adc + crossbar + dac + sample_hold + htree_in + htree_out +
           registers + shift_add + adders;
  }
  ImaEnergy& operator+=(const ImaEnergy& o) {
    adc += o.adc;
    crossbar += o.crossbar;
    dac += o.dac;
    sample_hold += o.sample_hold;
    htree_in += o.htree_in;
    htree_out += o.htree_out;
    registers += o.registers;
    shift_add += o.shift_add;
    adders += o.adders;
    return *this;
  }
  ImaEnergy scaled(double k) const {
    ImaEnergy e = *this;
    e.adc *= k;
    e.crossbar *= k;
    e.dac *= k;
    e.sample_hold *= k;
    e.htree_in *= k;
    e.htree_out *= k;
    e.registers *= k;
    e.shift_add *= k;
    e.adders *= k;
    return e;
  }
};

// What a window actually exercises.
struct ImaActivity {
  double column_fraction = 1.0;  // used output columns / provisioned
  double row_fraction = 1.0;     // used input rows / provisioned
  // Mean conversion energy relative to a full-resolution conversion.
  double adc_energy_ratio = 1.0;
  // Scale on crossbar/ADC work from matrix decompositions.
  double conversion_scale = 1.0;
};

inline ImaEnergy ima_window_energy(const ImaConfig& cfg, const Catalog& cat,
                                   const ImaActivity& act = {}) {
  cfg.validate();
  const auto cost = karatsuba_cost(cfg.karatsuba_level);
  const double groups = static_cast<double>(cfg.crossbars()) / cfg.slices();
  // Crossbar-iterations in one window (equals ADC conversions per column).
  const double xbar_iters = groups * cost.adc_conversions * act.conversion_scale;
  const double full_iters = cfg.crossbars() * 16.0;
  const double mw_to_pj = cat.cycle_ns;  // mW over one cycle, in pJ
  const auto h = htree_shape(cfg);

  ImaEnergy e;
  const double conversions = xbar_iters * cfg.xbar_cols * act.column_fraction;
  // An ADC at rated power converts one crossbar's columns every cycle.
  const double per_conversion = cat.adc.power_mw * mw_to_pj / cfg.xbar_cols;
  e.adc = conversions * per_conversion * act.adc_energy_ratio;
  e.crossbar = xbar_iters * cat.crossbar.power_mw * mw_to_pj * act.row_fraction;
  e.dac = xbar_iters * cat.dac_array.power_mw * mw_to_pj * act.row_fraction;
  e.sample_hold = xbar_iters * cat.sample_hold.power_mw * mw_to_pj;
  // Each iteration moves one input plane down the tree and every converted
  // column sample up it.
  e.htree_in = cat.htree_energy_pj * h.input_wire() * cfg.iterations() * act.row_fraction;
  e.htree_out = cat.htree_energy_pj * h.output_wire() * cfg.xbar_cols *
                act.column_fraction * (xbar_iters / full_iters) * 16.0;
  const double reg_mw = cat.input_reg.power_mw + cat.output_reg.power_mw *
                                                     (cfg.karatsuba_level ? 2.0 : 1.0);
  // Registers and adders run at the cycle rate, not the ADC rate.
  e.registers = reg_mw * mw_to_pj * cfg.iterations();
  e.shift_add = cat.shift_add_per_ima * cat.shift_add.power_mw * mw_to_pj * cfg.iterations();
  if (cfg.karatsuba_level > 0) e.adders = cat.input_adders.power_mw * mw_to_pj * cfg.iterations();
  return e;
}

struct Breakdown {
  std::map<std::string, double> items;

  double total() const {
    double s = 0;
    for (const auto& [k, v] : items) s += v;
    return s;
  }
  double get(const std::string& k) const {
    auto it = items.find(k);
    return it == items.end() ? 0.0 : it->second;
  }
  Breakdown& add(const std::string& k, double v) {
    items[k] += v;
    return *this;
  }
  Breakdown& operator+=(const Breakdown& o) {
    for (const auto& [k, v] : o.items) items[k] += v;
    return *this;
  }
  Breakdown scaled(double f) const {
    Breakdown b = *this;
    for (auto& [k, v] : b.items) v *= f;
    return b;
  }
};

inline Breakdown to_breakdown(const ImaEnergy& e) {
  Breakdown b;
  b.add("adc", e.adc)
      .add("crossbar", e.crossbar)
      .add("dac", e.dac)
      .add("sample_hold", e.sample_hold)
      .add("htree", e.htree_in + e.htree_out)
      .add("ima_registers", e.registers)
      .add("shift_add", e.shift_add + e.adders);
  return b;
}

struct UnitSummary {
  Breakdown area_mm2;
  Breakdown power_mw;
  double area() const { return area_mm2.total(); }
  double power() const { return power_mw.total(); }
};

struct ImaSummary : UnitSummary {
  HTreeShape htree;
  double window_ns = 0;
};

inline ImaSummary build_ima(const ImaConfig& cfg, const Catalog& cat,
                            const ImaActivity& act = {}) {
  cfg.validate();
  ImaSummary s;
  s.htree = htree_shape(cfg);
  s.window_ns = cfg.window_ns(cat.cycle_ns);
  s.area_mm2.add("adc", cfg.adcs() * cat.adc.area_mm2)
      .add("crossbar", cfg.physical_crossbars() * cat.crossbar.area_mm2)
      .add("dac", cfg.mats() * cat.dac_array.area_mm2)
      .add("sample_hold", cfg.physical_crossbars() * cat.sample_hold.area_mm2)
      .add("htree", cat.htree_area_mm2 * s.htree.total_wire())
      .add("ima_registers", cat.input_reg.area_mm2 +
                                cat.output_reg.area_mm2 * (cfg.karatsuba_level ? 2.0 : 1.0))
      .add("shift_add", cat.shift_add_per_ima * cat.shift_add.area_mm2 +
                            (cfg.karatsuba_level ? cat.input_adders.area_mm2 : 0.0));
  // Full activity at the window rate.
  ImaActivity full;
  full.adc_energy_ratio = act.adc_energy_ratio;
  const auto e = ima_window_energy(cfg, cat, full);
  s.power_mw = to_breakdown(e).scaled(1.0 / s.window_ns);  // pJ/ns = mW
  return s;
}

struct TileConfig {
  TileKind kind = TileKind::conv;
  unsigned imas = 16;
  double edram_kb = 16;
  ImaConfig ima{};

  void validate() const {
    if (imas == 0) throw ConfigError("tile has no IMAs");
    if (edram_kb < 0) throw ConfigError("negative eDRAM size");
    ima.validate();
  }
};

// Conv tile and classifier tile defaults.
inline TileConfig conv_tile(unsigned karatsuba_level = 0, double edram_kb = 16) {
  TileConfig t;
  t.kind = TileKind::conv;
  t.edram_kb = edram_kb;
  t.ima.karatsuba_level = karatsuba_level;
  return t;
}

// Classifier IMAs keep one ADC per conv-IMA mat and hang `adc_share`
// crossbars behind it, so one IMA holds adc_share times the neurons.
inline TileConfig fc_tile(unsigned adc_share = 4, double slowdown = 128.0,
                          double edram_kb = 4) {
  TileConfig t;
  t.kind = TileKind::fc;
  t.edram_kb = edram_kb;
  t.ima.adc_share = adc_share;
  t.ima.adc_slowdown = slowdown;
  t.ima.outputs *= adc_share;
  return t;
}

// Tile-level blocks outside the IMAs.
inline UnitSummary tile_overhead(const TileConfig& cfg, const Catalog& cat) {
  UnitSummary s;
  const double router_share = 1.0 / cat.tiles_per_router;
  s.area_mm2.add("edram", cfg.edram_kb * cat.edram_per_kb.area_mm2)
      .add("bus", cat.bus.area_mm2)
      .add("router", cat.router.area_mm2 * router_share)
      .add("tile_digital", cat.sigmoid.area_mm2 + cat.maxpool.area_mm2 +
                               cat.tile_output_reg.area_mm2 + cat.tile_shift_add.area_mm2);
  s.power_mw.add("edram", cfg.edram_kb * cat.edram_per_kb.power_mw)
      .add("bus", cat.bus.power_mw)
      .add("router", cat.router.power_mw * router_share)
      .add("tile_digital", cat.sigmoid.power_mw + cat.maxpool.power_mw +
                               cat.tile_output_reg.power_mw + cat.tile_shift_add.power_mw);
  return s;
}

inline UnitSummary build_tile(const TileConfig& cfg, const Catalog& cat,
                              const ImaActivity& act = {}) {
  cfg.validate();
  const auto ima = build_ima(cfg.ima, cat, act);
  UnitSummary s = tile_overhead(cfg, cat);
  s.area_mm2 += ima.area_mm2.scaled(cfg.imas);
  s.power_mw += ima.power_mw.scaled(cfg.imas);
  return s;
}

// Hyper-transport share carried by each tile of a full chip.
inline UnitSummary ht_share(const Catalog& cat, double tiles = 1.0) {
  UnitSummary s;
  s.area_mm2.add("hyper_transport", cat.hyper_transport.area_mm2 * tiles / cat.tiles_per_chip);
  s.power_mw.add("hyper_transport", cat.hyper_transport.power_mw * tiles / cat.tiles_per_chip);
  return s;
}

struct ChipSummary : UnitSummary {
  double adc_power_share() const {
    const double p = power();
    return p > 0 ? power_mw.get("adc") / p : 0.0;
  }
};

// Totals over a tile list, with the chip-level link power shared per tile.
inline ChipSummary build_chip(const std::vector<TileConfig>& tiles, const Catalog& cat,
                              const ImaActivity& act = {}) {
  if (tiles.empty()) throw ConfigError("chip has no tiles");
  ChipSummary c;
  for (const auto& t : tiles) {
    const auto s = build_tile(t, cat, act);
    c.area_mm2 += s.area_mm2;
    c.power_mw += s.power_mw;
  }
  const auto ht = ht_share(cat, static_cast<double>(tiles.size()));
  c.area_mm2 += ht.area_mm2;
  c.power_mw += ht.power_mw;
  return c;
}

struct NoiseParams {
  double rrange = 384;
  double delta_r = 0.75;
  double levels = 4;
};

// Rows that can be energized together without write-precision errors
// adding up past one level.
inline unsigned active_rows(const NoiseParams& n) {
  if (!(n.rrange > 0) || !(n.delta_r > 0) || !(n.levels > 0)) {
    throw ConfigError("noise parameters must be positive");
  }
  return static_cast<unsigned>(std::floor(n.rrange / (n.levels * n.delta_r) + 1e-9));
}

}  // namespace newton
