#pragma once

// Layer -> IMA -> tile assignment, replication and per-tile buffers.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "newton/arch.hpp"
#include "newton/error.hpp"
#include "newton/network.hpp"
#include "newton/strassen.hpp"

namespace newton {

enum class MappingMode { naive, spread };

inline const char* to_string(MappingMode m) { return m == MappingMode::naive ? "naive" : "spread"; }

struct LayerFit {
  std::uint64_t row_blocks = 0;
  std::uint64_t col_blocks = 0;
  std::uint64_t imas = 0;       // one copy
  std::uint64_t crossbars = 0;  // one copy
  double utilization = 0.0;     // used cells / provisioned cells
};

inline std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

// Constrained fit: an IMA holds one layer and at most `inputs` distinct
// inputs, so the weight matrix folds into whole IMAs.
inline LayerFit crossbars_for_layer(const LayerDesc& layer, const ImaConfig& ima) {
  ima.validate();
  if (!layer.has_weights()) return {};
  LayerFit f;
  const std::uint64_t rows = layer.weight_rows(), cols = layer.weight_cols();
  f.row_blocks = ceil_div(rows, ima.inputs);
  f.col_blocks = ceil_div(cols, ima.outputs);
  f.imas = f.row_blocks * f.col_blocks;
  f.crossbars = f.imas * ima.crossbars();
  const double used = static_cast<double>(rows) * cols * ima.slices();
  f.utilization = used / (static_cast<double>(f.crossbars) * ima.xbar_rows * ima.xbar_cols);
  return f;
}

// Unconstrained fit: crossbar granularity, IMAs packed across layers.
inline std::uint64_t dense_crossbars(const LayerDesc& layer, const ImaConfig& ima) {
  if (!layer.has_weights()) return 0;
  return ceil_div(layer.weight_rows(), ima.xbar_rows) *
         ceil_div(layer.weight_cols() * ima.slices(), ima.xbar_cols);
}

// r_l = ceil(steps_l / steps_min) over conv layers; 1 for everything else.
inline std::vector<unsigned> replication_factors(const std::vector<LayerDesc>& layers) {
  std::uint64_t steps_min = 0;
  for (const auto& l : layers) {
    if (l.kind != LayerKind::conv) continue;
    steps_min = steps_min == 0 ? l.steps() : std::min(steps_min, l.steps());
  }
  std::vector<unsigned> r;
  r.reserve(layers.size());
  for (const auto& l : layers) {
    r.push_back(l.kind == LayerKind::conv && steps_min
                    ? static_cast<unsigned>(ceil_div(l.steps(), steps_min))
                    : 1u);
  }
  return r;
}

// Steady-state input window kept by one layer, in bytes.
inline double layer_buffer_bytes(const LayerDesc& l) {
  switch (l.kind) {
    case LayerKind::conv:
    case LayerKind::pool:
      return ((l.ky - 1.0) * l.input_w + l.kx) * l.ni * 2.0;
    case LayerKind::fc:
      return l.ni * 2.0 * 2.0;  // double-buffered input vector
    case LayerKind::spp:
      return 0.0;
  }
  return 0.0;
}

// Per-tile bytes a layer needs when it spans `tiles_spanned` tiles.
inline double buffer_requirement(const LayerDesc& l, MappingMode mode,
                                 std::uint64_t tiles_spanned = 1) {
  const double b = layer_buffer_bytes(l) * (l.skip_input ? 2.0 : 1.0);
  if (mode == MappingMode::naive || tiles_spanned == 0) return b;
  return b / static_cast<double>(tiles_spanned);
}

struct MapOptions {
  ImaConfig ima{};
  ImaConfig fc_ima{};
  unsigned imas_per_tile = 16;
  bool constrained = true;
  MappingMode mode = MappingMode::spread;
  bool fc_tiles = true;
  bool strassen = false;
  double conv_edram_kb = 16;
  double fc_edram_kb = 4;
  std::uint64_t max_tiles = 0;  // 0: no limit
  // Scales every replication factor; used by the saturation search.
  double replication_scale = 1.0;
};

struct LayerMapping {
  std::string name;
  LayerKind kind = LayerKind::conv;
  TileKind tile_kind = TileKind::conv;
  std::uint64_t rows = 0, cols = 0;
  std::uint64_t row_blocks = 0, col_blocks = 0;
  unsigned replication = 1;
  std::uint64_t imas = 0;  // all copies
  std::uint64_t crossbars = 0;
  std::uint64_t imas_per_copy = 0;
  // Replicas of a narrow layer packed side by side into one IMA group.
  unsigned pack = 1;
  std::uint64_t imas_per_group = 0;
  double utilization = 0.0;
  double layer_buffer_bytes = 0.0;
  double buffer_bytes_per_tile = 0.0;
  std::uint64_t first_tile = 0, tiles_spanned = 0;  // buffer fragments
  std::uint64_t host_first_tile = 0, host_last_tile = 0;  // IMAs
  bool strassen = false;
  std::uint64_t strassen_freed_imas = 0;
  std::uint64_t windows = 0;  // sequential windows per image on one copy
  std::uint64_t ima_windows = 0;  // IMA-windows per image, all copies
  unsigned window_iterations = 0;  // input planes per window
  double row_fraction = 1.0, column_fraction = 1.0;
};

struct TileMapping {
  TileKind kind = TileKind::conv;
  double buffer_bytes = 0.0;
  unsigned imas_used = 0;
};

struct MappingPlan {
  MappingMode mode = MappingMode::spread;
  bool constrained = true;
  std::vector<LayerMapping> layers;
  std::vector<TileMapping> tiles;
  std::uint64_t conv_tiles = 0, fc_tiles = 0;
  std::uint64_t conv_imas = 0, fc_imas = 0;
  double max_tile_buffer = 0.0, mean_tile_buffer = 0.0;
  double conv_edram_kb = 0, fc_edram_kb = 0;
  bool buffer_overflow = false;
  std::uint64_t used_cells = 0, provisioned_cells = 0;

  double utilization() const {
    return provisioned_cells ? static_cast<double>(used_cells) / provisioned_cells : 0.0;
  }
  std::uint64_t total_tiles() const { return conv_tiles + fc_tiles; }
};

namespace detail {

// Needs quadrants on both sides and replicas to regroup.
inline bool strassen_eligible(const LayerMapping& m) {
  return m.kind == LayerKind::conv && m.replication >= 2 && m.row_blocks >= 2 &&
         m.col_blocks >= 2;
}

}  // namespace detail

struct ReplicaPack {
  unsigned k = 1;
  std::uint64_t rows = 0;  // distinct inputs of the packed group
  std::uint64_t imas = 0;  // IMAs per group
};

// k replicas computing horizontally adjacent output pixels read
// Ky x (Kx + (k-1) stride) x Ni distinct inputs and write k x No outputs.
// Picks the k with the fewest IMAs per replica (smallest k on ties).
inline ReplicaPack best_replica_pack(const LayerDesc& l, unsigned replication,
                                     const ImaConfig& ima) {
  ReplicaPack best;
  best.rows = l.weight_rows();
  best.imas = ceil_div(best.rows, ima.inputs) * ceil_div(l.weight_cols(), ima.outputs);
  if (l.kind != LayerKind::conv) return best;
  const unsigned k_max = std::min<unsigned>(replication, ima.outputs / std::max(1u, l.no));
  for (unsigned k = 2; k <= k_max; ++k) {
    const std::uint64_t rows = std::uint64_t{l.ky} * (l.kx + (k - 1) * l.stride) * l.ni;
    const std::uint64_t imas =
        ceil_div(rows, ima.inputs) * ceil_div(std::uint64_t{k} * l.no, ima.outputs);
    if (imas * best.k < best.imas * k) best = {k, rows, imas};
  }
  return best;
}

inline MappingPlan plan_network(const std::vector<LayerDesc>& layers, const MapOptions& opt) {
  opt.ima.validate();
  opt.fc_ima.validate();
  if (opt.imas_per_tile == 0) throw ConfigError("tile has no IMAs");
  MappingPlan plan;
  plan.mode = opt.mode;
  plan.constrained = opt.constrained;
  plan.conv_edram_kb = opt.conv_edram_kb;
  plan.fc_edram_kb = opt.fc_tiles ? opt.fc_edram_kb : opt.conv_edram_kb;

  auto reps = replication_factors(layers);
  if (opt.replication_scale != 1.0) {
    for (auto& r : reps) {
      r = std::max(1u, static_cast<unsigned>(std::ceil(r * opt.replication_scale - 1e-9)));
    }
  }

  // Pooling windows are buffered next to the conv layer feeding them.
  double carry_buffer = 0.0;
  std::vector<double> pool_extra(layers.size(), 0.0);
  for (std::size_t i = layers.size(); i-- > 0;) {
    if (layers[i].kind == LayerKind::pool) {
      carry_buffer += layer_buffer_bytes(layers[i]);
    } else if (layers[i].has_weights()) {
      pool_extra[i] = carry_buffer;
      carry_buffer = 0.0;
    }
  }

  std::uint64_t dense_conv = 0, dense_fc = 0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (!l.has_weights()) continue;
    LayerMapping m;
    m.name = l.name;
    m.kind = l.kind;
    const bool on_fc = l.kind == LayerKind::fc && opt.fc_tiles;
    m.tile_kind = on_fc ? TileKind::fc : TileKind::conv;
    const ImaConfig& ima = on_fc ? opt.fc_ima : opt.ima;
    const auto fit = crossbars_for_layer(l, ima);
    m.rows = l.weight_rows();
    m.cols = l.weight_cols();
    m.row_blocks = fit.row_blocks;
    m.col_blocks = fit.col_blocks;
    m.replication = reps[i];
    m.imas_per_copy = fit.imas;
    m.windows = ceil_div(l.steps(), m.replication);
    m.window_iterations = ima.iterations();
    const std::uint64_t used = m.rows * m.cols * ima.slices();
    if (opt.constrained) {
      const auto pk = best_replica_pack(l, m.replication, ima);
      m.pack = pk.k;
      m.imas_per_group = pk.imas;
      m.row_blocks = ceil_div(pk.rows, ima.inputs);
      m.col_blocks = ceil_div(std::uint64_t{pk.k} * m.cols, ima.outputs);
      m.imas = pk.imas * ceil_div(m.replication, pk.k);
      m.crossbars = m.imas * ima.crossbars();
      m.row_fraction = static_cast<double>(pk.rows) / (m.row_blocks * ima.inputs);
      m.column_fraction = static_cast<double>(pk.k * m.cols) / (m.col_blocks * ima.outputs);
      m.ima_windows = ceil_div(l.steps(), pk.k) * pk.imas;
    } else {
      m.imas_per_group = fit.imas;
      m.crossbars = dense_crossbars(l, ima) * m.replication;
      m.imas = ceil_div(m.crossbars, ima.crossbars());
      (on_fc ? dense_fc : dense_conv) += m.crossbars;
      m.row_fraction = static_cast<double>(m.rows) / (fit.row_blocks * ima.inputs);
      m.column_fraction = static_cast<double>(m.cols) / (fit.col_blocks * ima.outputs);
      m.ima_windows = l.steps() * fit.imas;
    }
    m.strassen = opt.strassen && opt.constrained &&
                 detail::strassen_eligible(m);
    if (m.strassen) {
      // 17-bit input sums stream one extra plane.
      m.window_iterations += strassen_iterations() - 16;
      // Seven quadrant products on seven IMAs where eight were needed.
      m.strassen_freed_imas = m.imas / 8;
      m.imas -= m.strassen_freed_imas;
      m.crossbars = m.imas * ima.crossbars();
    }
    m.utilization = static_cast<double>(used) * m.replication /
                    (static_cast<double>(m.crossbars) * ima.xbar_rows * ima.xbar_cols);
    m.layer_buffer_bytes =
        layer_buffer_bytes(l) * (l.skip_input ? 2.0 : 1.0) + pool_extra[i];
    plan.used_cells += used * m.replication;
    plan.provisioned_cells += m.crossbars * ima.xbar_rows * ima.xbar_cols;
    plan.layers.push_back(m);
  }

  // Tile assignment: layers fill tiles in index order.
  for (auto& m : plan.layers) (m.tile_kind == TileKind::fc ? plan.fc_imas : plan.conv_imas) += m.imas;
  if (!opt.constrained) {
    plan.conv_imas = ceil_div(dense_conv, opt.ima.crossbars());
    plan.fc_imas = ceil_div(dense_fc, opt.fc_ima.crossbars());
  }
  plan.conv_tiles = ceil_div(plan.conv_imas, opt.imas_per_tile);
  plan.fc_tiles = ceil_div(plan.fc_imas, opt.imas_per_tile);
  if (opt.max_tiles && plan.total_tiles() > opt.max_tiles) {
    throw CapacityError("network needs " + std::to_string(plan.total_tiles()) +
                        " tiles, " + std::to_string(opt.max_tiles) + " available (deficit " +
                        std::to_string(plan.total_tiles() - opt.max_tiles) + ")");
  }
  plan.tiles.resize(plan.total_tiles());
  for (std::uint64_t t = 0; t < plan.tiles.size(); ++t) {
    plan.tiles[t].kind = t < plan.conv_tiles ? TileKind::conv : TileKind::fc;
  }

  std::uint64_t cursor[2] = {0, 0};  // IMA slots consumed per tile kind
  std::uint64_t spread_offset[2] = {0, 0};
  for (auto& m : plan.layers) {
    const int k = m.tile_kind == TileKind::fc ? 1 : 0;
    const std::uint64_t base = k ? plan.conv_tiles : 0;
    const std::uint64_t n_tiles = k ? plan.fc_tiles : plan.conv_tiles;
    if (n_tiles == 0) continue;
    const std::uint64_t first = cursor[k] / opt.imas_per_tile;
    const std::uint64_t last =
        std::min(n_tiles - 1, (cursor[k] + std::max<std::uint64_t>(m.imas, 1) - 1) / opt.imas_per_tile);
    for (std::uint64_t t = first; t <= last; ++t) {
      const std::uint64_t lo = std::max(cursor[k], t * opt.imas_per_tile);
      const std::uint64_t hi = std::min(cursor[k] + m.imas, (t + 1) * opt.imas_per_tile);
      if (hi > lo) plan.tiles[base + t].imas_used += static_cast<unsigned>(hi - lo);
    }
    cursor[k] += m.imas;
    m.host_first_tile = base + first;
    m.host_last_tile = base + last;
    if (opt.mode == MappingMode::naive) {
      // Every hosting tile keeps the whole input window.
      m.first_tile = base + first;
      m.tiles_spanned = last - first + 1;
      m.buffer_bytes_per_tile = m.layer_buffer_bytes;
      for (std::uint64_t t = first; t <= last; ++t) {
        plan.tiles[base + t].buffer_bytes += m.buffer_bytes_per_tile;
      }
    } else {
      // Fine partitions of every layer across as many tiles as it has
      // IMAs, replicas co-located so they read one buffer.
      m.tiles_spanned = std::min<std::uint64_t>(n_tiles, std::max<std::uint64_t>(m.imas, 1));
      m.first_tile = base + spread_offset[k] % n_tiles;
      m.buffer_bytes_per_tile = m.layer_buffer_bytes / m.tiles_spanned;
      for (std::uint64_t j = 0; j < m.tiles_spanned; ++j) {
        plan.tiles[base + (spread_offset[k] + j) % n_tiles].buffer_bytes += m.buffer_bytes_per_tile;
      }
      spread_offset[k] += m.tiles_spanned;
    }
  }

  double sum = 0.0;
  for (const auto& t : plan.tiles) {
    plan.max_tile_buffer = std::max(plan.max_tile_buffer, t.buffer_bytes);
    sum += t.buffer_bytes;
    const double cap = (t.kind == TileKind::fc ? plan.fc_edram_kb : plan.conv_edram_kb) * 1024.0;
    if (t.buffer_bytes > cap) plan.buffer_overflow = true;
  }
  plan.mean_tile_buffer = plan.tiles.empty() ? 0.0 : sum / plan.tiles.size();
  return plan;
}

inline MappingPlan plan_network(const NetworkDesc& net, const MapOptions& opt) {
  return plan_network(expand_layers(net), opt);
}

// Unused fraction of provisioned crossbar cells.
inline double underutilization(const MappingPlan& plan) { return 1.0 - plan.utilization(); }

// Mean over networks of the unused-cell fraction, each network weighted
// internally by crossbar count.
inline double suite_underutilization(const std::vector<NetworkDesc>& nets, const ImaConfig& ima) {
  if (nets.empty()) return 0.0;
  MapOptions opt;
  opt.ima = ima;
  opt.fc_ima = ima;
  opt.fc_tiles = false;
  double sum = 0.0;
  for (const auto& n : nets) sum += underutilization(plan_network(n, opt));
  return sum / nets.size();
}

}  // namespace newton
