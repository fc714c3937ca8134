#pragma once

// Per-sample ADC resolution derived from the fixed-point output window.
//
// The sample of column slice c in iteration t lands at accumulator bits
// [shift, shift + sample_bits), shift = c*cell_bits + t*dac_bits. Only the
// bits inside [drop_bits - guard, clamp_bit) can reach the 16-bit result;
// anything above is saturation, detected by a single comparison at the
// bottom of the clamp zone.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "newton/bitslice.hpp"
#include "newton/error.hpp"

namespace newton {

struct AdcCell {
  unsigned shift = 0;       // global bit position of the sample LSB
  unsigned kept_bits = 0;   // sample bits inside the output window
  unsigned start_bit = 0;   // global position of the lowest kept bit
  bool clamp_test = false;  // sample reaches into the clamp zone

  unsigned resolved_bits() const { return kept_bits + (clamp_test ? 1u : 0u); }
};

class AdcGrid {
 public:
  AdcGrid(DatapathShape shape, unsigned guard_bits, int keep_low, int keep_high)
      : shape_(shape),
        guard_bits_(guard_bits),
        keep_low_(keep_low),
        keep_high_(keep_high),
        cells_(std::size_t{shape.slices()} * shape.iterations()) {}

  const DatapathShape& shape() const { return shape_; }
  unsigned guard_bits() const { return guard_bits_; }
  unsigned slices() const { return shape_.slices(); }
  unsigned iterations() const { return shape_.iterations(); }
  // Inclusive kept window in accumulator bit positions; empty if low > high.
  int keep_low() const { return keep_low_; }
  int keep_high() const { return keep_high_; }
  unsigned window_low() const { return shape_.drop_bits; }
  unsigned window_high() const { return shape_.clamp_bit() - 1; }

  AdcCell& cell(unsigned slice, unsigned iteration) {
    return cells_.at(std::size_t{iteration} * slices() + slice);
  }
  const AdcCell& cell(unsigned slice, unsigned iteration) const {
    return cells_.at(std::size_t{iteration} * slices() + slice);
  }

  std::span<const AdcCell> cells() const { return cells_; }

  unsigned total_kept_bits() const {
    unsigned n = 0;
    for (const auto& c : cells_) n += c.kept_bits;
    return n;
  }
  unsigned total_resolved_bits() const {
    unsigned n = 0;
    for (const auto& c : cells_) n += c.resolved_bits();
    return n;
  }

 private:
  DatapathShape shape_;
  unsigned guard_bits_;
  int keep_low_;
  int keep_high_;
  std::vector<AdcCell> cells_;
};

// Grid for an explicit kept window [keep_low, keep_high]. Bits above
// keep_high are treated as clamp zone.
inline AdcGrid derive_grid_window(const DatapathShape& shape, int keep_low,
                                  int keep_high, unsigned guard_bits = 0) {
  shape.validate();
  AdcGrid grid(shape, guard_bits, keep_low, keep_high);
  const int width = static_cast<int>(shape.sample_bits());
  for (unsigned t = 0; t < shape.iterations(); ++t) {
    for (unsigned c = 0; c < shape.slices(); ++c) {
      auto& cell = grid.cell(c, t);
      const int lo = static_cast<int>(c * shape.cell_bits + t * shape.dac_bits);
      const int hi = lo + width - 1;
      const int a = std::max(lo, keep_low);
      const int b = std::min(hi, keep_high);
      cell.shift = static_cast<unsigned>(lo);
      cell.kept_bits = b >= a ? static_cast<unsigned>(b - a + 1) : 0u;
      cell.start_bit = static_cast<unsigned>(b >= a ? a : std::max(lo, keep_low));
      cell.clamp_test = hi > keep_high;
    }
  }
  return grid;
}

inline AdcGrid derive_grid(unsigned guard_bits,
                           const DatapathShape& shape = kIdealShape) {
  if (guard_bits > shape.drop_bits) {
    throw ConfigError("guard_bits " + std::to_string(guard_bits) +
                      " exceeds the " + std::to_string(shape.drop_bits) +
                      " dropped LSBs");
  }
  return derive_grid_window(
      shape, static_cast<int>(shape.drop_bits - guard_bits),
      static_cast<int>(shape.clamp_bit()) - 1, guard_bits);
}

// Largest number of columns in any one iteration that need every sample bit.
inline unsigned max_full_resolution_per_iteration(const AdcGrid& grid) {
  const unsigned full = grid.shape().sample_bits();
  unsigned best = 0;
  for (unsigned t = 0; t < grid.iterations(); ++t) {
    unsigned n = 0;
    for (unsigned c = 0; c < grid.slices(); ++c) {
      n += grid.cell(c, t).kept_bits == full;
    }
    best = std::max(best, n);
  }
  return best;
}

struct SarResult {
  std::uint32_t code = 0;  // kept bits, right-aligned
  bool clamp_flag = false;
  unsigned resolved_bits = 0;  // comparator decisions spent
};

// The clamp test is a single comparison at the lowest clamp-zone bit: it fires
// iff any truncated MSB is set, and then the conversion stops.
inline SarResult sar_convert(std::uint32_t sample, const AdcCell& cell) {
  SarResult out;
  if (cell.clamp_test) {
    const unsigned local_clamp = cell.start_bit + cell.kept_bits > cell.shift
                                     ? cell.start_bit + cell.kept_bits - cell.shift
                                     : 0u;
    if (local_clamp >= 32 ? false : (sample >> local_clamp) != 0) {
      out.clamp_flag = true;
      out.resolved_bits = 1;
      return out;
    }
  }
  if (cell.kept_bits > 0) {
    const unsigned lo = cell.start_bit - cell.shift;
    out.code = (sample >> lo) & ((1u << cell.kept_bits) - 1);
  }
  out.resolved_bits = cell.resolved_bits();
  return out;
}

struct AdaptiveDotResult {
  Fixed16 value;
  bool clamped = false;
  unsigned resolved_bits = 0;
};

inline AdaptiveDotResult adaptive_pipeline_run(
    std::span<const std::uint32_t> weights,
    std::span<const std::uint32_t> inputs, const AdcGrid& grid) {
  const auto& shape = grid.shape();
  if (weights.size() != inputs.size()) {
    throw DimensionError("weight and input lengths differ");
  }
  const auto sliced = slice_weights(weights, shape);
  const auto planes = plane_inputs(inputs, shape);

  AdaptiveDotResult out;
  std::uint64_t acc = 0;
  for (unsigned t = 0; t < shape.iterations(); ++t) {
    for (unsigned s = 0; s < shape.slices(); ++s) {
      const auto sample = crossbar_column_mac(sliced, s, 0, planes, t);
      const auto& cell = grid.cell(s, t);
      const auto r = sar_convert(sample.value, cell);
      out.resolved_bits += r.resolved_bits;
      if (r.clamp_flag) {
        out.clamped = true;
        continue;
      }
      acc += std::uint64_t{r.code} << cell.start_bit;
    }
  }
  if (out.clamped) {
    out.value = {static_cast<std::uint16_t>(shape.max_output()),
                 static_cast<int>(shape.drop_bits)};
  } else {
    out.value = scale_round_clamp({acc}, shape);
  }
  return out;
}

inline Fixed16 adaptive_pipeline_dot(std::span<const std::uint32_t> weights,
                                     std::span<const std::uint32_t> inputs,
                                     const AdcGrid& grid) {
  return adaptive_pipeline_run(weights, inputs, grid).value;
}

// Counts adaptive-vs-full mismatches over every weight/input vector of the
// given shape (rows = vector length). Exponential in rows*value_bits; meant
// for the reduced shapes only.
inline std::uint64_t exhaustive_mismatches(const AdcGrid& grid,
                                           unsigned vector_len) {
  const auto& shape = grid.shape();
  const unsigned total_bits = 2 * vector_len * shape.value_bits;
  if (total_bits > 32) {
    throw ConfigError("exhaustive search space too large (" +
                      std::to_string(total_bits) + " bits)");
  }
  const std::uint64_t combos = std::uint64_t{1} << total_bits;
  const std::uint32_t mask = static_cast<std::uint32_t>(shape.max_value());
  std::vector<std::uint32_t> w(vector_len), x(vector_len);
  std::uint64_t mismatches = 0;
  for (std::uint64_t k = 0; k < combos; ++k) {
    std::uint64_t bits = k;
    for (unsigned i = 0; i < vector_len; ++i) {
      w[i] = static_cast<std::uint32_t>(bits) & mask;
      bits >>= shape.value_bits;
      x[i] = static_cast<std::uint32_t>(bits) & mask;
      bits >>= shape.value_bits;
    }
    const auto full = scale_round_clamp(reference_dot(w, x), shape);
    if (adaptive_pipeline_dot(w, x, grid) != full) ++mismatches;
  }
  return mismatches;
}

// Smallest guard level with zero mismatches over the exhaustive space.
inline unsigned find_exact_guard_bits(const DatapathShape& shape,
                                      unsigned vector_len) {
  for (unsigned g = 0; g <= shape.drop_bits; ++g) {
    if (exhaustive_mismatches(derive_grid(g, shape), vector_len) == 0) return g;
  }
  return shape.drop_bits;
}

// Carries a guard level found on a reduced shape over to another shape by
// preserving the number of LSB positions that may be dropped.
inline unsigned transfer_guard_bits(unsigned guard, const DatapathShape& from,
                                    const DatapathShape& to) {
  const unsigned droppable = from.drop_bits - std::min(guard, from.drop_bits);
  return to.drop_bits - std::min(droppable, to.drop_bits);
}

// SAR ADC power split. The sampling clock keeps running while every other
// block is gated off for unresolved bits.
struct AdcPowerModel {
  double base_power_mw = 3.1;  // 8-bit SAR at 1.2 GSps
  double ref_rate_gsps = 1.2;
  double cdac = 1.0 / 3.0;
  double digital = 1.0 / 4.0;
  double analog_other = 1.0 / 3.0;
  double sampling_clock = 1.0 / 12.0;
  // Signed-value encoding that trims one bit of resolution (power only).
  bool encoding_saves_bit = false;

  double fraction_sum() const {
    return cdac + digital + analog_other + sampling_clock;
  }

  // Energy of one full-resolution conversion; independent of sampling rate
  // because power scales linearly with rate.
  double conversion_energy_pj() const { return base_power_mw / ref_rate_gsps; }

  double gateable() const { return cdac + digital + analog_other; }

  // New model with the given CDAC share; the other blocks keep their
  // relative proportions.
  AdcPowerModel with_cdac_fraction(double f) const {
    if (f < 0.0 || f >= 1.0) throw ConfigError("cdac fraction must be in [0, 1)");
    AdcPowerModel m = *this;
    const double rest_old = 1.0 - cdac;
    const double scale = (1.0 - f) / rest_old;
    m.cdac = f;
    m.digital *= scale;
    m.analog_other *= scale;
    m.sampling_clock *= scale;
    return m;
  }

  void validate() const {
    if (base_power_mw <= 0.0 || ref_rate_gsps <= 0.0) {
      throw ConfigError("ADC power and reference rate must be positive");
    }
    if (cdac < 0 || digital < 0 || analog_other < 0 || sampling_clock < 0) {
      throw ConfigError("ADC power fractions must be non-negative");
    }
    if (std::abs(fraction_sum() - 1.0) > 1e-9) {
      throw ConfigError("ADC power fractions must sum to 1");
    }
  }
};

// Energy of one conversion that spends `resolved` comparator decisions.
// Zero decisions means the sample is skipped entirely.
inline double conversion_energy_pj(unsigned resolved, unsigned full_bits,
                                   const AdcPowerModel& model) {
  if (resolved == 0) return 0.0;
  const unsigned enc = model.encoding_saves_bit ? 1u : 0u;
  const double denom = static_cast<double>(full_bits - enc);
  const double bits = resolved > enc ? static_cast<double>(resolved - enc) : 0.0;
  const double frac = std::min(1.0, bits / denom);
  return model.conversion_energy_pj() *
         (model.sampling_clock + model.gateable() * frac);
}

struct AdcEnergy {
  double window_pj = 0.0;    // one output column, all slices and iterations
  double baseline_pj = 0.0;  // same window at full resolution everywhere
  double sampling_rate_gsps = 0.0;

  double ratio() const { return baseline_pj > 0 ? window_pj / baseline_pj : 0.0; }
  // Average ADC power when converting back-to-back at the given rate.
  double power_mw(unsigned conversions) const {
    return conversions == 0 ? 0.0
                            : window_pj / conversions * sampling_rate_gsps;
  }
};

inline AdcEnergy adc_energy(const AdcGrid& grid, const AdcPowerModel& model,
                            double sampling_rate_gsps) {
  model.validate();
  const unsigned full = grid.shape().sample_bits();
  AdcEnergy e;
  e.sampling_rate_gsps = sampling_rate_gsps;
  for (const auto& cell : grid.cells()) {
    e.window_pj += conversion_energy_pj(cell.resolved_bits(), full, model);
    e.baseline_pj += conversion_energy_pj(full, full, model);
  }
  return e;
}

}  // namespace newton
