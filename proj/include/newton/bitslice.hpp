#pragma once

// Bit-exact model of the crossbar dot-product datapath.
//
// A W-bit weight is stored as W/cell_bits cells, one per crossbar ("slice"),
// and a W-bit input is streamed as W/dac_bits planes, one per 100 ns
// iteration. Every (slice, iteration) pair yields one ADC sample per column;
// samples are shifted and added across slices, then across iterations, and
// the full-width accumulator is finally scaled, rounded and clamped to the
// fixed-point output.
//
// With the default shape (16-bit values, 2-bit cells, 1-bit DAC, 128 rows):
//   column sample      <= 384       (9 bits)
//   slice shift-add    <  2^23
//   accumulator        <  2^39
//   output             = bits [10, 25] after rounding; any bit >= 26 clamps.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "newton/error.hpp"
#include "newton/matrix.hpp"

namespace newton {

struct DatapathShape {
  unsigned value_bits = 16;
  unsigned cell_bits = 2;
  unsigned dac_bits = 1;
  unsigned rows = 128;
  unsigned cols = 128;
  unsigned drop_bits = 10;  // LSBs removed by the output scaling
  unsigned out_bits = 16;   // width of the fixed-point result

  constexpr unsigned slices() const { return value_bits / cell_bits; }
  constexpr unsigned iterations() const { return value_bits / dac_bits; }
  constexpr std::uint64_t max_value() const {
    return (std::uint64_t{1} << value_bits) - 1;
  }
  constexpr std::uint32_t max_cell() const { return (1u << cell_bits) - 1; }
  constexpr std::uint32_t max_input_digit() const {
    return (1u << dac_bits) - 1;
  }
  // Largest single-column analog sum.
  constexpr std::uint32_t max_sample() const {
    return rows * max_cell() * max_input_digit();
  }
  constexpr unsigned sample_bits() const {
    return static_cast<unsigned>(std::bit_width(max_sample()));
  }
  // Lowest accumulator bit position that forces saturation.
  constexpr unsigned clamp_bit() const { return drop_bits + out_bits; }
  constexpr std::uint64_t max_output() const {
    return (std::uint64_t{1} << out_bits) - 1;
  }

  void validate() const {
    if (value_bits == 0 || value_bits > 16) {
      throw DimensionError("value_bits must be in [1, 16]");
    }
    if (cell_bits == 0 || value_bits % cell_bits != 0) {
      throw DimensionError("cell_bits must divide value_bits");
    }
    if (dac_bits == 0 || value_bits % dac_bits != 0) {
      throw DimensionError("dac_bits must divide value_bits");
    }
    if (rows == 0 || cols == 0) {
      throw DimensionError("crossbar must have at least one row and column");
    }
    if (out_bits == 0 || out_bits > 16) {
      throw DimensionError("out_bits must be in [1, 16]");
    }
  }

  friend bool operator==(const DatapathShape&, const DatapathShape&) = default;
};

// 128x128 crossbar, 2-bit cells, 1-bit DAC, 16-bit operands.
inline constexpr DatapathShape kIdealShape{};

struct Fixed16 {
  std::uint16_t value = 0;
  int scale_exp = 0;  // metadata only: result = value * 2^scale_exp

  friend bool operator==(const Fixed16&, const Fixed16&) = default;
};

struct RawAccumulator {
  std::uint64_t value = 0;

  friend auto operator<=>(const RawAccumulator&, const RawAccumulator&) =
      default;
};

struct ColumnSample {
  std::uint32_t value = 0;
  unsigned column_slice = 0;
  unsigned iteration = 0;
};

// cells(slice)(row, col) holds weight bits [slice*cell_bits, ...).
class SlicedWeightMatrix {
 public:
  SlicedWeightMatrix(std::size_t rows, std::size_t cols, unsigned slices,
                     unsigned cell_bits)
      : cell_bits_(cell_bits),
        planes_(slices, Matrix<std::uint8_t>(rows, cols)) {}

  std::size_t rows() const { return planes_.empty() ? 0 : planes_[0].rows(); }
  std::size_t cols() const { return planes_.empty() ? 0 : planes_[0].cols(); }
  unsigned slices() const { return static_cast<unsigned>(planes_.size()); }
  unsigned cell_bits() const { return cell_bits_; }

  Matrix<std::uint8_t>& slice(unsigned s) { return planes_.at(s); }
  const Matrix<std::uint8_t>& slice(unsigned s) const { return planes_.at(s); }

  std::uint32_t reconstruct(std::size_t r, std::size_t c) const {
    std::uint32_t w = 0;
    for (unsigned s = 0; s < slices(); ++s) {
      w |= std::uint32_t{planes_[s](r, c)} << (s * cell_bits_);
    }
    return w;
  }

 private:
  unsigned cell_bits_;
  std::vector<Matrix<std::uint8_t>> planes_;
};

// planes[t][row] holds input bits [t*dac_bits, ...).
class InputBitPlanes {
 public:
  InputBitPlanes(std::size_t rows, unsigned planes, unsigned dac_bits)
      : dac_bits_(dac_bits),
        planes_(planes, std::vector<std::uint8_t>(rows, 0)) {}

  std::size_t rows() const { return planes_.empty() ? 0 : planes_[0].size(); }
  unsigned planes() const { return static_cast<unsigned>(planes_.size()); }
  unsigned dac_bits() const { return dac_bits_; }

  std::span<std::uint8_t> plane(unsigned t) { return planes_.at(t); }
  std::span<const std::uint8_t> plane(unsigned t) const {
    return planes_.at(t);
  }

  std::uint32_t reconstruct(std::size_t r) const {
    std::uint32_t x = 0;
    for (unsigned t = 0; t < planes(); ++t) {
      x |= std::uint32_t{planes_[t][r]} << (t * dac_bits_);
    }
    return x;
  }

 private:
  unsigned dac_bits_;
  std::vector<std::vector<std::uint8_t>> planes_;
};

namespace detail {

inline void check_values(std::span<const std::uint32_t> values,
                         const DatapathShape& shape, const char* what) {
  for (auto v : values) {
    if (v > shape.max_value()) {
      throw DimensionError(std::string(what) + " value exceeds " +
                           std::to_string(shape.value_bits) + " bits");
    }
  }
}

}  // namespace detail

inline SlicedWeightMatrix slice_weights(const Matrix<std::uint32_t>& weights,
                                        const DatapathShape& shape = kIdealShape) {
  shape.validate();
  if (weights.rows() > shape.rows || weights.cols() > shape.cols) {
    throw DimensionError("weight matrix " + std::to_string(weights.rows()) +
                         "x" + std::to_string(weights.cols()) +
                         " exceeds crossbar " + std::to_string(shape.rows) +
                         "x" + std::to_string(shape.cols));
  }
  detail::check_values(weights.data(), shape, "weight");

  SlicedWeightMatrix out(weights.rows(), weights.cols(), shape.slices(),
                         shape.cell_bits);
  for (unsigned s = 0; s < shape.slices(); ++s) {
    auto& plane = out.slice(s);
    for (std::size_t r = 0; r < weights.rows(); ++r) {
      for (std::size_t c = 0; c < weights.cols(); ++c) {
        plane(r, c) = static_cast<std::uint8_t>(
            (weights(r, c) >> (s * shape.cell_bits)) & shape.max_cell());
      }
    }
  }
  return out;
}

// Column-vector convenience: one weight per row, a single output column.
inline SlicedWeightMatrix slice_weights(std::span<const std::uint32_t> weights,
                                        const DatapathShape& shape = kIdealShape) {
  return slice_weights(
      Matrix<std::uint32_t>(weights.size(), 1,
                            std::vector<std::uint32_t>(weights.begin(),
                                                       weights.end())),
      shape);
}

inline InputBitPlanes plane_inputs(std::span<const std::uint32_t> inputs,
                                   const DatapathShape& shape = kIdealShape) {
  shape.validate();
  if (inputs.size() > shape.rows) {
    throw DimensionError(std::to_string(inputs.size()) +
                         " inputs exceed crossbar rows (" +
                         std::to_string(shape.rows) + ")");
  }
  detail::check_values(inputs, shape, "input");

  InputBitPlanes out(inputs.size(), shape.iterations(), shape.dac_bits);
  for (unsigned t = 0; t < shape.iterations(); ++t) {
    auto plane = out.plane(t);
    for (std::size_t r = 0; r < inputs.size(); ++r) {
      plane[r] = static_cast<std::uint8_t>((inputs[r] >> (t * shape.dac_bits)) &
                                           shape.max_input_digit());
    }
  }
  return out;
}

// Analog column sum of one crossbar column for one input plane.
inline std::uint32_t crossbar_column_mac(std::span<const std::uint8_t> cells,
                                         std::span<const std::uint8_t> bits) {
  if (cells.size() != bits.size()) {
    throw DimensionError("column and input plane row counts differ");
  }
  std::uint32_t sum = 0;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    sum += std::uint32_t{cells[r]} * bits[r];
  }
  return sum;
}

inline ColumnSample crossbar_column_mac(const SlicedWeightMatrix& weights,
                                        unsigned slice, std::size_t col,
                                        const InputBitPlanes& inputs,
                                        unsigned iteration) {
  if (weights.rows() != inputs.rows()) {
    throw DimensionError("weight rows and input rows differ");
  }
  const auto& plane = weights.slice(slice);
  const auto bits = inputs.plane(iteration);
  std::uint32_t sum = 0;
  for (std::size_t r = 0; r < plane.rows(); ++r) {
    sum += std::uint32_t{plane(r, col)} * bits[r];
  }
  return {sum, slice, iteration};
}

// Combines the per-slice samples of one iteration (ordered by slice).
inline std::uint64_t shift_add_columns(std::span<const ColumnSample> samples,
                                       const DatapathShape& shape = kIdealShape) {
  std::uint64_t acc = 0;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    acc += std::uint64_t{samples[s].value} << (s * shape.cell_bits);
  }
  return acc;
}

// Combines per-iteration partials (ordered by iteration).
inline RawAccumulator shift_add_iterations(
    std::span<const std::uint64_t> partials,
    const DatapathShape& shape = kIdealShape) {
  std::uint64_t acc = 0;
  for (std::size_t t = 0; t < partials.size(); ++t) {
    acc += partials[t] << (t * shape.dac_bits);
  }
  return {acc};
}

// Golden integer oracle: plain sum of products.
inline RawAccumulator reference_dot(std::span<const std::uint32_t> weights,
                                    std::span<const std::uint32_t> inputs) {
  if (weights.size() != inputs.size()) {
    throw DimensionError("weight and input lengths differ (" +
                         std::to_string(weights.size()) + " vs " +
                         std::to_string(inputs.size()) + ")");
  }
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += std::uint64_t{weights[i]} * inputs[i];
  }
  return {acc};
}

// Round half up at the drop boundary, then saturate. The clamp check sees the
// rounding carry, so a carry into the clamp zone saturates.
inline Fixed16 scale_round_clamp(RawAccumulator raw,
                                 const DatapathShape& shape = kIdealShape) {
  const std::uint64_t half =
      shape.drop_bits == 0 ? 0 : std::uint64_t{1} << (shape.drop_bits - 1);
  const std::uint64_t rounded = (raw.value + half) >> shape.drop_bits;
  const std::uint64_t v = std::min(rounded, shape.max_output());
  return {static_cast<std::uint16_t>(v), static_cast<int>(shape.drop_bits)};
}

// Full-precision accumulator produced by the sliced/planed crossbar pipeline
// for one output column.
inline RawAccumulator pipeline_raw(const SlicedWeightMatrix& weights,
                                   std::size_t col,
                                   const InputBitPlanes& inputs,
                                   const DatapathShape& shape = kIdealShape) {
  std::vector<ColumnSample> samples(weights.slices());
  std::vector<std::uint64_t> partials(inputs.planes());
  for (unsigned t = 0; t < inputs.planes(); ++t) {
    for (unsigned s = 0; s < weights.slices(); ++s) {
      samples[s] = crossbar_column_mac(weights, s, col, inputs, t);
    }
    partials[t] = shift_add_columns(samples, shape);
  }
  return shift_add_iterations(partials, shape);
}

inline Fixed16 pipeline_dot(std::span<const std::uint32_t> weights,
                            std::span<const std::uint32_t> inputs,
                            const DatapathShape& shape = kIdealShape) {
  if (weights.size() != inputs.size()) {
    throw DimensionError("weight and input lengths differ (" +
                         std::to_string(weights.size()) + " vs " +
                         std::to_string(inputs.size()) + ")");
  }
  const auto sliced = slice_weights(weights, shape);
  const auto planes = plane_inputs(inputs, shape);
  return scale_round_clamp(pipeline_raw(sliced, 0, planes, shape), shape);
}

// Dot product of arbitrary-width operands on the sliced datapath: weights
// are cut into ceil(weight_bits / cell_bits) cells (top slice zero-padded)
// and inputs streamed over ceil(input_bits / dac_bits) planes. Used by the
// divide-and-conquer decompositions whose sub-operands are 4..9 bits wide.
struct SlicedDotResult {
  RawAccumulator raw;
  std::uint64_t conversions = 0;  // ADC samples per output column
};

inline SlicedDotResult sliced_dot(std::span<const std::uint32_t> weights,
                                  std::span<const std::uint32_t> inputs,
                                  unsigned weight_bits, unsigned input_bits,
                                  unsigned cell_bits = 2,
                                  unsigned dac_bits = 1) {
  if (weights.size() != inputs.size()) {
    throw DimensionError("weight and input lengths differ");
  }
  const unsigned slices = (weight_bits + cell_bits - 1) / cell_bits;
  const unsigned planes = (input_bits + dac_bits - 1) / dac_bits;
  const std::uint32_t cell_mask = (1u << cell_bits) - 1;
  const std::uint32_t dac_mask = (1u << dac_bits) - 1;

  std::vector<std::uint8_t> cells(weights.size());
  std::vector<std::uint8_t> bits(inputs.size());
  std::uint64_t acc = 0;
  for (unsigned t = 0; t < planes; ++t) {
    for (std::size_t r = 0; r < inputs.size(); ++r) {
      bits[r] = static_cast<std::uint8_t>((inputs[r] >> (t * dac_bits)) & dac_mask);
    }
    std::uint64_t partial = 0;
    for (unsigned s = 0; s < slices; ++s) {
      for (std::size_t r = 0; r < weights.size(); ++r) {
        cells[r] =
            static_cast<std::uint8_t>((weights[r] >> (s * cell_bits)) & cell_mask);
      }
      partial += std::uint64_t{crossbar_column_mac(cells, bits)} << (s * cell_bits);
    }
    acc += partial << (t * dac_bits);
  }
  return {{acc}, std::uint64_t{slices} * planes};
}

// Vector-matrix product: one fixed-point output per weight column.
inline std::vector<Fixed16> pipeline_matvec(
    const Matrix<std::uint32_t>& weights, std::span<const std::uint32_t> inputs,
    const DatapathShape& shape = kIdealShape) {
  if (weights.rows() != inputs.size()) {
    throw DimensionError("weight rows and input length differ");
  }
  const auto sliced = slice_weights(weights, shape);
  const auto planes = plane_inputs(inputs, shape);
  std::vector<Fixed16> out;
  out.reserve(weights.cols());
  for (std::size_t c = 0; c < weights.cols(); ++c) {
    out.push_back(
        scale_round_clamp(pipeline_raw(sliced, c, planes, shape), shape));
  }
  return out;
}

}  // namespace newton
