#pragma once

// Karatsuba decomposition of the 16-bit dot product over bit halves.
//
//   W = W1*2^h + W0,  X = X1*2^h + X0
//   W.X = W1X1*2^2h + (WsXs - W1X1 - W0X0)*2^h + W0X0,  Ws = W0+W1, Xs = X0+X1
//
// Every sub-product runs on the sliced crossbar datapath, so W0X0 with 8-bit
// halves occupies four 2-bit slices for eight iterations and the 9-bit sum
// group occupies five slices (top slice zero-padded) for nine iterations.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "newton/bitslice.hpp"
#include "newton/error.hpp"

namespace newton {

struct DecompositionCost {
  unsigned adc_conversions = 0;  // column conversions per dot-product window
  unsigned iterations = 0;       // window length in 100 ns cycles
  unsigned extra_crossbars = 0;  // per 128-output crossbar group
  unsigned extra_adders = 0;     // 1-bit serial adders for input sums

  friend bool operator==(const DecompositionCost&,
                         const DecompositionCost&) = default;
};

struct KaratsubaPlan {
  unsigned level = 1;
  unsigned operand_bits = 16;
  unsigned low_bits = 8;  // width of W0
  std::vector<std::uint32_t> w_low;
  std::vector<std::uint32_t> w_high;
  std::vector<std::uint32_t> w_sum;
  // Slices and iterations for {W0X0, W1X1, WsXs}.
  std::array<unsigned, 3> crossbar_alloc{};
  std::array<unsigned, 3> iteration_alloc{};
  // For level > 1: plans for {low, high, sum} groups, one level down.
  std::vector<KaratsubaPlan> children;

  unsigned high_bits() const { return operand_bits - low_bits; }
  unsigned sum_bits() const {
    return (low_bits > high_bits() ? low_bits : high_bits()) + 1;
  }
};

namespace detail {

inline unsigned ceil_div(unsigned a, unsigned b) { return (a + b - 1) / b; }

inline KaratsubaPlan split_level(std::span<const std::uint32_t> weights,
                                 unsigned level, unsigned operand_bits,
                                 unsigned cell_bits) {
  KaratsubaPlan plan;
  plan.level = level;
  plan.operand_bits = operand_bits;
  plan.low_bits = operand_bits / 2;
  const std::uint32_t low_mask = (1u << plan.low_bits) - 1;
  plan.w_low.reserve(weights.size());
  plan.w_high.reserve(weights.size());
  plan.w_sum.reserve(weights.size());
  for (auto w : weights) {
    if (w >> operand_bits) {
      throw DimensionError("weight exceeds " + std::to_string(operand_bits) +
                           " bits");
    }
    plan.w_low.push_back(w & low_mask);
    plan.w_high.push_back(w >> plan.low_bits);
    plan.w_sum.push_back(plan.w_low.back() + plan.w_high.back());
  }
  const unsigned widths[3] = {plan.low_bits, plan.high_bits(), plan.sum_bits()};
  for (int g = 0; g < 3; ++g) {
    plan.crossbar_alloc[g] = ceil_div(widths[g], cell_bits);
    plan.iteration_alloc[g] = widths[g];
  }
  if (level > 1) {
    plan.children.push_back(split_level(plan.w_low, level - 1, widths[0], cell_bits));
    plan.children.push_back(split_level(plan.w_high, level - 1, widths[1], cell_bits));
    plan.children.push_back(split_level(plan.w_sum, level - 1, widths[2], cell_bits));
  }
  return plan;
}

struct KaratsubaEval {
  std::uint64_t value = 0;
  std::uint64_t conversions = 0;
};

inline KaratsubaEval eval_group(const KaratsubaPlan* child,
                                std::span<const std::uint32_t> weights,
                                std::span<const std::uint32_t> inputs,
                                unsigned bits);

inline KaratsubaEval eval_plan(const KaratsubaPlan& plan,
                               std::span<const std::uint32_t> inputs) {
  const std::uint32_t low_mask = (1u << plan.low_bits) - 1;
  std::vector<std::uint32_t> x_low, x_high, x_sum;
  x_low.reserve(inputs.size());
  x_high.reserve(inputs.size());
  x_sum.reserve(inputs.size());
  for (auto x : inputs) {
    if (x >> plan.operand_bits) {
      throw DimensionError("input exceeds " + std::to_string(plan.operand_bits) +
                           " bits");
    }
    x_low.push_back(x & low_mask);
    x_high.push_back(x >> plan.low_bits);
    x_sum.push_back(x_low.back() + x_high.back());
  }
  const bool leaf = plan.children.empty();
  const auto ll = eval_group(leaf ? nullptr : &plan.children[0], plan.w_low,
                             x_low, plan.low_bits);
  const auto hh = eval_group(leaf ? nullptr : &plan.children[1], plan.w_high,
                             x_high, plan.high_bits());
  const auto ss = eval_group(leaf ? nullptr : &plan.children[2], plan.w_sum,
                             x_sum, plan.sum_bits());
  // Middle term W1X0 + W0X1 is non-negative, so unsigned subtraction is exact.
  const std::uint64_t mid = ss.value - hh.value - ll.value;
  return {(hh.value << (2 * plan.low_bits)) + (mid << plan.low_bits) + ll.value,
          ll.conversions + hh.conversions + ss.conversions};
}

inline KaratsubaEval eval_group(const KaratsubaPlan* child,
                                std::span<const std::uint32_t> weights,
                                std::span<const std::uint32_t> inputs,
                                unsigned bits) {
  if (child != nullptr) {
    return eval_plan(*child, inputs);
  }
  const auto r = sliced_dot(weights, inputs, bits, bits);
  return {r.raw.value, r.conversions};
}

}  // namespace detail

// Splits 16-bit weights into the Karatsuba groups. Level 2 recurses into each
// of the three groups.
inline KaratsubaPlan karatsuba_split(std::span<const std::uint32_t> weights,
                                     unsigned level = 1,
                                     unsigned operand_bits = 16) {
  if (level < 1 || level > 2) {
    throw ConfigError("karatsuba level must be 1 or 2");
  }
  return detail::split_level(weights, level, operand_bits, 2);
}

inline RawAccumulator karatsuba_dot(const KaratsubaPlan& plan,
                                    std::span<const std::uint32_t> inputs) {
  if (inputs.size() != plan.w_low.size()) {
    throw DimensionError("karatsuba plan has " +
                         std::to_string(plan.w_low.size()) + " rows, got " +
                         std::to_string(inputs.size()) + " inputs");
  }
  return {detail::eval_plan(plan, inputs).value};
}

// ADC conversions actually issued by karatsuba_dot per output column.
inline std::uint64_t karatsuba_structural_conversions(const KaratsubaPlan& plan) {
  std::vector<std::uint32_t> zeros(plan.w_low.size(), 0);
  return detail::eval_plan(plan, zeros).conversions;
}

// Cost table per 128-input window. Level 1 is the (4,4,5) crossbar / (8,8,9)
// iteration allocation: 4*8 + 4*8 + 5*9 = 109 conversions over 17 iterations.
// Level 2 keeps 8 ADCs busy for 4 iterations, then 6 ADCs for 10 iterations.
inline DecompositionCost karatsuba_cost(unsigned level) {
  switch (level) {
    case 0:
      return {128, 16, 0, 0};
    case 1:
      return {4 * 8 + 4 * 8 + 5 * 9, 8 + 9, 8, 128};
    case 2:
      return {8 * 4 + 6 * 10, 4 + 10, 12, 4 * 128};
    default:
      throw ConfigError("karatsuba level " + std::to_string(level) +
                        " unsupported (max 2)");
  }
}

}  // namespace newton
