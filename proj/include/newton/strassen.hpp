#pragma once

// One level of Strassen's algorithm over matrix quadrants: seven sub-matrix
// products with pre-combinations of the X and W quadrants and a fixed
// post-combination into the four output quadrants.

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "newton/error.hpp"
#include "newton/matrix.hpp"

namespace newton {

using IntMatrix = Matrix<std::int64_t>;

// Quadrant order: 11, 12, 21, 22.
using QuadrantCoeffs = std::array<int, 4>;

struct StrassenProduct {
  QuadrantCoeffs x_coeffs;
  QuadrantCoeffs w_coeffs;
  IntMatrix x_operand;  // pre-combined X quadrants (computed on the fly)
  IntMatrix w_operand;  // pre-combined W quadrants (programmed at install)
};

struct StrassenPlan {
  std::size_t x_rows = 0;
  std::size_t inner = 0;
  std::size_t w_cols = 0;
  std::array<StrassenProduct, 7> products;
  // post[q][p]: coefficient of product p in output quadrant q.
  std::array<std::array<int, 7>, 4> post{};
  std::array<unsigned, 7> ima_assignment{};
};

inline constexpr std::array<QuadrantCoeffs, 7> kStrassenXCoeffs{{
    {1, 0, 0, 1},   // (X11 + X22)
    {0, 0, 1, 1},   // (X21 + X22)
    {1, 0, 0, 0},   // X11
    {0, 0, 0, 1},   // X22
    {1, 1, 0, 0},   // (X11 + X12)
    {-1, 0, 1, 0},  // (X21 - X11)
    {0, 1, 0, -1},  // (X12 - X22)
}};

inline constexpr std::array<QuadrantCoeffs, 7> kStrassenWCoeffs{{
    {1, 0, 0, 1},   // (W11 + W22)
    {1, 0, 0, 0},   // W11
    {0, 1, 0, -1},  // (W12 - W22)
    {-1, 0, 1, 0},  // (W21 - W11)
    {0, 0, 0, 1},   // W22
    {1, 1, 0, 0},   // (W11 + W12)
    {0, 0, 1, 1},   // (W21 + W22)
}};

inline constexpr std::array<std::array<int, 7>, 4> kStrassenPost{{
    {1, 0, 0, 1, -1, 0, 1},  // C11 = P0 + P3 - P4 + P6
    {0, 0, 1, 0, 1, 0, 0},   // C12 = P2 + P4
    {0, 1, 0, 1, 0, 0, 0},   // C21 = P1 + P3
    {1, -1, 1, 0, 0, 1, 0},  // C22 = P0 - P1 + P2 + P5
}};

namespace detail {

inline IntMatrix quadrant(const IntMatrix& m, int q) {
  const std::size_t hr = m.rows() / 2;
  const std::size_t hc = m.cols() / 2;
  const std::size_t r0 = (q / 2) * hr;
  const std::size_t c0 = (q % 2) * hc;
  IntMatrix out(hr, hc);
  for (std::size_t r = 0; r < hr; ++r) {
    for (std::size_t c = 0; c < hc; ++c) {
      out(r, c) = m(r0 + r, c0 + c);
    }
  }
  return out;
}

inline IntMatrix combine(const std::array<IntMatrix, 4>& quads,
                         const QuadrantCoeffs& coeffs) {
  IntMatrix out(quads[0].rows(), quads[0].cols());
  for (int q = 0; q < 4; ++q) {
    if (coeffs[q] == 0) continue;
    for (std::size_t r = 0; r < out.rows(); ++r) {
      for (std::size_t c = 0; c < out.cols(); ++c) {
        out(r, c) += coeffs[q] * quads[q](r, c);
      }
    }
  }
  return out;
}

}  // namespace detail

// Plain triple-loop product; the oracle for every decomposition here.
inline IntMatrix matmul(const IntMatrix& a, const IntMatrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul inner dimensions differ");
  }
  IntMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const auto aik = a(i, k);
      if (aik == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) {
        out(i, j) += aik * b(k, j);
      }
    }
  }
  return out;
}

inline StrassenPlan strassen_partition(const IntMatrix& x, const IntMatrix& w) {
  if (x.cols() != w.rows()) {
    throw DimensionError("X columns (" + std::to_string(x.cols()) +
                         ") differ from W rows (" + std::to_string(w.rows()) +
                         ")");
  }
  if (x.rows() % 2 || x.cols() % 2 || w.cols() % 2 || x.rows() == 0 ||
      w.cols() == 0) {
    throw DimensionError("strassen requires non-empty even dimensions, got " +
                         std::to_string(x.rows()) + "x" +
                         std::to_string(x.cols()) + " * " +
                         std::to_string(w.rows()) + "x" +
                         std::to_string(w.cols()));
  }
  const std::array<IntMatrix, 4> xq{detail::quadrant(x, 0), detail::quadrant(x, 1),
                                    detail::quadrant(x, 2), detail::quadrant(x, 3)};
  const std::array<IntMatrix, 4> wq{detail::quadrant(w, 0), detail::quadrant(w, 1),
                                    detail::quadrant(w, 2), detail::quadrant(w, 3)};
  StrassenPlan plan;
  plan.x_rows = x.rows();
  plan.inner = x.cols();
  plan.w_cols = w.cols();
  for (std::size_t p = 0; p < 7; ++p) {
    plan.products[p] = {kStrassenXCoeffs[p], kStrassenWCoeffs[p],
                        detail::combine(xq, kStrassenXCoeffs[p]),
                        detail::combine(wq, kStrassenWCoeffs[p])};
    plan.ima_assignment[p] = static_cast<unsigned>(p);
  }
  plan.post = kStrassenPost;
  return plan;
}

struct StrassenResult {
  IntMatrix product;
  unsigned multiplications = 0;  // sub-matrix products evaluated
};

inline StrassenResult apply_strassen(const StrassenPlan& plan) {
  std::array<IntMatrix, 7> partial;
  for (std::size_t p = 0; p < 7; ++p) {
    partial[p] = matmul(plan.products[p].x_operand, plan.products[p].w_operand);
  }
  const std::size_t hr = plan.x_rows / 2;
  const std::size_t hc = plan.w_cols / 2;
  IntMatrix out(plan.x_rows, plan.w_cols);
  for (int q = 0; q < 4; ++q) {
    const std::size_t r0 = (q / 2) * hr;
    const std::size_t c0 = (q % 2) * hc;
    for (std::size_t p = 0; p < 7; ++p) {
      const int k = plan.post[q][p];
      if (k == 0) continue;
      for (std::size_t r = 0; r < hr; ++r) {
        for (std::size_t c = 0; c < hc; ++c) {
          out(r0 + r, c0 + c) += k * partial[p](r, c);
        }
      }
    }
  }
  return {std::move(out), 7};
}

struct StrassenTileAssignment {
  // One entry per co-resident plan: the IMA hosting each of P0..P6.
  std::vector<std::array<unsigned, 7>> plans;
  std::vector<unsigned> free_imas;
};

// Each Strassen plan replaces the eight quadrant products that would occupy
// eight IMAs, so a tile hosts one plan per eight IMAs and frees one of them.
inline StrassenTileAssignment strassen_tile_map(unsigned tile_imas) {
  if (tile_imas < 8) {
    throw CapacityError("strassen mapping needs at least 8 IMAs per tile, tile has " +
                        std::to_string(tile_imas));
  }
  StrassenTileAssignment out;
  const unsigned plans = tile_imas / 8;
  unsigned next = 0;
  for (unsigned k = 0; k < plans; ++k) {
    std::array<unsigned, 7> ids{};
    for (auto& id : ids) id = next++;
    out.plans.push_back(ids);
  }
  for (; next < tile_imas; ++next) out.free_imas.push_back(next);
  return out;
}

// Operand widths after pre-combination, for cost accounting. Sums of two
// 16-bit operands need 17 bits; differences are signed 17-bit values.
inline unsigned strassen_operand_bits(const QuadrantCoeffs& coeffs,
                                      unsigned base_bits = 16) {
  int terms = 0;
  for (int c : coeffs) terms += c != 0;
  return terms > 1 ? base_bits + 1 : base_bits;
}

// Column conversions of the seven products on the sliced datapath, against
// 8 * 128 for the plain quadrant products.
inline unsigned strassen_conversions(unsigned base_bits = 16, unsigned cell_bits = 2,
                                     unsigned dac_bits = 1) {
  unsigned n = 0;
  for (std::size_t p = 0; p < 7; ++p) {
    const unsigned wb = strassen_operand_bits(kStrassenWCoeffs[p], base_bits);
    const unsigned xb = strassen_operand_bits(kStrassenXCoeffs[p], base_bits);
    n += ((wb + cell_bits - 1) / cell_bits) * ((xb + dac_bits - 1) / dac_bits);
  }
  return n;
}

// Input planes streamed by the widest product.
inline unsigned strassen_iterations(unsigned base_bits = 16, unsigned dac_bits = 1) {
  unsigned n = 0;
  for (const auto& c : kStrassenXCoeffs) {
    n = std::max(n, (strassen_operand_bits(c, base_bits) + dac_bits - 1) / dac_bits);
  }
  return n;
}

}  // namespace newton
