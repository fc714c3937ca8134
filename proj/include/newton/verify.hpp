#pragma once

// Equivalence suites: every numeric path against a plain integer oracle.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "newton/adaptive_adc.hpp"
#include "newton/bitslice.hpp"
#include "newton/karatsuba.hpp"
#include "newton/strassen.hpp"

namespace newton {

struct SuiteResult {
  std::string name;
  std::uint64_t cases = 0;
  std::uint64_t mismatches = 0;
  bool passed() const { return mismatches == 0; }
};

struct VerifyReport {
  std::uint64_t seed = 0;
  std::vector<SuiteResult> suites;

  bool passed() const {
    for (const auto& s : suites) {
      if (!s.passed()) return false;
    }
    return true;
  }
};

struct VerifyOptions {
  std::uint64_t seed = 42;
  std::uint64_t random_cases = 10000;  // full-scale pipeline and adaptive
  std::uint64_t decomposition_cases = 1000;
  bool exhaustive = true;
  unsigned guard_bits = 9;
  bool bitslice = true, karatsuba = true, strassen = true, adaptive = true;
};

namespace detail {

// Random 16-bit vector with a bias toward extreme values, which is where the
// clamp and rounding edges live.
inline void fill_operands(std::mt19937_64& rng, std::vector<std::uint32_t>& v,
                          std::uint32_t max) {
  const auto mode = rng() % 4;
  for (auto& e : v) {
    const auto r = static_cast<std::uint32_t>(rng());
    switch (mode) {
      case 0: e = r & max; break;
      case 1: e = (r & 7) == 0 ? max : r & max; break;
      case 2: e = r & (max >> 6); break;
      default: e = (r & 1) ? max - (r >> 16 & 3) : r & 3; break;
    }
  }
}

// Reduced shapes for exhaustive sweeps: (rows, value bits).
inline constexpr std::pair<unsigned, unsigned> kExhaustiveShapes[] = {
    {1, 6}, {2, 4}, {2, 5}, {3, 3}, {4, 2}};

inline DatapathShape reduced_shape(unsigned rows, unsigned bits) {
  DatapathShape s;
  s.value_bits = bits;
  s.cell_bits = bits % 2 == 0 ? 2 : 1;
  s.dac_bits = 1;
  s.rows = rows;
  s.cols = 1;
  s.drop_bits = bits;  // keeps a non-trivial clamp zone
  s.out_bits = bits;
  return s;
}

}  // namespace detail

inline SuiteResult verify_pipeline_exhaustive() {
  SuiteResult r{"pipeline.exhaustive"};
  for (const auto& [rows, bits] : detail::kExhaustiveShapes) {
    const auto shape = detail::reduced_shape(rows, bits);
    const unsigned total = 2 * rows * bits;
    const std::uint32_t mask = (1u << bits) - 1;
    std::vector<std::uint32_t> w(rows), x(rows);
    for (std::uint64_t k = 0; k < (std::uint64_t{1} << total); ++k) {
      std::uint64_t b = k;
      for (unsigned i = 0; i < rows; ++i) {
        w[i] = static_cast<std::uint32_t>(b) & mask;
        b >>= bits;
        x[i] = static_cast<std::uint32_t>(b) & mask;
        b >>= bits;
      }
      ++r.cases;
      if (pipeline_dot(w, x, shape) != scale_round_clamp(reference_dot(w, x), shape)) {
        ++r.mismatches;
      }
    }
  }
  return r;
}

inline SuiteResult verify_pipeline_random(std::uint64_t seed, std::uint64_t cases) {
  SuiteResult r{"pipeline.random128"};
  std::mt19937_64 rng(seed);
  std::vector<std::uint32_t> w(128), x(128);
  for (std::uint64_t i = 0; i < cases; ++i) {
    detail::fill_operands(rng, w, 0xFFFF);
    detail::fill_operands(rng, x, 0xFFFF);
    ++r.cases;
    if (pipeline_dot(w, x) != scale_round_clamp(reference_dot(w, x))) ++r.mismatches;
  }
  return r;
}

inline SuiteResult verify_karatsuba(unsigned level, std::uint64_t seed, std::uint64_t cases) {
  SuiteResult r{"karatsuba.level" + std::to_string(level)};
  std::mt19937_64 rng(seed + level);
  std::vector<std::uint32_t> w(128), x(128);
  for (std::uint64_t i = 0; i < cases; ++i) {
    detail::fill_operands(rng, w, 0xFFFF);
    detail::fill_operands(rng, x, 0xFFFF);
    ++r.cases;
    const auto plan = karatsuba_split(w, level);
    if (karatsuba_dot(plan, x) != reference_dot(w, x)) ++r.mismatches;
  }
  return r;
}

inline SuiteResult verify_strassen(std::uint64_t seed, std::uint64_t cases) {
  SuiteResult r{"strassen"};
  std::mt19937_64 rng(seed + 7);
  for (std::uint64_t i = 0; i < cases; ++i) {
    const std::size_t m = 2 * (1 + rng() % 4), k = 2 * (1 + rng() % 8), n = 2 * (1 + rng() % 4);
    IntMatrix x(m, k), w(k, n);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < k; ++b) x(a, b) = static_cast<std::int64_t>(rng() & 0xFFFF);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < n; ++b) w(a, b) = static_cast<std::int64_t>(rng() & 0xFFFF);
    ++r.cases;
    if (apply_strassen(strassen_partition(x, w)).product != matmul(x, w)) ++r.mismatches;
  }
  return r;
}

inline SuiteResult verify_adaptive(unsigned guard_bits, std::uint64_t seed, std::uint64_t cases) {
  SuiteResult r{"adaptive.g" + std::to_string(guard_bits)};
  const auto grid = derive_grid(guard_bits);
  std::mt19937_64 rng(seed + 11);
  std::vector<std::uint32_t> w(128), x(128);
  for (std::uint64_t i = 0; i < cases; ++i) {
    detail::fill_operands(rng, w, 0xFFFF);
    detail::fill_operands(rng, x, 0xFFFF);
    ++r.cases;
    if (adaptive_pipeline_dot(w, x, grid) != pipeline_dot(w, x)) ++r.mismatches;
  }
  return r;
}

// Exhaustive check of a guard level on a reduced shape that drops the same
// number of LSB positions.
inline SuiteResult verify_adaptive_reduced(unsigned guard_bits) {
  SuiteResult r{"adaptive.reduced.g" + std::to_string(guard_bits)};
  const DatapathShape reduced{4, 2, 1, 2, 1, 3, 4};
  const unsigned g = transfer_guard_bits(guard_bits, kIdealShape, reduced);
  r.cases = std::uint64_t{1} << (2 * reduced.rows * reduced.value_bits);
  r.mismatches = exhaustive_mismatches(derive_grid(g, reduced), reduced.rows);
  return r;
}

// Smallest exact guard level at full scale, found on the reduced shape.
inline unsigned exact_guard_bits() {
  const DatapathShape reduced{4, 2, 1, 2, 1, 3, 4};
  return transfer_guard_bits(find_exact_guard_bits(reduced, reduced.rows), reduced, kIdealShape);
}

inline VerifyReport run_verification(const VerifyOptions& opt) {
  VerifyReport rep;
  rep.seed = opt.seed;
  if (opt.bitslice) {
    if (opt.exhaustive) rep.suites.push_back(verify_pipeline_exhaustive());
    rep.suites.push_back(verify_pipeline_random(opt.seed, opt.random_cases));
  }
  if (opt.karatsuba) {
    rep.suites.push_back(verify_karatsuba(1, opt.seed, opt.decomposition_cases));
    rep.suites.push_back(verify_karatsuba(2, opt.seed, opt.decomposition_cases));
  }
  if (opt.strassen) rep.suites.push_back(verify_strassen(opt.seed, opt.decomposition_cases));
  if (opt.adaptive) {
    rep.suites.push_back(verify_adaptive_reduced(opt.guard_bits));
    rep.suites.push_back(verify_adaptive(opt.guard_bits, opt.seed, opt.random_cases));
  }
  return rep;
}

}  // namespace newton
