#include <gtest/gtest.h>

#include <cstdint>
#include <random>
#include <vector>

#include "newton/karatsuba.hpp"
#include "newton/strassen.hpp"

using namespace newton;

namespace {

std::uint64_t naive_dot(const std::vector<std::uint32_t>& w,
                        const std::vector<std::uint32_t>& x) {
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += std::uint64_t{w[i]} * x[i];
  return acc;
}

IntMatrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c,
                        int lo, int hi) {
  std::uniform_int_distribution<int> d(lo, hi);
  IntMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = d(rng);
  return m;
}

}  // namespace

TEST(KaratsubaSplit, Examples) {
  std::vector<std::uint32_t> w{0x1234, 0, 0xFFFF};
  auto p = karatsuba_split(w);
  EXPECT_EQ(p.w_high[0], 0x12u);
  EXPECT_EQ(p.w_low[0], 0x34u);
  EXPECT_EQ(p.w_sum[0], 0x46u);
  EXPECT_EQ(p.w_high[1], 0u);
  EXPECT_EQ(p.w_low[1], 0u);
  EXPECT_EQ(p.w_sum[1], 0u);
  EXPECT_EQ(p.w_low[2], 255u);
  EXPECT_EQ(p.w_high[2], 255u);
  EXPECT_EQ(p.w_sum[2], 510u);
  EXPECT_LT(p.w_sum[2], 1u << 9);
}

TEST(KaratsubaSplit, AllocationAndReconstruction) {
  std::mt19937 rng(1);
  std::vector<std::uint32_t> w(128);
  for (auto& v : w) v = rng() & 0xFFFF;
  auto p = karatsuba_split(w);
  EXPECT_EQ(p.crossbar_alloc, (std::array<unsigned, 3>{4, 4, 5}));
  EXPECT_EQ(p.iteration_alloc, (std::array<unsigned, 3>{8, 8, 9}));
  for (std::size_t i = 0; i < w.size(); ++i) {
    EXPECT_EQ(p.w_high[i] * 256 + p.w_low[i], w[i]);
    EXPECT_EQ(p.w_sum[i], p.w_high[i] + p.w_low[i]);
  }
  EXPECT_THROW(karatsuba_split(w, 3), ConfigError);
  EXPECT_THROW(karatsuba_split(w, 0), ConfigError);
}

TEST(KaratsubaDot, Examples) {
  std::vector<std::uint32_t> w{0x1234}, x{0x00FF};
  auto p = karatsuba_split(w);
  EXPECT_EQ(karatsuba_dot(p, x).value, 4660u * 255u);
  EXPECT_EQ(karatsuba_dot(p, x).value, 1188300u);
  std::vector<std::uint32_t> zero{0};
  EXPECT_EQ(karatsuba_dot(p, zero).value, 0u);
  std::vector<std::uint32_t> two{1, 2};
  EXPECT_THROW(karatsuba_dot(p, two), DimensionError);
}

TEST(KaratsubaDot, RandomBothLevels) {
  std::mt19937_64 rng(2024);
  std::vector<std::uint32_t> w(128), x(128);
  for (unsigned level : {1u, 2u}) {
    for (int i = 0; i < 300; ++i) {
      for (auto& v : w) v = rng() & 0xFFFF;
      for (auto& v : x) v = rng() & 0xFFFF;
      auto p = karatsuba_split(w, level);
      ASSERT_EQ(karatsuba_dot(p, x).value, naive_dot(w, x)) << level;
    }
  }
}

TEST(KaratsubaDot, ExtremesBothLevels) {
  for (unsigned level : {1u, 2u}) {
    std::vector<std::uint32_t> w(128, 0xFFFF), x(128, 0xFFFF);
    auto p = karatsuba_split(w, level);
    EXPECT_EQ(karatsuba_dot(p, x).value, 549739036800ull);
  }
}

TEST(KaratsubaCost, Table) {
  EXPECT_EQ(karatsuba_cost(0).adc_conversions, 128u);
  EXPECT_EQ(karatsuba_cost(0).iterations, 16u);
  EXPECT_EQ(karatsuba_cost(1).adc_conversions, 109u);
  EXPECT_EQ(karatsuba_cost(1).iterations, 17u);
  EXPECT_EQ(karatsuba_cost(2).adc_conversions, 92u);
  EXPECT_EQ(karatsuba_cost(2).iterations, 14u);
  EXPECT_THROW(karatsuba_cost(3), ConfigError);

  // 1 - 109/128 and 1 - 92/128, in basis points.
  EXPECT_EQ((128 - 109) * 10000 / 128, 1484);
  EXPECT_EQ((128 - 92) * 1000 / 128, 281);
  EXPECT_LT(karatsuba_cost(2).adc_conversions, karatsuba_cost(1).adc_conversions);
  EXPECT_LT(karatsuba_cost(1).adc_conversions, karatsuba_cost(0).adc_conversions);
}

TEST(KaratsubaCost, Level1MatchesStructure) {
  std::vector<std::uint32_t> w(128, 1);
  auto p = karatsuba_split(w, 1);
  unsigned sum = 0;
  for (int g = 0; g < 3; ++g) sum += p.crossbar_alloc[g] * p.iteration_alloc[g];
  EXPECT_EQ(sum, karatsuba_cost(1).adc_conversions);
  EXPECT_EQ(karatsuba_structural_conversions(p), 109u);
}

TEST(StrassenPartition, Examples) {
  IntMatrix eye(2, 2);
  eye(0, 0) = eye(1, 1) = 1;
  auto r = apply_strassen(strassen_partition(eye, eye));
  EXPECT_EQ(r.product, eye);
  EXPECT_EQ(r.multiplications, 7u);

  IntMatrix x(2, 2, std::vector<std::int64_t>{1, 2, 3, 4});
  IntMatrix w(2, 2, std::vector<std::int64_t>{5, 6, 7, 8});
  IntMatrix expect(2, 2, std::vector<std::int64_t>{19, 22, 43, 50});
  EXPECT_EQ(apply_strassen(strassen_partition(x, w)).product, expect);
}

TEST(StrassenPartition, RandomMatchesDirectProduct) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 2 * (1 + rng() % 6), k = 2 * (1 + rng() % 6),
                      m = 2 * (1 + rng() % 6);
    auto x = random_matrix(rng, n, k, 0, 65535);
    auto w = random_matrix(rng, k, m, 0, 65535);
    IntMatrix direct(n, m);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < m; ++b)
        for (std::size_t c = 0; c < k; ++c) direct(a, b) += x(a, c) * w(c, b);
    auto plan = strassen_partition(x, w);
    ASSERT_EQ(apply_strassen(plan).product, direct);
    ASSERT_EQ(apply_strassen(plan).multiplications, 7u);
  }
}

TEST(StrassenPartition, Errors) {
  EXPECT_THROW(strassen_partition(IntMatrix(3, 2), IntMatrix(2, 2)),
               DimensionError);
  EXPECT_THROW(strassen_partition(IntMatrix(2, 2), IntMatrix(4, 2)),
               DimensionError);
  EXPECT_THROW(strassen_partition(IntMatrix(0, 2), IntMatrix(2, 2)),
               DimensionError);
}

TEST(StrassenTileMap, Examples) {
  auto a = strassen_tile_map(8);
  ASSERT_EQ(a.plans.size(), 1u);
  EXPECT_EQ(a.plans[0], (std::array<unsigned, 7>{0, 1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(a.free_imas, std::vector<unsigned>{7});

  auto b = strassen_tile_map(16);
  EXPECT_EQ(b.plans.size(), 2u);
  EXPECT_EQ(b.free_imas.size(), 2u);

  EXPECT_THROW(strassen_tile_map(7), CapacityError);
}

TEST(StrassenOperandBits, SumsGrowOneBit) {
  EXPECT_EQ(strassen_operand_bits(kStrassenXCoeffs[0]), 17u);
  EXPECT_EQ(strassen_operand_bits(kStrassenXCoeffs[2]), 16u);
  EXPECT_EQ(strassen_operand_bits(kStrassenWCoeffs[1]), 16u);
}
