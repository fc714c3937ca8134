#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "newton/evaluator.hpp"

using namespace newton;

namespace {

NetworkDesc suite_net(const std::string& name) {
  return load_network(std::string(NEWTON_DATA_DIR) + "/networks/" + name + ".net");
}

NetworkDesc one_layer(unsigned w) {
  return parse_network("network one\ninput " + std::to_string(w) + "x" + std::to_string(w) +
                       "x128\nconv 1x1,256\n");
}

}  // namespace

TEST(Simulate, SingleImaLatencyClosedForm) {
  const auto r = simulate(one_layer(4), DesignPoint::isaac());
  EXPECT_EQ(r.conv_imas, 1u);
  EXPECT_EQ(r.binding, "compute");
  // 16 windows of 16 input bits at 100 ns each.
  EXPECT_NEAR(r.latency_s, 16 * 16 * 100e-9, 1e-15);
  EXPECT_NEAR(r.throughput, 1 / (16 * 16 * 100e-9), 1e-6);
  EXPECT_DOUBLE_EQ(r.ops_per_image, 2.0 * 16 * 128 * 256);
}

TEST(Simulate, KaratsubaStretchesWindow) {
  auto p = DesignPoint::isaac();
  const auto a = simulate(one_layer(4), p);
  p.ima.karatsuba_level = 1;
  const auto b = simulate(one_layer(4), p);
  EXPECT_NEAR(b.latency_s / a.latency_s, 17.0 / 16.0, 1e-12);
}

TEST(Simulate, Deterministic) {
  const auto net = suite_net("alexnet");
  const auto a = simulate(net, DesignPoint::newton());
  const auto b = simulate(net, DesignPoint::newton());
  EXPECT_EQ(a.throughput, b.throughput);
  EXPECT_EQ(a.energy_per_image_j, b.energy_per_image_j);
  EXPECT_EQ(a.area_mm2, b.area_mm2);
  EXPECT_EQ(a.peak_power_w, b.peak_power_w);
}

TEST(Simulate, AveragePowerBelowPeak) {
  for (double slow : {8.0, 128.0}) {
    auto p = DesignPoint::newton();
    p.fc_slowdown = slow;
    for (const char* n : {"alexnet", "vgg-a", "resnet-34"}) {
      const auto r = simulate(suite_net(n), p);
      EXPECT_LE(r.average_power_w, r.peak_power_w * (1 + 1e-9)) << n << " " << slow;
      EXPECT_GT(r.average_power_w, 0) << n;
    }
  }
}

TEST(Simulate, BreakdownsSumToTotals) {
  const auto r = simulate(suite_net("vgg-a"), DesignPoint::newton());
  EXPECT_NEAR(r.area.total(), r.area_mm2, 1e-9 * r.area_mm2);
  EXPECT_NEAR(r.power_mw.total() / 1e3, r.peak_power_w, 1e-9 * r.peak_power_w);
  EXPECT_NEAR(r.energy_pj.total() * 1e-12, r.energy_per_image_j, 1e-9 * r.energy_per_image_j);
}

TEST(Simulate, GuardBitsBelowExactFailTheGate) {
  auto p = DesignPoint::newton();
  p.ima.karatsuba_level = 0;
  p.guard_bits = 8;
  EXPECT_THROW(simulate(one_layer(4), p), VerificationError);
  p.verify_numerics = false;
  EXPECT_NO_THROW(simulate(one_layer(4), p));
}

TEST(Compare, IdenticalPointsGiveZeroDeltas) {
  const std::vector<NetworkDesc> nets = {suite_net("alexnet"), suite_net("vgg-a")};
  const auto c = compare(nets, DesignPoint::newton(), DesignPoint::newton());
  EXPECT_NEAR(c.power_delta(), 0, 1e-12);
  EXPECT_NEAR(c.ee_delta(), 0, 1e-12);
  EXPECT_NEAR(c.ce_delta(), 0, 1e-12);
  EXPECT_NEAR(c.pe_delta(), 0, 1e-12);
  EXPECT_NEAR(c.area_delta(), 0, 1e-12);
}

TEST(Compare, RatiosFollowDefinitions) {
  const auto net = suite_net("alexnet");
  const auto b = simulate(net, DesignPoint::isaac());
  const auto c = simulate(net, DesignPoint::newton());
  const auto row = compare_reports(b, c);
  EXPECT_NEAR(row.power_ratio,
              (c.peak_power_w / c.throughput) / (b.peak_power_w / b.throughput), 1e-12);
  EXPECT_NEAR(row.ee_ratio, b.energy_per_image_j / c.energy_per_image_j, 1e-12);
  EXPECT_NEAR(row.ce_ratio, (c.throughput / c.area_mm2) / (b.throughput / b.area_mm2), 1e-12);
}

TEST(Attribution, EndsAtTarget) {
  const std::vector<NetworkDesc> nets = {suite_net("alexnet")};
  const auto steps = attribute(nets, DesignPoint::isaac(), DesignPoint::newton());
  ASSERT_EQ(steps.size(), attribution_order().size());
  const auto direct = compare(nets, DesignPoint::isaac(), DesignPoint::newton());
  double ee = 1;
  for (const auto& s : steps) ee *= 1 + s.vs_previous.ee_delta();
  EXPECT_NEAR(ee, 1 + direct.ee_delta(), 1e-9);
}

TEST(Sweep, SingletonMatchesSimulate) {
  const std::vector<NetworkDesc> nets = {suite_net("alexnet")};
  const auto rows = sweep(nets, DesignPoint::newton(), {{"fc_slowdown", {"128"}}});
  ASSERT_EQ(rows.size(), 1u);
  ASSERT_TRUE(rows[0].valid);
  const auto r = simulate(nets[0], DesignPoint::newton());
  EXPECT_DOUBLE_EQ(rows[0].reports[0].throughput, r.throughput);
  EXPECT_DOUBLE_EQ(rows[0].reports[0].energy_per_image_j, r.energy_per_image_j);
  EXPECT_TRUE(rows[0].pareto);
}

TEST(Sweep, GridOrderInvalidRowsAndRanking) {
  const std::vector<NetworkDesc> nets = {suite_net("alexnet")};
  const auto rows = sweep(nets, DesignPoint::newton(),
                          {{"fc_adc_share", {"1", "0", "4"}}, {"fc_slowdown", {"8", "128"}}});
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[1].settings[0].second, "1");
  EXPECT_EQ(rows[1].settings[1].second, "128");
  EXPECT_FALSE(rows[2].valid);
  EXPECT_FALSE(rows[3].valid);
  EXPECT_FALSE(rows[2].error.empty());
  unsigned front = 0;
  for (const auto& a : rows) {
    if (!a.valid) continue;
    EXPECT_GE(a.rank, 1u);
    if (a.pareto) ++front;
    for (const auto& b : rows) {
      if (!b.valid || !a.pareto) continue;
      const bool dom = b.summary.ce_gops_mm2 >= a.summary.ce_gops_mm2 &&
                       b.summary.pe_gops_w >= a.summary.pe_gops_w &&
                       (b.summary.ce_gops_mm2 > a.summary.ce_gops_mm2 ||
                        b.summary.pe_gops_w > a.summary.pe_gops_w);
      EXPECT_FALSE(dom);
    }
  }
  EXPECT_GE(front, 1u);
}

TEST(Sweep, UnknownSettingIsAnError) {
  DesignPoint p;
  EXPECT_THROW(apply_setting(p, "warp_drive", "1"), ConfigError);
  EXPECT_THROW(apply_setting(p, "guard_bits", "nine"), ConfigError);
  EXPECT_THROW(apply_setting(p, "strassen", "maybe"), ConfigError);
  apply_setting(p, "guard_bits", "10");
  EXPECT_EQ(p.guard_bits, 10u);
}

TEST(Saturate, FindsKnee) {
  const auto net = suite_net("alexnet");
  const auto s = saturate(net, DesignPoint::isaac());
  const auto base = simulate(net, DesignPoint::isaac());
  EXPECT_GE(s.scale, 1.0);
  EXPECT_GE(s.report.throughput, base.throughput * (1 - 1e-12));
  auto p = DesignPoint::isaac();
  p.replication_scale = s.scale * 2;
  const auto more = simulate(net, p);
  EXPECT_LE(more.throughput, s.report.throughput * 1.02 + 1e-9);
}
