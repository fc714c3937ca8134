#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "newton/mapper.hpp"

using namespace newton;

namespace {

const char* kSuite[] = {"alexnet", "vgg-a", "vgg-b", "vgg-c", "vgg-d",
                        "msra-a", "msra-b", "msra-c", "resnet-34"};

NetworkDesc suite_net(const std::string& name) {
  return load_network(std::string(NEWTON_DATA_DIR) + "/networks/" + name + ".net");
}

LayerDesc conv(unsigned k, unsigned ni, unsigned no, unsigned w, unsigned stride = 1) {
  LayerDesc l;
  l.kind = LayerKind::conv;
  l.kx = l.ky = k;
  l.ni = ni;
  l.no = no;
  l.stride = stride;
  l.input_w = l.input_h = w;
  return l;
}

LayerDesc fc(unsigned ni, unsigned no) {
  LayerDesc l;
  l.kind = LayerKind::fc;
  l.kx = l.ky = 1;
  l.ni = ni;
  l.no = no;
  l.input_w = l.input_h = 1;
  return l;
}

std::uint64_t total_crossbars(const MappingPlan& p) {
  std::uint64_t n = 0;
  for (const auto& m : p.layers) n += m.crossbars;
  return n;
}

}  // namespace

TEST(CrossbarsForLayer, VggFirstLayer) {
  const auto f = crossbars_for_layer(conv(3, 3, 64, 224), ImaConfig{});
  EXPECT_EQ(f.imas, 1u);
  EXPECT_EQ(f.crossbars, 16u);
  EXPECT_NEAR(f.utilization, 27.0 * 64 * 8 / (16.0 * 128 * 128), 1e-12);
  EXPECT_NEAR(f.utilization, 0.053, 0.001);
}

TEST(CrossbarsForLayer, LargeClassifier) {
  const auto f = crossbars_for_layer(fc(4096, 4096), ImaConfig{});
  EXPECT_EQ(f.imas, 32u * 16u);
  EXPECT_DOUBLE_EQ(f.utilization, 1.0);
}

TEST(CrossbarsForLayer, DegenerateLayer) {
  const auto f = crossbars_for_layer(conv(1, 1, 1, 4), ImaConfig{});
  EXPECT_EQ(f.imas, 1u);
  EXPECT_DOUBLE_EQ(f.utilization, 8.0 / (16.0 * 128 * 128));
}

TEST(Replication, Examples) {
  const auto layers = expand_layers(suite_net("vgg-a"));
  const auto r = replication_factors(layers);
  EXPECT_EQ(r.front(), 256u);
  unsigned ones = 0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].kind == LayerKind::conv && layers[i].steps() == 14u * 14u) {
      EXPECT_EQ(r[i], 1u);
      ++ones;
    }
    if (layers[i].kind != LayerKind::conv) {
      EXPECT_EQ(r[i], 1u);
    }
  }
  EXPECT_GT(ones, 0u);
  const auto r2 = replication_factors({conv(3, 4, 4, 16), conv(3, 4, 4, 8)});
  EXPECT_EQ(r2[0], 4u);
  EXPECT_EQ(r2[1], 1u);
}

TEST(Buffer, Examples) {
  EXPECT_DOUBLE_EQ(buffer_requirement(conv(3, 3, 64, 224), MappingMode::naive), 2706.0);
  EXPECT_DOUBLE_EQ(buffer_requirement(conv(1, 5, 8, 32), MappingMode::naive), 5 * 2.0);
  EXPECT_DOUBLE_EQ(buffer_requirement(conv(3, 3, 64, 224), MappingMode::spread, 2), 1353.0);
  EXPECT_DOUBLE_EQ(buffer_requirement(fc(4096, 10), MappingMode::naive), 4096 * 4.0);
  auto skip = conv(3, 3, 64, 224);
  skip.skip_input = true;
  EXPECT_DOUBLE_EQ(buffer_requirement(skip, MappingMode::naive), 2 * 2706.0);
}

TEST(Plan, ReplicasPackIntoSharedImas) {
  MapOptions opt;
  opt.fc_tiles = false;
  const auto plan = plan_network(suite_net("vgg-a"), opt);
  const auto& c1 = plan.layers.front();
  // Four adjacent 3x3x3 windows read 3 x 6 x 3 = 54 inputs, 4 x 64 outputs.
  EXPECT_EQ(c1.pack, 4u);
  EXPECT_EQ(c1.imas, 256u / 4);
  for (const auto& m : plan.layers) {
    EXPECT_LE(m.row_fraction, 1.0) << m.name;
    EXPECT_LE(m.column_fraction, 1.0) << m.name;
    EXPECT_GE(m.imas, 1u) << m.name;
  }
}

TEST(Plan, SpreadNeverExceedsNaive) {
  for (const char* name : kSuite) {
    MapOptions s, n;
    n.mode = MappingMode::naive;
    const auto net = with_input_size(suite_net(name), 256);
    const auto ps = plan_network(net, s);
    const auto pn = plan_network(net, n);
    ASSERT_EQ(ps.layers.size(), pn.layers.size());
    for (std::size_t i = 0; i < ps.layers.size(); ++i) {
      EXPECT_LE(ps.layers[i].buffer_bytes_per_tile, pn.layers[i].buffer_bytes_per_tile) << name;
    }
    EXPECT_LE(ps.max_tile_buffer, 16 * 1024.0) << name;
    EXPECT_GE(pn.max_tile_buffer, 4 * ps.max_tile_buffer) << name;
    EXPECT_EQ(total_crossbars(ps), total_crossbars(pn)) << name;
    EXPECT_EQ(ps.total_tiles(), pn.total_tiles()) << name;
  }
}

TEST(Plan, TilesRespectKindAndCapacity) {
  MapOptions opt;
  const auto plan = plan_network(suite_net("alexnet"), opt);
  EXPECT_GT(plan.fc_tiles, 0u);
  for (const auto& m : plan.layers) {
    EXPECT_EQ(m.tile_kind == TileKind::fc, m.kind == LayerKind::fc) << m.name;
  }
  for (const auto& t : plan.tiles) EXPECT_LE(t.imas_used, 16u);
  opt.max_tiles = 10;
  try {
    plan_network(suite_net("alexnet"), opt);
    FAIL() << "expected CapacityError";
  } catch (const CapacityError& e) {
    EXPECT_NE(std::string(e.what()).find("deficit"), std::string::npos);
  }
}

TEST(Plan, SingleLayerNetwork) {
  const auto plan = plan_network(parse_network("network one\ninput 1x1x128\nconv 1x1,256\n"),
                                 MapOptions{});
  ASSERT_EQ(plan.layers.size(), 1u);
  EXPECT_EQ(plan.layers[0].imas, 1u);
  EXPECT_EQ(plan.total_tiles(), 1u);
  EXPECT_DOUBLE_EQ(underutilization(plan), 0.0);
}

TEST(Plan, StrassenFreesOneImaInEight) {
  MapOptions opt;
  opt.strassen = true;
  const auto with = plan_network(suite_net("vgg-a"), opt);
  opt.strassen = false;
  const auto without = plan_network(suite_net("vgg-a"), opt);
  unsigned eligible = 0;
  for (std::size_t i = 0; i < with.layers.size(); ++i) {
    const auto& a = with.layers[i];
    const auto& b = without.layers[i];
    if (!a.strassen) {
      EXPECT_EQ(a.imas, b.imas);
      continue;
    }
    ++eligible;
    EXPECT_EQ(a.strassen_freed_imas, b.imas / 8);
    EXPECT_EQ(a.imas + a.strassen_freed_imas, b.imas);
    EXPECT_EQ(a.window_iterations, b.window_iterations + 1);
  }
  EXPECT_GT(eligible, 0u);
}

TEST(Underutilization, LargerImaWastesMore) {
  std::vector<NetworkDesc> nets;
  for (const char* n : kSuite) nets.push_back(suite_net(n));
  ImaConfig big;
  big.inputs = 8192;
  big.outputs = 1024;
  const double small = suite_underutilization(nets, ImaConfig{});
  const double large = suite_underutilization(nets, big);
  EXPECT_GT(large, 2 * small);
  EXPECT_GT(small, 0.0);
}
