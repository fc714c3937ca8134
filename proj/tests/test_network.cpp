#include <gtest/gtest.h>

#include <string>

#include "newton/network.hpp"

using namespace newton;

namespace {

std::string data_path(const std::string& name) {
  return std::string(NEWTON_DATA_DIR) + "/networks/" + name + ".net";
}

const char* kSuite[] = {"alexnet", "vgg-a", "vgg-b", "vgg-c", "vgg-d",
                        "msra-a", "msra-b", "msra-c", "resnet-34"};

unsigned count(const std::vector<LayerDesc>& layers, LayerKind k) {
  unsigned n = 0;
  for (const auto& l : layers) n += l.kind == k;
  return n;
}

}  // namespace

TEST(LoadNetwork, Alexnet) {
  const auto layers = expand_layers(load_network(data_path("alexnet")));
  EXPECT_EQ(count(layers, LayerKind::conv), 5u);
  EXPECT_EQ(count(layers, LayerKind::fc), 3u);
  const auto& c1 = layers.front();
  EXPECT_EQ(c1.kx, 11u);
  EXPECT_EQ(c1.ky, 11u);
  EXPECT_EQ(c1.no, 96u);
  EXPECT_EQ(c1.stride, 4u);
  EXPECT_EQ(c1.ni, 3u);
  EXPECT_EQ(c1.output_w(), 56u);
}

TEST(LoadNetwork, Resnet34Shape) {
  const auto layers = expand_layers(load_network(data_path("resnet-34")));
  EXPECT_EQ(count(layers, LayerKind::conv), 33u);
  EXPECT_EQ(count(layers, LayerKind::fc), 1u);
  EXPECT_EQ(layers.front().kx, 7u);
  EXPECT_EQ(layers.front().no, 64u);
  EXPECT_EQ(layers.front().stride, 2u);
  unsigned skips = 0;
  for (const auto& l : layers) skips += l.skip_input;
  EXPECT_EQ(skips, 16u);
}

TEST(LoadNetwork, ConvCountsMatchTableColumns) {
  // (t) sums per column, 1x1 rows included.
  const std::pair<const char*, unsigned> expect[] = {
      {"vgg-a", 8},  {"vgg-b", 13}, {"vgg-c", 13}, {"vgg-d", 16},
      {"msra-a", 16}, {"msra-b", 19}, {"msra-c", 19}};
  for (const auto& [name, n] : expect) {
    const auto layers = expand_layers(load_network(data_path(name)));
    EXPECT_EQ(count(layers, LayerKind::conv), n) << name;
    EXPECT_EQ(count(layers, LayerKind::fc), 3u) << name;
  }
}

TEST(LoadNetwork, EverySuiteFileRoundTrips) {
  for (const char* name : kSuite) {
    const auto net = load_network(data_path(name));
    EXPECT_EQ(net.name, name);
    const auto again = parse_network(serialize_network(net));
    EXPECT_EQ(again, net) << name;
    EXPECT_EQ(serialize_network(again), serialize_network(net));
  }
}

TEST(ParseNetwork, EmptyInputIsAnError) {
  EXPECT_THROW(parse_network(""), ParseError);
  EXPECT_THROW(parse_network("# only a comment\n\n"), ParseError);
}

TEST(ParseNetwork, ReportsLineAndColumn) {
  try {
    parse_network("network t\ninput 8x8x1\nconv 3x3,x4\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 10u);
  }
  try {
    parse_network("network t\ninput 8x8x1\n  frob 3\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 3u);
  }
  EXPECT_THROW(parse_network("network t\ninput 8x8x1\nconv 3x3,4 (0)\n"),
               ParseError);
  EXPECT_THROW(parse_network("network t\ninput 8x8x1\nconv 3x3,4 skip=2\n"),
               ParseError);
}

TEST(ParseNetwork, StrideRepeatAndSpp) {
  const auto net = parse_network(
      "network t\ninput 16x16x2\nconv 3x3,8/2 (3) @16\nspp 2,1\nfc 10\n");
  ASSERT_EQ(net.blocks.size(), 3u);
  EXPECT_EQ(net.blocks[0].stride, 2u);
  EXPECT_EQ(net.blocks[0].repeat, 3u);
  const auto layers = expand_layers(net);
  ASSERT_EQ(layers.size(), 5u);
  EXPECT_EQ(layers[0].output_w(), 8u);
  EXPECT_EQ(layers[2].output_w(), 2u);
  EXPECT_EQ(layers[3].no, 5u * 8u);
  EXPECT_EQ(layers[4].ni, 40u);
}

TEST(ChainValidation, MismatchNamesLayerPair) {
  const auto net = parse_network(
      "network t\ninput 8x8x1\nconv 3x3,4\nconv 3x3,4 in=5\n");
  try {
    validate_network(net);
    FAIL() << "expected ChainError";
  } catch (const ChainError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("conv1 -> conv2"), std::string::npos) << msg;
  }
  EXPECT_THROW(validate_network(parse_network(
                   "network t\ninput 8x8x1\npool 2x2/2\nconv 3x3,4 @8\n")),
               ChainError);
  EXPECT_THROW(validate_network(parse_network(
                   "network t\ninput 8x8x1\nfc 4\nconv 3x3,4\n")),
               ChainError);
}

TEST(ChainValidation, WithInputSizeRescales) {
  const auto net = load_network(data_path("vgg-a"));
  const auto big = with_input_size(net, 256);
  const auto layers = expand_layers(big);
  EXPECT_EQ(layers.front().input_w, 256u);
  EXPECT_EQ(big.blocks[0].assert_size, 256u);
  EXPECT_EQ(layers[layers.size() - 3].ni, 8u * 8u * 512u);
}

TEST(LayerDesc, Counts) {
  const auto layers = expand_layers(load_network(data_path("vgg-a")));
  const auto& c1 = layers.front();
  EXPECT_EQ(c1.steps(), 224u * 224u);
  EXPECT_EQ(c1.weight_rows(), 27u);
  EXPECT_EQ(c1.macs(), 224ull * 224 * 27 * 64);
}
