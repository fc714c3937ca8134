#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Result run(const std::string& args) {
  static int n = 0;
  const auto dir = std::filesystem::temp_directory_path();
  const auto errf = (dir / ("newton_cli_err_" + std::to_string(::getpid()) + "_" +
                            std::to_string(n++))).string();
  const std::string cmd = std::string(NEWTON_CLI_PATH) + " " + args + " 2>" + errf;
  Result r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return {-1, "", "popen failed"};
  std::array<char, 4096> buf;
  while (std::size_t k = std::fread(buf.data(), 1, buf.size(), p)) r.out.append(buf.data(), k);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(errf);
  std::filesystem::remove(errf);
  return r;
}

const std::string kNet = std::string(NEWTON_DATA_DIR) + "/networks/alexnet.net";
const std::string kArch = std::string(NEWTON_DATA_DIR) + "/arch/";

nlohmann::json error_record(const Result& r) {
  return nlohmann::json::parse(r.err.substr(r.err.rfind('{', r.err.find("\"error\""))));
}

}  // namespace

TEST(Cli, VerifyPassesAndIsByteIdentical) {
  const auto a = run("verify --seed 42");
  const auto b = run("verify --seed 42");
  EXPECT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("pipeline.random128,10000,0,true"), std::string::npos);
  EXPECT_NE(a.err.find("0 failed"), std::string::npos);
  const auto c = run("verify --seed 7 --format json");
  EXPECT_EQ(nlohmann::json::parse(c.out)["seed"], 7);
}

TEST(Cli, SimulateCsvAndJson) {
  const auto csv = run("simulate --network " + kNet);
  ASSERT_EQ(csv.code, 0) << csv.err;
  EXPECT_EQ(csv.out.rfind("schema_version,network,point", 0), 0u);
  const auto js = run("simulate --format json --network " + kNet + " --arch " + kArch + "isaac.json");
  ASSERT_EQ(js.code, 0) << js.err;
  const auto j = nlohmann::json::parse(js.out);
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["rows"][0]["point"], "isaac");
}

TEST(Cli, SimulateWithoutNetworkIsUsageError) {
  const auto r = run("simulate");
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(error_record(r)["error"]["kind"], "usage");
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, UnknownFlagAndCommand) {
  EXPECT_EQ(run("simulate --warp " + kNet).code, 2);
  EXPECT_EQ(run("launch").code, 2);
  EXPECT_EQ(run("").code, 2);
}

TEST(Cli, MissingFilesAndBadInput) {
  auto r = run("simulate --network /nonexistent.net");
  EXPECT_EQ(r.code, 4);
  EXPECT_EQ(error_record(r)["error"]["kind"], "io");
  r = run("simulate --network " + kNet + " --arch /nonexistent.json");
  EXPECT_EQ(r.code, 4);
  r = run("simulate --network " + kNet + " --set warp=1");
  EXPECT_EQ(r.code, 5);
  EXPECT_EQ(error_record(r)["error"]["kind"], "config");
  r = run("simulate --network " + kNet + " --set fc_slowdown=8,16");
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, FailedGateIsNonzero) {
  const auto r = run("simulate --network " + kNet + " --set karatsuba_level=0 --set guard_bits=8");
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(error_record(r)["error"]["kind"], "verification");
}

TEST(Cli, MapAndOut) {
  const auto path = (std::filesystem::temp_directory_path() /
                     ("newton_map_" + std::to_string(::getpid()) + ".json")).string();
  const auto r = run("map --format json --network " + kNet + " --out " + path);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  const auto j = nlohmann::json::parse(slurp(path));
  std::filesystem::remove(path);
  EXPECT_EQ(j["kind"], "map");
  EXPECT_EQ(j["rows"].size(), 8u);
  EXPECT_EQ(j["rows"][0]["layer"].get<std::string>().empty(), false);
}

TEST(Cli, CompareAndSweep) {
  const auto c = run("compare --network " + kNet + " --baseline " + kArch + "isaac.json --arch " +
                     kArch + "newton.json");
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_NE(c.out.find(",mean,suite,"), std::string::npos);
  EXPECT_NE(c.out.find(",step,strassen,"), std::string::npos);
  const auto s = run("sweep --network " + kNet + " --set fc_slowdown=8,128 --set fc_adc_share=1,4");
  ASSERT_EQ(s.code, 0) << s.err;
  std::stringstream ss(s.out);
  std::string line;
  int n = 0;
  while (std::getline(ss, line)) ++n;
  EXPECT_EQ(n, 5);
  EXPECT_EQ(run("sweep --network " + kNet).code, 2);
}
