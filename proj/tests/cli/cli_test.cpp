#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

using nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result cli(const std::string& args) {
  const std::string cmd = std::string(PERMLAB_CLI) + " " + args + " 2>/dev/null";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  while (std::size_t got = fread(buf.data(), 1, buf.size(), p)) r.out.append(buf.data(), got);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string temp_path(const std::string& name) { return (std::filesystem::temp_directory_path() / name).string(); }

json read_json(const std::string& path) {
  std::ifstream f(path);
  return json::parse(f);
}

void drop_runtimes(json& j) {
  for (auto& c : j["cases"]) c.erase("runtime_ms");
}

}  // namespace

TEST(Cli, FactorizeFixtures) {
  const Result a = cli("factorize \"2 3 1\"");
  EXPECT_EQ(a.code, 0);
  EXPECT_NE(a.out.find("t: 1 1 1"), std::string::npos);
  EXPECT_NE(a.out.find("distance: 2"), std::string::npos);
  const Result b = cli("factorize \"1 2 3\"");
  EXPECT_NE(b.out.find("t: 1 2 3"), std::string::npos);
  EXPECT_NE(b.out.find("distance: 0"), std::string::npos);
  EXPECT_EQ(cli("factorize \"2 1 1\"").code, 2);
  EXPECT_EQ(cli("factorize").code, 2);
}

TEST(Cli, UsageAndBudgetExitCodes) {
  EXPECT_EQ(cli("verify --suite nope").code, 2);
  EXPECT_EQ(cli("verify --suite twirl --n 8").code, 3);
  EXPECT_EQ(cli("verify --suite fundamental --n 8").code, 2);  // sampled path without --seed
  EXPECT_EQ(cli("attack --kind sponge --n 4 --c 2 --backend spo").code, 3);
  EXPECT_EQ(cli("attack --kind sponge --n 8 --c 4").code, 2);  // sampled attack without --seed
  EXPECT_EQ(cli("bound --kind main --q 1").code, 2);
  EXPECT_EQ(cli("").code, 2);
}

TEST(Cli, VerifyGammaWritesReport) {
  const std::string path = temp_path("permlab_gamma.json");
  ASSERT_EQ(cli("verify --suite gamma --n 4 --out " + path).code, 0);
  const json j = read_json(path);
  bool closed_vs_brute = false;
  for (const auto& c : j["cases"]) {
    EXPECT_TRUE(c["pass"].get<bool>()) << c["name"];
    if (c["name"].get<std::string>().rfind("gamma-closed-vs-brute", 0) == 0) closed_vs_brute = true;
  }
  EXPECT_TRUE(closed_vs_brute);
  EXPECT_EQ(j["suite"], "gamma");
}

TEST(Cli, VerifyAllAtTwoIsQuickAndDeterministic) {
  const std::string a = temp_path("permlab_all_a.json"), b = temp_path("permlab_all_b.json");
  const auto start = std::chrono::steady_clock::now();
  ASSERT_EQ(cli("verify --suite all --n 2 --out " + a).code, 0);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(seconds, 5.0);
  ASSERT_EQ(cli("verify --suite all --n 2 --out " + b).code, 0);
  json ja = read_json(a), jb = read_json(b);
  drop_runtimes(ja);
  drop_runtimes(jb);
  EXPECT_EQ(ja, jb);
  const Result csv = cli("verify --suite factorization --n 3 --format csv");
  EXPECT_EQ(csv.code, 0);
  EXPECT_EQ(csv.out.rfind("name,", 0), 0u);
}

TEST(Cli, BoundMatchesFixture) {
  const Result r = cli("bound --kind zero-search --q 1 --n 40 --c 40");
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(r.out);
  EXPECT_NEAR(j["bound"]["raw"].get<double>(), 1828.0 * 41.0 / std::exp2(40.0), 1e-20);
  EXPECT_FALSE(j["bound"]["vacuous"].get<bool>());
  const json m = json::parse(cli("bound --kind main --q 1 --n 16").out);
  EXPECT_TRUE(m["bound"]["vacuous"].get<bool>());
  EXPECT_EQ(m["bound"]["clamped"].get<double>(), 1.0);
}

TEST(Cli, AttackBackendsAgree) {
  const json spo = json::parse(cli("attack --kind sponge --n 3 --c 1 --backend spo").out);
  const json concrete = json::parse(cli("attack --kind sponge --n 3 --c 1 --trials 0").out);
  EXPECT_NEAR(spo["success"].get<double>(), concrete["success"].get<double>(), 1e-9);
  const Result sampled = cli("attack --kind zero-search --n 6 --c 3 --iterations 1 --trials 20 --seed 4");
  ASSERT_EQ(sampled.code, 0);
  EXPECT_EQ(sampled.out, cli("attack --kind zero-search --n 6 --c 3 --iterations 1 --trials 20 --seed 4").out);
}

TEST(Cli, RunCircuitFileOnBothBackends) {
  const std::string file = std::string(PERMLAB_TEST_DIR) + "/data/probe_pair.circ";
  const Result spo = cli("run --circuit " + file + " --backend spo");
  const Result avg = cli("run --circuit " + file);
  ASSERT_EQ(spo.code, 0);
  ASSERT_EQ(avg.code, 0);
  const auto ds = json::parse(spo.out)["distribution"].get<std::vector<double>>();
  const auto da = json::parse(avg.out)["distribution"].get<std::vector<double>>();
  ASSERT_EQ(ds.size(), 16u);
  ASSERT_EQ(da.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_NEAR(ds[i], da[i], 1e-12);
  const Result fixed = cli("run --circuit " + file + " --perm \"2 3 4 1\"");
  EXPECT_EQ(fixed.code, 0);
  EXPECT_EQ(cli("run --circuit /nonexistent.circ").code, 2);
}
