#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "symwsi/symwsi.hpp"

namespace fs = std::filesystem;
using namespace symwsi;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(SYMWSI_CLI_PATH) + " " + args + " 2>/dev/null";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("symwsi_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Small synthetic dataset plus n-gram flags for it.
  std::string synth() {
    EXPECT_EQ(run("make-synthetic --per-sense 15 --corpus-sentences 600 --out-dir " + path("synth")).code, 0);
    return "--instances " + path("synth/instances.jsonl") + " --backend ngram --corpus " + path("synth/corpus.txt") +
           " --no-sp";
  }

  fs::path dir_;
};

double json_field(const std::string& line, const std::string& field) {
  return nlohmann::json::parse(line).at(field).get<double>();
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_F(CliTest, MakeSyntheticWritesDeterministicFiles) {
  ASSERT_EQ(run("make-synthetic --per-sense 5 --corpus-sentences 30 --seed 4 --out-dir " + path("a")).code, 0);
  ASSERT_EQ(run("make-synthetic --per-sense 5 --corpus-sentences 30 --seed 4 --out-dir " + path("b")).code, 0);
  for (const char* f : {"instances.jsonl", "corpus.txt", "gold.key"}) {
    EXPECT_FALSE(slurp(dir_ / "a" / f).empty()) << f;
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  auto ds = parse_instances(std::string_view(slurp(dir_ / "a" / "instances.jsonl")));
  EXPECT_EQ(ds.instances.size(), 10u);
  EXPECT_EQ(ds.gold.senses.size(), 10u);
}

TEST_F(CliTest, InduceIsByteReproducible) {
  const auto flags = synth();
  ASSERT_EQ(run("induce " + flags + " --seed 3 --clusters 2 --out " + path("k1")).code, 0);
  ASSERT_EQ(run("induce " + flags + " --seed 3 --clusters 2 --threads 1 --out " + path("k2")).code, 0);
  EXPECT_FALSE(slurp(path("k1")).empty());
  EXPECT_EQ(slurp(path("k1")), slurp(path("k2")));
  auto stdout_key = run("induce " + flags + " --seed 3 --clusters 2");
  EXPECT_EQ(stdout_key.out, slurp(path("k1")));
}

TEST_F(CliTest, InduceDebugDumps) {
  const auto flags = synth();
  ASSERT_EQ(run("induce " + flags + " --k 4 --out " + path("k") + " --dump-reps " + path("reps") +
                " --dump-clusters " + path("rows"))
                .code,
            0);
  const auto reps = slurp(path("reps"));
  EXPECT_EQ(std::count(reps.begin(), reps.end(), '\n'), 30 * 4);
  const auto rows = slurp(path("rows"));
  EXPECT_EQ(std::count(rows.begin(), rows.end(), '\n'), 30 * 4);
  EXPECT_TRUE(nlohmann::json::parse(first_line(rows)).contains("cluster"));
}

TEST_F(CliTest, InduceFailureWritesNothing) {
  const auto flags = synth();
  auto r = run("induce --instances " + path("synth/instances.jsonl") + " --distributions " + path("missing") +
               " --out " + path("k"));
  EXPECT_NE(r.code, 0);
  EXPECT_FALSE(fs::exists(path("k")));
  EXPECT_NE(run("induce --instances " + path("synth/instances.jsonl") + " --out " + path("k")).code, 0);
  EXPECT_NE(run("induce " + flags + " --clusters 0").code, 0);
  EXPECT_NE(run("no-such-command").code, 0);
}

TEST_F(CliTest, EvaluateIdentityAndSingleCluster) {
  synth();
  const auto gold = path("synth/gold.key");
  auto same = run("evaluate --json --key " + gold + " --gold " + gold);
  ASSERT_EQ(same.code, 0);
  const auto corpus = first_line(same.out);
  EXPECT_NEAR(json_field(corpus, "fnmi"), 100.0, 1e-9);
  EXPECT_NEAR(json_field(corpus, "fbc"), 100.0, 1e-9);
  EXPECT_NEAR(json_field(corpus, "avg"), 100.0, 1e-9);

  std::string one;
  std::istringstream in(slurp(gold));
  for (std::string line; std::getline(in, line);) one += line.substr(0, line.rfind(' ')) + " c0/1.0\n";
  write(path("one.key"), one);
  auto single = run("evaluate --json --key " + path("one.key") + " --gold " + gold);
  ASSERT_EQ(single.code, 0);
  EXPECT_NEAR(json_field(first_line(single.out), "fnmi"), 0.0, 1e-9);

  auto table = run("evaluate --per-pos --key " + gold + " --instances " + path("synth/instances.jsonl"));
  ASSERT_EQ(table.code, 0);
  EXPECT_NE(table.out.find("noun"), std::string::npos);
  EXPECT_NE(table.out.find("100.00"), std::string::npos);
}

TEST_F(CliTest, EvaluateSixInstanceFixtureMatchesOracle) {
  const std::vector<int> g{0, 0, 0, 1, 1, 2}, s{0, 0, 1, 1, 2, 2};
  std::string gold, sys;
  for (std::size_t i = 0; i < g.size(); ++i) {
    gold += "bass.n bass.n." + std::to_string(i) + " s" + std::to_string(g[i]) + "/1\n";
    sys += "bass.n bass.n." + std::to_string(i) + " c" + std::to_string(s[i]) + "/1\n";
  }
  write(path("gold.key"), gold);
  write(path("sys.key"), sys);
  auto r = run("evaluate --json --key " + path("sys.key") + " --gold " + path("gold.key"));
  ASSERT_EQ(r.code, 0);
  const auto line = first_line(r.out);
  EXPECT_NEAR(json_field(line, "fnmi"), 100.0 * oracle::overlapping_nmi(oracle::memberships(g), oracle::memberships(s)),
              1e-9);
  EXPECT_NEAR(json_field(line, "fbc"), oracle::bcubed_f1(g, s), 1e-9);
}

TEST_F(CliTest, EvaluateDisjointInstanceSets) {
  write(path("gold.key"), "bass.n a s1/1\nbass.n b s1/1\n");
  write(path("sys.key"), "bass.n x c1/1\n");
  EXPECT_NE(run("evaluate --key " + path("sys.key") + " --gold " + path("gold.key")).code, 0);
  EXPECT_NE(run("evaluate --intersection --key " + path("sys.key") + " --gold " + path("gold.key")).code, 0);
  write(path("partial.key"), "bass.n a c1/1\n");
  EXPECT_NE(run("evaluate --key " + path("partial.key") + " --gold " + path("gold.key")).code, 0);
  EXPECT_EQ(run("evaluate --intersection --key " + path("partial.key") + " --gold " + path("gold.key")).code, 0);
}

TEST_F(CliTest, AblateAndSweep) {
  const auto flags = synth();
  auto ab = run("ablate --json --runs 2 --clusters 2 " + flags);
  ASSERT_EQ(ab.code, 0);
  EXPECT_EQ(std::count(ab.out.begin(), ab.out.end(), '\n'), 6);
  EXPECT_EQ(nlohmann::json::parse(first_line(ab.out)).at("variant"), "full");

  auto sw = run("sweep-clusters --json --from 1 --to 4 --clusters 2 " + flags);
  ASSERT_EQ(sw.code, 0);
  std::istringstream in(sw.out);
  std::vector<double> avg;
  for (std::string line; std::getline(in, line);) avg.push_back(json_field(line, "avg_mean"));
  ASSERT_EQ(avg.size(), 4u);
  EXPECT_NEAR(avg[0], 0.0, 1e-9);
  EXPECT_EQ(std::max_element(avg.begin(), avg.end()) - avg.begin(), 1);
}

TEST_F(CliTest, ConfigFileWithFlagOverride) {
  const auto flags = synth();
  write(path("cfg.ini"), "seed=9\nclusters=3\n");
  ASSERT_EQ(run("induce " + flags + " --config " + path("cfg.ini") + " --out " + path("a")).code, 0);
  ASSERT_EQ(run("induce " + flags + " --seed 9 --clusters 3 --out " + path("b")).code, 0);
  EXPECT_EQ(slurp(path("a")), slurp(path("b")));
  ASSERT_EQ(run("induce " + flags + " --config " + path("cfg.ini") + " --clusters 2 --out " + path("c")).code, 0);
  ASSERT_EQ(run("induce " + flags + " --seed 9 --clusters 2 --out " + path("d")).code, 0);
  EXPECT_EQ(slurp(path("c")), slurp(path("d")));
  EXPECT_NE(slurp(path("a")), slurp(path("c")));
}

TEST_F(CliTest, ExportThenFileBackendRoundTrip) {
  synth();
  const auto inst = path("synth/instances.jsonl");
  ASSERT_EQ(run("export-queries --instances " + inst + " --out " + path("q.jsonl")).code, 0);
  std::ifstream qin(path("q.jsonl"));
  auto queries = read_queries(qin);
  ASSERT_EQ(queries.size(), 60u);
  // stand-in bridge: uniform over 60 words
  std::string answers;
  for (const auto& q : queries) {
    SubstituteDistribution d{q.instance_id, q.direction, {}};
    for (int i = 0; i < 60; ++i) d.entries.push_back({"w" + std::to_string(i), 1.0 / 60});
    answers += distribution_to_json_line(d, q.pattern_used) + "\n";
  }
  write(path("d.jsonl"), answers);
  auto r = run("induce --instances " + inst + " --distributions " + path("d.jsonl"));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(read_key_file(std::string_view(r.out)).entries.size(), 30u);

  auto both = run("export-queries --both-modes --instances " + inst);
  EXPECT_EQ(std::count(both.out.begin(), both.out.end(), '\n'), 120);
}
