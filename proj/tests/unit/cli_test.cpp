#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "endolab/config.hpp"
#include "endolab/io.hpp"
#include "endolab/presets.hpp"
#include "endolab/locate.hpp"
#include "endolab/runners.hpp"

using namespace endolab;
using namespace endolab::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("endolab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string preset_file(const std::string& name) {
    return std::string(ENDOLAB_PRESET_DIR) + "/" + name + ".json";
  }
  int go(const std::string& kind, const std::string& config, std::optional<std::uint64_t> seed = {}) {
    log_.str("");
    err_.str("");
    return run(kind, config, seed, (dir_ / "out").string(), log_, err_);
  }
  json read(const std::string& file) {
    std::ifstream in(dir_ / "out" / file);
    return json::parse(in);
  }

  fs::path dir_;
  std::ostringstream log_, err_;
};

}  // namespace

TEST(Locate, PointerLines) {
  const std::string text = "{\n  \"a\": 1,\n  \"b\": [\n    {\"c\": 2},\n    3\n  ]\n}\n";
  const auto lines = value_lines(text);
  EXPECT_EQ(line_of(lines, "/a"), 2);
  EXPECT_EQ(line_of(lines, "/b"), 3);
  EXPECT_EQ(line_of(lines, "/b/0/c"), 4);
  EXPECT_EQ(line_of(lines, "/b/1"), 5);
  EXPECT_EQ(line_of(lines, "/b/1/zzz"), 5);
}

TEST(Config, DefaultsAndStrictness) {
  const auto c = parse_config(json{{"version", 1}, {"preset", "linear-t2-n2"}});
  EXPECT_EQ(c.seed, 1u);
  EXPECT_EQ(c.splitting.forward_depth, 40);
  EXPECT_EQ(c.cones.grid, 32);
  EXPECT_THROW(parse_config(json{{"preset", "linear-t2-n2"}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"version", 2}, {"preset", "linear-t2-n2"}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"version", 1}, {"preset", "nope"}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"version", 1}}), ConfigError);
  EXPECT_THROW(
      parse_config(json{{"version", 1}, {"preset", "linear-t2-n2"}, {"angels", json::object()}}),
      ConfigError);
  EXPECT_THROW(parse_config(json{{"version", 1},
                                 {"preset", "linear-t2-n2"},
                                 {"verify-cones", {{"beta", 1.5}}}}),
               ConfigError);
}

TEST(Config, HashTracksSeedAndContent) {
  auto a = parse_config(json{{"version", 1}, {"preset", "linear-t2-n2"}});
  auto b = a;
  apply_seed(b, 2);
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a), config_hash(parse_config(json{{"version", 1}, {"preset", "linear-t2-n2"}})));
}

TEST_F(Cli, MalformedMatrixIsConfigError) {
  const auto p = write("bad.json", "{\n  \"version\": 1,\n  \"map\": {\n    \"matrix\": [[2, 1], [1]]\n  }\n}\n");
  EXPECT_EQ(go("splitting", p), kExitConfig);
  EXPECT_NE(err_.str().find(":4: /map/matrix/1"), std::string::npos) << err_.str();
}

TEST_F(Cli, BadJsonAndUnknownKeyAndMissingFile) {
  EXPECT_EQ(go("splitting", write("trunc.json", "{\"version\": 1,\n")), kExitConfig);
  EXPECT_EQ(go("constants", write("unk.json", "{\"version\": 1, \"preset\": \"linear-t2-n2\",\n"
                                              " \"constants\": {\"depht\": 3}}")),
            kExitConfig);
  EXPECT_NE(err_.str().find(":2: /constants/depht"), std::string::npos) << err_.str();
  EXPECT_EQ(go("splitting", (dir_ / "missing.json").string()), kExitConfig);
  EXPECT_EQ(go("splitting", write("kind.json", R"({"version": 1, "kind": "angles", "preset": "linear-t2-n2"})")),
            kExitConfig);
}

TEST_F(Cli, SplittingBlockMapReportsE3Center) {
  ASSERT_EQ(go("splitting", preset_file("t3-block-n2")), kExitOk) << err_.str();
  const auto j = read("splitting.json");
  const auto& c = j["estimate"]["frames"]["c"]["basis"][0];
  EXPECT_NEAR(std::abs(c[2].get<double>()), 1.0, 1e-10);
  EXPECT_EQ(j["meta"]["version"], ENDOLAB_VERSION);
  EXPECT_EQ(j["meta"]["config_hash"].get<std::string>().size(), 16u);
  std::ifstream csv(dir_ / "out" / "splitting_residuals.csv");
  std::string first;
  std::getline(csv, first);
  EXPECT_NE(first.find(j["meta"]["config_hash"].get<std::string>()), std::string::npos);
}

TEST_F(Cli, SplittingCatMapTwoFrames) {
  const auto p = write("cat.json", R"({"version": 1, "map": {"matrix": [[2, 1], [1, 1]], "dims": [1, 0, 1]}})");
  ASSERT_EQ(go("splitting", p), kExitOk) << err_.str();
  const auto e = read("splitting.json")["estimate"];
  EXPECT_EQ(e["frames"]["s"]["dim"], 1);
  EXPECT_EQ(e["frames"]["u"]["dim"], 1);
  EXPECT_EQ(e["frames"]["c"]["dim"], 0);
  for (const char* r : {"s", "u", "cs", "cu"}) {
    EXPECT_LT(e["residuals"][r].get<double>(), 1e-10) << r;
  }
}

TEST_F(Cli, SplittingGateFailsAboveTolerance) {
  const auto p = write("tight.json", R"({"version": 1, "preset": "theorem-d-t3",
    "splitting": {"forward_depth": 20, "backward_depth": 20, "tolerance": 1e-12}})");
  EXPECT_EQ(go("splitting", p), kExitGate);
}

TEST_F(Cli, MultiplicityLinearAndTheoremD) {
  const auto p = write("lin.json", R"({"version": 1, "preset": "t3-anosov-deg3",
    "multiplicity": {"budget": 16, "depth": 30}})");
  ASSERT_EQ(go("multiplicity", p), kExitOk) << err_.str();
  for (const auto& row : read("multiplicity.json")["rows"]) EXPECT_EQ(row["cluster_count"], 1);

  ASSERT_EQ(go("multiplicity", preset_file("theorem-d-t3")), kExitOk) << err_.str();
  const auto j = read("multiplicity.json");
  std::vector<int> iterate;
  for (const auto& row : j["rows"]) {
    if (row["depth"].get<int>() >= 10 && row["rows"] != "iterate") {
      EXPECT_GE(row["cluster_count"].get<int>(), 2);
    }
    if (row["rows"] == "iterate") iterate.push_back(row["cluster_count"]);
  }
  EXPECT_EQ(iterate.size(), 4u);
  EXPECT_TRUE(std::is_sorted(iterate.begin(), iterate.end()));
  EXPECT_TRUE(j["non_decreasing"].get<bool>());
}

TEST_F(Cli, MultiplicityBudgetBelowDegree) {
  const auto p = write("b.json", R"({"version": 1, "preset": "theorem-d-t3", "multiplicity": {"budget": 2}})");
  EXPECT_EQ(go("multiplicity", p), kExitConfig);
}

TEST_F(Cli, AnglesDiagonalTheoremDAndDegenerate) {
  ASSERT_EQ(go("angles", preset_file("diag-t3-cocycle")), kExitOk) << err_.str();
  EXPECT_NEAR(read("angles.json")["slope"].get<double>(), -std::log(2.0), 1e-6);

  ASSERT_EQ(go("angles", preset_file("theorem-d-t3")), kExitOk) << err_.str();
  const auto j = read("angles.json");
  EXPECT_LE(j["relative_error"].get<double>(), 0.25);

  const auto same = write("same.json", R"({"version": 1, "preset": "theorem-d-t3",
    "angles": {"e1": {"bundle": "c", "code": "00000000000000000000"}, "e2": {"bundle": "c", "code": "00000000000000000000"}}})");
  EXPECT_EQ(go("angles", same), kExitGate);
  EXPECT_TRUE(read("angles.json")["slope"].is_null());
}

TEST_F(Cli, PerturbZeroAngleKeepsSpec) {
  const std::string map = R"({"matrix": [[0, 0, -3], [1, 0, -1], [0, 1, 4]]})";
  const auto p = write("p.json", R"({"version": 1, "map": )" + map + R"(, "perturb": {"theta": 0}})");
  ASSERT_EQ(go("perturb", p), kExitOk) << err_.str();
  EXPECT_EQ(read("map.json")["map"], json::parse(map));
  EXPECT_TRUE(read("design.json")["report"]["degenerate"].get<bool>());
}

TEST_F(Cli, PerturbReproducesPresetAndFailsLarge) {
  const auto p = write("p.json", R"({"version": 1, "preset": "t3-anosov-deg3", "seed": 20240611,
    "perturb": {"certify": false}})");
  ASSERT_EQ(go("perturb", p), kExitOk) << err_.str();
  EXPECT_EQ(read("map.json")["map"], to_json(preset_map("theorem-d-t3")));
  // the emitted file is itself a runnable config
  EXPECT_NO_THROW(load_config((dir_ / "out" / "map.json").string()));

  const auto big = write("big.json", R"({"version": 1, "preset": "t3-anosov-deg3", "seed": 20240611,
    "perturb": {"theta": 1.2}})");
  EXPECT_EQ(go("perturb", big), kExitGate);
  EXPECT_FALSE(read("design.json")["report"]["cone_certificate"]["pass"].get<bool>());

  EXPECT_EQ(go("perturb", preset_file("theorem-d-t3")), kExitConfig);  // already perturbed
}

TEST_F(Cli, VerifyConesTheoremD) {
  ASSERT_EQ(go("verify-cones", preset_file("theorem-d-t3")), kExitOk) << err_.str();
  EXPECT_TRUE(read("certificate.json")["certificate"]["pass"].get<bool>());
}

TEST_F(Cli, ConstantsDiagonal) {
  ASSERT_EQ(go("constants", preset_file("diag-t3-cocycle")), kExitOk) << err_.str();
  const auto k = read("constants.json")["fit"]["constants"];
  EXPECT_NEAR(k["nu"].get<double>(), 0.5, 1e-12);
  EXPECT_NEAR(k["gamma1"].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(k["gamma2"].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(k["mu"].get<double>(), 2.0, 1e-12);
  EXPECT_NEAR(k["C"].get<double>(), 1.0, 1e-5);
}

TEST_F(Cli, OrbitMetricCsv) {
  ASSERT_EQ(go("orbit-metric", preset_file("linear-t2-deg2")), kExitOk) << err_.str();
  std::ifstream csv(dir_ / "out" / "orbit_metric.csv");
  std::string line;
  int rows = -2;  // comment and header
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 8 * 7 / 2);
}

TEST_F(Cli, SeedReproducibility) {
  const auto p = preset_file("linear-t2-deg2");
  ASSERT_EQ(go("orbit-metric", p, 9), kExitOk);
  std::ifstream a(dir_ / "out" / "orbit_metric.csv");
  const std::string first((std::istreambuf_iterator<char>(a)), {});
  ASSERT_EQ(go("orbit-metric", p, 9), kExitOk);
  std::ifstream b(dir_ / "out" / "orbit_metric.csv");
  const std::string second((std::istreambuf_iterator<char>(b)), {});
  EXPECT_EQ(first, second);
  ASSERT_EQ(go("orbit-metric", p, 10), kExitOk);
  std::ifstream c(dir_ / "out" / "orbit_metric.csv");
  const std::string third((std::istreambuf_iterator<char>(c)), {});
  EXPECT_NE(first, third);
}

TEST(Presets, ShippedFilesMatchLibrary) {
  for (const auto& name : preset_names()) {
    std::ifstream in(std::string(ENDOLAB_PRESET_DIR) + "/" + name + ".json");
    ASSERT_TRUE(in) << name;
    EXPECT_EQ(json::parse(in), preset_config(name)) << name;
  }
}
