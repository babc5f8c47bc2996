#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "discret2di/error.hpp"
#include "discret2di/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int status = 0;
  std::string output;
};

// Runs the CLI with stdout and stderr captured.
RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(DISCRET2DI_CLI) + " " + args + " 2>&1";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  char buf[4096];
  while (fgets(buf, sizeof buf, pipe)) r.output += buf;
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("d2d_pipeline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

const char* kFastTraining = "--quiet --set catvae.max_epochs=4 --set catvae.patience=2";

}  // namespace

TEST(PipelineConfig, JsonRoundTripAndValidation) {
  d2d::PipelineConfig c;
  c.seed = 12;
  c.catvae.beta = 0.3;
  c.data_path = "x.csv";
  const auto back = d2d::pipeline_config_from_json(d2d::to_json(c));
  EXPECT_EQ(d2d::to_json(back).dump(), d2d::to_json(c).dump());

  auto doc = d2d::to_json(c);
  doc["unknown_key"] = 1;
  EXPECT_THROW(d2d::pipeline_config_from_json(doc), d2d::Error);
  doc = d2d::to_json(c);
  doc["min_support"] = 0.0;
  EXPECT_THROW(d2d::pipeline_config_from_json(doc), d2d::Error);
}

TEST(PipelineConfig, OverridesAndHash) {
  d2d::PipelineConfig c;
  auto doc = d2d::to_json(c);
  d2d::apply_override(doc, "catvae.beta=0.5");
  d2d::apply_override(doc, "seed=7");
  d2d::apply_override(doc, "paths.output_dir=out/run");
  const auto o = d2d::pipeline_config_from_json(doc);
  EXPECT_DOUBLE_EQ(o.catvae.beta, 0.5);
  EXPECT_EQ(o.seed, 7u);
  EXPECT_EQ(o.output_dir, "out/run");
  EXPECT_THROW(d2d::apply_override(doc, "no_equals_sign"), d2d::Error);

  // Paths do not enter the hash; parameters do.
  d2d::PipelineConfig moved = c;
  moved.output_dir = "/elsewhere";
  EXPECT_EQ(d2d::config_hash(moved), d2d::config_hash(c));
  d2d::PipelineConfig changed = c;
  changed.likelihood_threshold = -40;
  EXPECT_NE(d2d::config_hash(changed), d2d::config_hash(c));

  EXPECT_EQ(d2d::fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(d2d::fnv1a_hex("a"), "af63dc4c8601ec8c");
  EXPECT_NE(d2d::derive_seed(1, 0), d2d::derive_seed(1, 1));
  EXPECT_EQ(d2d::derive_seed(1, 2), d2d::derive_seed(1, 2));
}

TEST(PipelineHelpers, PurityAndAliases) {
  EXPECT_DOUBLE_EQ(d2d::purity({0, 0, 1, 1}, {5, 5, 6, 6}), 1.0);
  EXPECT_DOUBLE_EQ(d2d::purity({0, 0, 0, 0}, {5, 5, 6, 6}), 0.5);
  EXPECT_DOUBLE_EQ(d2d::purity({0, 0, 0, 1}, {5, 5, 6, 6}), 0.75);
  EXPECT_THROW(d2d::purity({0}, {1, 2}), d2d::Error);

  d2d::SymbolSequence seq;
  std::vector<std::string> labels;
  for (int i = 0; i < 20; ++i) {
    seq.push_back({static_cast<double>(i), {i < 15 ? 0 : 1}, {true}, 0.0});
    labels.push_back(i < 10 ? "Q1" : (i < 14 ? "V12" : (i < 15 ? "V3" : "V23")));
  }
  const auto aliases = d2d::state_aliases(seq, labels, 0.1);
  EXPECT_EQ(aliases.at(0), (std::vector<std::string>{"Q1", "V12"}));
  EXPECT_EQ(aliases.at(1), (std::vector<std::string>{"V23"}));
}

TEST(PipelineHelpers, TankModeLabels) {
  d2d::tank::TankScenario sc;
  sc.states = d2d::tank::default_states();
  sc.schedule = {"Q1", "V12", "V12_faulty"};
  const auto ts = d2d::tank::simulate(sc);
  auto modes = d2d::tank::default_states();
  std::erase_if(modes, [](const auto& kv) { return kv.first.find("faulty") != std::string::npos; });
  const auto labels = d2d::tank_mode_labels(ts, modes);
  EXPECT_EQ(labels[0], "Q1");
  EXPECT_EQ(labels[60], "V12");
  // A valve stuck nearly closed no longer looks like V12 nor any other mode.
  EXPECT_EQ(labels[120], "");
}

TEST(PipelineHelpers, TankHealthMapCoversNominalModes) {
  const auto map = d2d::tank_health_map();
  EXPECT_EQ(map.comps, (std::vector<std::string>{"q1", "q3", "kv1", "kv2", "kv3"}));
  for (const char* mode : {"Q1", "V12", "V23", "V3"}) EXPECT_TRUE(map.by_alias.count(mode)) << mode;
}

TEST(Cli, SimulateRowCounts) {
  const auto dir = scratch("simulate");
  auto r = run_cli("simulate --normal --cycles 15 --seed 1 -o " + (dir / "normal.csv").string());
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_EQ(line_count(slurp(dir / "normal.csv")), 5250u + 1u);

  r = run_cli("simulate --fault v12 --anom-cycles 3 -o " + (dir / "v12.csv").string());
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_EQ(line_count(slurp(dir / "v12.csv")), 11u * 7u * 50u + 1u);
  fs::remove_all(dir);
}

TEST(Cli, ErrorsAreSingleLines) {
  auto r = run_cli("simulate --fault pump -o /tmp/unused.csv");
  EXPECT_NE(r.status, 0);
  EXPECT_EQ(line_count(r.output), 1u) << r.output;
  EXPECT_EQ(r.output.rfind("error: ", 0), 0u) << r.output;

  r = run_cli("pre2di --data /nonexistent.csv --health-map /nonexistent.json --out-dir /tmp");
  EXPECT_NE(r.status, 0);
  EXPECT_EQ(line_count(r.output), 1u) << r.output;
  EXPECT_NE(r.output.find("io"), std::string::npos) << r.output;

  r = run_cli("--set catvae.beta=-1 synth --property 1 -o /tmp/unused.csv");
  EXPECT_NE(r.status, 0);
  EXPECT_EQ(line_count(r.output), 1u) << r.output;
}

TEST(Cli, MissingHealthMappingNamesState) {
  const auto dir = scratch("mapping");
  ASSERT_EQ(run_cli("simulate --normal --cycles 3 -o " + (dir / "n.csv").string()).status, 0);
  std::ofstream(dir / "map.json") << R"({"comps":["q1"],"Q1":["q1"]})";
  const auto r = run_cli(std::string(kFastTraining) + " pre2di --data " + (dir / "n.csv").string() +
                         " --health-map " + (dir / "map.json").string() + " --out-dir " + dir.string());
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find("missing_mapping"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("state "), std::string::npos) << r.output;
  fs::remove_all(dir);
}

TEST(Cli, Pre2DiAndDiscret2DiAreDeterministic) {
  const auto dir = scratch("determinism");
  const std::string map = std::string(DISCRET2DI_SOURCE_DIR) + "/configs/tank_health_map.json";
  ASSERT_EQ(run_cli("simulate --normal --cycles 5 --seed 3 -o " + (dir / "n.csv").string()).status, 0);
  ASSERT_EQ(run_cli("simulate --fault q1 --anom-cycles 1 --seed 4 -o " + (dir / "f.csv").string()).status, 0);
  for (const char* run : {"a", "b"}) {
    const auto out = dir / run;
    auto r = run_cli(std::string(kFastTraining) + " --set seed=5 pre2di --data " + (dir / "n.csv").string() +
                     " --health-map " + map + " --out-dir " + out.string());
    ASSERT_EQ(r.status, 0) << r.output;
    r = run_cli("--quiet discret2di --model " + (out / "model.json").string() + " --rules " +
                (out / "rules.json").string() + " --data " + (dir / "f.csv").string() + " --out-dir " +
                out.string());
    ASSERT_EQ(r.status, 0) << r.output;
  }
  for (const char* file : {"rules.json", "model.json", "diagnosis.json", "symbols.csv"}) {
    const auto a = slurp(dir / "a" / file);
    EXPECT_FALSE(a.empty()) << file;
    EXPECT_EQ(a, slurp(dir / "b" / file)) << file;
  }
  const auto diag = nlohmann::json::parse(slurp(dir / "a" / "diagnosis.json"));
  EXPECT_TRUE(diag.contains("summary"));
  fs::remove_all(dir);
}
