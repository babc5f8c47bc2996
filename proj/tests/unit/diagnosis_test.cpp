#include <gtest/gtest.h>

#include <random>

#include "../support/oracles.hpp"
#include "discret2di/diagnosis.hpp"

using d2d::Component;
using d2d::RuleBase;
using Sets = std::vector<std::set<Component>>;

namespace {

RuleBase tank_rules() {
  RuleBase rb;
  rb.comps = {"q1", "q3", "kv1", "kv2", "kv3"};
  rb.rules.push_back({{{"q1", "kv1"}}, 3, true, 0.2, 1.0, "mined"});
  rb.rules.push_back({{{"kv2"}}, 1, true, 0.2, 1.0, "mined"});
  return rb;
}

d2d::SymbolSequence sequence(const std::vector<std::pair<int, bool>>& pairs) {
  d2d::SymbolSequence seq;
  double t = 0;
  for (const auto& [s, ok] : pairs) seq.push_back({t++, {s}, {ok}, 0.0});
  return seq;
}

}  // namespace

TEST(Diagnose, SingleRuleExample) {
  const auto r = d2d::diagnose_observation(tank_rules(), {4.0, 3, false});
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->conflicts, (Sets{{"kv1", "q1"}}));
  EXPECT_EQ(r->diagnoses, (Sets{{"kv1"}, {"q1"}}));
  EXPECT_DOUBLE_EQ(r->timestamp, 4.0);
  EXPECT_FALSE(d2d::diagnose_observation(tank_rules(), {0.0, 3, true}).has_value());
  EXPECT_FALSE(d2d::diagnose_observation(tank_rules(), {0.0, 8, false}).has_value());
}

TEST(Diagnose, TwoRulesOnOneState) {
  RuleBase rb;
  rb.comps = {"a", "b", "c"};
  rb.rules.push_back({{{"a", "b"}}, 0, true});
  rb.rules.push_back({{{"b", "c"}}, 0, true});
  const auto r = d2d::diagnose_observation(rb, {0.0, 0, false});
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->conflicts, (Sets{{"a", "b"}, {"b", "c"}}));
  EXPECT_EQ(r->diagnoses, (Sets{{"b"}, {"a", "c"}}));
  d2d::DiagnoseOptions opts;
  opts.max_size = 1;
  EXPECT_EQ(d2d::diagnose_observation(rb, {0.0, 0, false}, opts)->diagnoses, (Sets{{"b"}}));
}

TEST(Diagnose, SequenceOnlyReportsInconsistentTimestamps) {
  const auto seq = sequence({{3, true}, {3, false}, {1, true}, {1, false}, {3, false}, {0, false}});
  const auto results = d2d::diagnose(tank_rules(), seq);
  ASSERT_EQ(results.size(), 3u);
  EXPECT_DOUBLE_EQ(results[0].timestamp, 1.0);
  EXPECT_DOUBLE_EQ(results[1].timestamp, 3.0);
  EXPECT_EQ(results[1].diagnoses, (Sets{{"kv2"}}));
  EXPECT_DOUBLE_EQ(results[2].timestamp, 4.0);

  const auto counts = d2d::implicated_counts(results);
  EXPECT_EQ(counts.at("q1"), 2u);
  EXPECT_EQ(counts.at("kv1"), 2u);
  EXPECT_EQ(counts.at("kv2"), 1u);
  EXPECT_EQ(counts.count("kv3"), 0u);

  EXPECT_TRUE(d2d::diagnose(tank_rules(), sequence({{3, true}, {1, true}, {5, false}})).empty());
}

TEST(Diagnose, DiagnosesAreMinimalHittingSetsAndConsistent) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> nr(1, 8), st(0, 3), b(0, 1);
  int inconsistent = 0;
  for (int trial = 0; trial < 200; ++trial) {
    RuleBase rb;
    rb.comps = {"a", "b", "c", "d", "e"};
    std::uniform_int_distribution<int> pick(0, 4);
    for (int i = nr(rng); i > 0; --i) {
      d2d::Rule r;
      for (int k = 1 + pick(rng) % 3; k > 0; --k) r.health.components.insert(rb.comps[static_cast<std::size_t>(pick(rng))]);
      r.state_id = st(rng);
      r.residual_ok = b(rng) == 1;
      rb.rules.push_back(r);
    }
    const d2d::Observation obs{0.0, st(rng), b(rng) == 1};
    d2d::DiagnoseOptions opts;
    opts.max_size = 5;
    const auto r = d2d::diagnose_observation(rb, obs, opts);
    if (!r) continue;
    ++inconsistent;
    const auto expected = d2d::testing::exhaustive_hitting_sets(r->conflicts, 5);
    EXPECT_EQ(std::set<std::set<Component>>(r->diagnoses.begin(), r->diagnoses.end()), expected);
    for (const auto& delta : r->diagnoses) {
      EXPECT_TRUE(d2d::is_consistent_diagnosis(rb, obs, delta));
      for (const auto& c : delta) {
        auto smaller = delta;
        smaller.erase(c);
        EXPECT_FALSE(d2d::is_consistent_diagnosis(rb, obs, smaller));
      }
    }
  }
  EXPECT_GT(inconsistent, 20);
}

TEST(Diagnose, DeterministicReport) {
  const auto seq = sequence({{3, false}, {1, false}, {3, true}});
  const auto a = d2d::diagnosis_report_json(d2d::diagnose(tank_rules(), seq), {{"seed", 1}});
  const auto b = d2d::diagnosis_report_json(d2d::diagnose(tank_rules(), seq), {{"seed", 1}});
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_EQ(a["diagnosed_timestamps"], 2);
  EXPECT_EQ(a["timestamps"][0]["residual"], "not_ok");
  EXPECT_EQ(a["timestamps"][0]["diagnoses"], nlohmann::json::parse(R"([["kv1"],["q1"]])"));
  EXPECT_EQ(a["summary"]["kv2"], 1);
  EXPECT_EQ(a["metadata"]["seed"], 1);
}
