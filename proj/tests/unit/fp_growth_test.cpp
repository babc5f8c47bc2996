#include <gtest/gtest.h>

#include <random>

#include "../support/oracles.hpp"
#include "discret2di/error.hpp"
#include "discret2di/fp_growth.hpp"
#include "discret2di/rule_mining.hpp"

using d2d::FrequentItemset;
using Items = std::vector<std::string>;

namespace {

d2d::SymbolSequence sequence(const std::vector<std::pair<int, bool>>& pairs) {
  d2d::SymbolSequence seq;
  double t = 0;
  for (const auto& [s, ok] : pairs) seq.push_back({t++, {s}, {ok}, 0.0});
  return seq;
}

}  // namespace

TEST(FpGrowth, HandExample) {
  const std::vector<Items> db{{"s0", "ok"}, {"s0", "ok"}, {"s0", "ok"}, {"s1", "ok"}};
  const auto got = d2d::fp_growth(db, 0.5);
  ASSERT_EQ(got.size(), 3u);
  EXPECT_EQ(got[0], (FrequentItemset<std::string>{{"ok"}, 4, 1.0}));
  EXPECT_EQ(got[1], (FrequentItemset<std::string>{{"s0"}, 3, 0.75}));
  EXPECT_EQ(got[2], (FrequentItemset<std::string>{{"ok", "s0"}, 3, 0.75}));
}

TEST(FpGrowth, FullSupportKeepsOnlyUniversalItems) {
  const std::vector<Items> db{{"a", "b", "c"}, {"a", "c"}, {"c", "a", "d"}};
  const auto got = d2d::fp_growth(db, 1.0);
  ASSERT_EQ(got.size(), 3u);
  EXPECT_EQ(got[0].items, (Items{"a"}));
  EXPECT_EQ(got[1].items, (Items{"c"}));
  EXPECT_EQ(got[2].items, (Items{"a", "c"}));
}

TEST(FpGrowth, DuplicatesInsideATransactionCountOnce) {
  const std::vector<std::vector<int>> db{{1, 1, 2}, {2}};
  const auto got = d2d::fp_growth(db, 0.5);
  ASSERT_EQ(got.size(), 3u);
  EXPECT_EQ(got[0].count, 1u);
  EXPECT_EQ(got[1].count, 2u);
  EXPECT_EQ(got[2].items, (std::vector<int>{1, 2}));
  EXPECT_EQ(got[2].count, 1u);
}

TEST(FpGrowth, RejectsBadSupportAndHandlesEmpty) {
  const std::vector<std::vector<int>> db{{1}};
  EXPECT_THROW(d2d::fp_growth(db, 0.0), d2d::Error);
  EXPECT_THROW(d2d::fp_growth(db, 1.5), d2d::Error);
  EXPECT_THROW(d2d::fp_growth(db, std::nan("")), d2d::Error);
  EXPECT_TRUE(d2d::fp_growth(std::vector<std::vector<int>>{}, 0.5).empty());
  EXPECT_EQ(d2d::fp_growth(std::vector<std::vector<int>>{{}, {}}, 0.5).size(), 0u);
}

TEST(FpGrowth, MatchesBruteForceOnRandomDatabases) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> s_d(0.01, 0.6);
  for (int trial = 0; trial < 100; ++trial) {
    int n_items = 0;
    const auto db = d2d::testing::random_database(rng, &n_items);
    const double s = s_d(rng);
    EXPECT_EQ(d2d::testing::compare_with_oracle(db, n_items, s), "") << "trial " << trial;
  }
}

TEST(FpTree, PathAndChainInvariants) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    int n_items = 0;
    const auto db = d2d::testing::random_database(rng, &n_items);
    d2d::WeightedTransactions<int> weighted;
    std::size_t total_len = 0;
    for (const auto& t : db) {
      weighted.emplace_back(t, 1);
      total_len += t.size();
    }
    const std::size_t min_count = 1 + db.size() / 10;
    const d2d::FpTree<int> tree(weighted, min_count);
    EXPECT_LE(tree.node_count(), total_len);
    std::map<int, std::size_t> support;
    for (const auto& t : db) {
      for (int i : t) ++support[i];
    }
    for (const auto& h : tree.header()) {
      EXPECT_GE(h.count, min_count);
      EXPECT_EQ(tree.chain_count(h.item), support[h.item]);
    }
    // Every node's count is at most the count of its parent.
    for (std::size_t n = 1; n < tree.nodes().size(); ++n) {
      const auto& node = tree.nodes()[n];
      if (node.parent > 0) {
        EXPECT_LE(node.count, tree.nodes()[static_cast<std::size_t>(node.parent)].count);
      }
    }
  }
}

TEST(RuleMining, TransactionsHaveTwoItems) {
  const auto tx = d2d::build_transactions(sequence({{0, true}, {0, true}, {1, false}}));
  ASSERT_EQ(tx.size(), 3u);
  for (const auto& t : tx) EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(tx[2], (Items{"state:1", "residual:not_ok"}));
  EXPECT_THROW(d2d::build_transactions({}), d2d::Error);
}

TEST(RuleMining, HandExampleRule) {
  const auto seq = sequence({{0, true}, {0, true}, {0, true}, {1, true}});
  const auto rules = d2d::mine_rules(seq, 0.5, {0.5, true});
  ASSERT_EQ(rules.size(), 1u);
  EXPECT_EQ(rules[0].state_id, 0);
  EXPECT_TRUE(rules[0].residual_ok);
  EXPECT_DOUBLE_EQ(rules[0].confidence, 1.0);
  EXPECT_DOUBLE_EQ(rules[0].support, 0.75);
}

TEST(RuleMining, OrderingAndBestPerState) {
  std::vector<std::pair<int, bool>> pairs;
  for (int i = 0; i < 60; ++i) pairs.push_back({2, true});
  for (int i = 0; i < 20; ++i) pairs.push_back({2, false});
  for (int i = 0; i < 15; ++i) pairs.push_back({1, true});
  for (int i = 0; i < 5; ++i) pairs.push_back({0, false});
  const auto seq = sequence(pairs);

  const auto all = d2d::mine_rules(seq, 0.01, {0.005, false});
  ASSERT_EQ(all.size(), 4u);
  // Confidence 1.0 ties break on support: state 1 (0.15) before state 0 (0.05).
  EXPECT_EQ(all[0].state_id, 1);
  EXPECT_EQ(all[1].state_id, 0);
  EXPECT_FALSE(all[1].residual_ok);
  EXPECT_EQ(all[2].state_id, 2);
  EXPECT_DOUBLE_EQ(all[2].confidence, 0.75);
  EXPECT_DOUBLE_EQ(all[3].confidence, 0.25);
  for (const auto& r : all) {
    EXPECT_GE(r.confidence, r.support);
    EXPECT_LE(r.confidence, 1.0);
    EXPECT_GE(r.support, 0.0);
  }

  const auto best = d2d::mine_rules(seq);
  ASSERT_EQ(best.size(), 3u);
  EXPECT_EQ(best[2].state_id, 2);
  EXPECT_TRUE(best[2].residual_ok);

  // A residual-only itemset never becomes a rule.
  for (const auto& r : d2d::mine_rules(sequence({{0, true}}), 0.5)) EXPECT_EQ(r.state_id, 0);
}

TEST(RuleMining, ConfidenceThresholdAndSupportFloor) {
  std::vector<std::pair<int, bool>> pairs(199, {0, true});
  pairs.push_back({0, false});
  const auto seq = sequence(pairs);
  // The single not_ok point falls below the support floor.
  EXPECT_EQ(d2d::mine_rules(seq, 0.01, {0.0, false}).size(), 1u);
  EXPECT_EQ(d2d::mine_rules(seq, 0.001, {0.0, false}).size(), 2u);
  EXPECT_EQ(d2d::mine_rules(seq, 0.001, {0.01, false}).size(), 1u);
}

TEST(RuleMining, JsonRoundTrip) {
  const std::vector<d2d::CandidateRule> rules{{3, true, 0.4, 0.9}, {1, false, 0.02, 0.5}};
  const auto j = d2d::to_json(rules);
  EXPECT_EQ(j[0]["antecedent"], "state:3");
  EXPECT_EQ(j[1]["consequent"], "residual:not_ok");
  EXPECT_EQ(d2d::candidate_rules_from_json(j), rules);
  EXPECT_THROW(d2d::candidate_rules_from_json(nlohmann::json::parse(
                   R"([{"antecedent":"residual:ok","consequent":"state:1","support":0.1,"confidence":0.1}])")),
               d2d::Error);
}
