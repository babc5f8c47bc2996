#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "discret2di/discretization.hpp"
#include "discret2di/fp_growth.hpp"

namespace d2d {

// Items are "state:<id>", "residual:ok" or "residual:not_ok".
using Transaction = std::vector<std::string>;

inline constexpr double kDefaultMinSupport = 0.01;
inline constexpr double kDefaultMinConfidence = 0.005;

std::string state_item(int state_id);
std::string residual_item(bool ok);

// One transaction per record: its state item and its residual item.
std::vector<Transaction> build_transactions(const SymbolSequence& seq);

// Implication state -> residual mined from frequent itemsets.
struct CandidateRule {
  int state_id = 0;
  bool residual_ok = true;
  double support = 0.0;     // support(state and residual)
  double confidence = 0.0;  // support(state and residual) / support(state)

  bool operator==(const CandidateRule&) const = default;
};

struct RuleGenerationOptions {
  double min_confidence = kDefaultMinConfidence;
  // Keep only the strongest residual rule of a state observed with both.
  bool best_per_state = true;
};

// Rules shaped state -> residual, sorted by confidence desc, support desc,
// state id asc.
std::vector<CandidateRule> generate_rules(const std::vector<FrequentItemset<std::string>>& itemsets,
                                          const RuleGenerationOptions& options = {});

std::vector<CandidateRule> mine_rules(const SymbolSequence& seq, double min_support = kDefaultMinSupport,
                                      const RuleGenerationOptions& options = {});

nlohmann::json to_json(const std::vector<CandidateRule>& rules);
std::vector<CandidateRule> candidate_rules_from_json(const nlohmann::json& doc);

}  // namespace d2d
