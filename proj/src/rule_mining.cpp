#include "discret2di/rule_mining.hpp"

#include <algorithm>
#include <map>
#include <optional>

#include "discret2di/error.hpp"

namespace d2d {

namespace {

constexpr const char* kStatePrefix = "state:";
constexpr const char* kResidualOk = "residual:ok";
constexpr const char* kResidualNotOk = "residual:not_ok";

std::optional<int> parse_state_item(const std::string& item) {
  const std::string prefix = kStatePrefix;
  if (item.rfind(prefix, 0) != 0) return std::nullopt;
  try {
    std::size_t used = 0;
    const int id = std::stoi(item.substr(prefix.size()), &used);
    if (used + prefix.size() != item.size()) return std::nullopt;
    return id;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::optional<bool> parse_residual_item(const std::string& item) {
  if (item == kResidualOk) return true;
  if (item == kResidualNotOk) return false;
  return std::nullopt;
}

}  // namespace

std::string state_item(int state_id) { return kStatePrefix + std::to_string(state_id); }
std::string residual_item(bool ok) { return ok ? kResidualOk : kResidualNotOk; }

std::vector<Transaction> build_transactions(const SymbolSequence& seq) {
  if (seq.empty()) throw Error(ErrorKind::kInvalidArgument, "cannot build transactions from an empty sequence");
  std::vector<Transaction> out;
  out.reserve(seq.size());
  for (const auto& r : seq) out.push_back({state_item(r.state.id), residual_item(r.residual.ok)});
  return out;
}

std::vector<CandidateRule> generate_rules(const std::vector<FrequentItemset<std::string>>& itemsets,
                                          const RuleGenerationOptions& options) {
  std::map<int, double> state_support;
  for (const auto& fi : itemsets) {
    if (fi.items.size() != 1) continue;
    if (auto id = parse_state_item(fi.items[0])) state_support[*id] = fi.support;
  }
  std::vector<CandidateRule> rules;
  for (const auto& fi : itemsets) {
    if (fi.items.size() != 2) continue;
    std::optional<int> state;
    std::optional<bool> residual;
    for (const auto& item : fi.items) {
      if (auto s = parse_state_item(item)) state = s;
      if (auto r = parse_residual_item(item)) residual = r;
    }
    if (!state || !residual) continue;
    auto sup = state_support.find(*state);
    if (sup == state_support.end() || sup->second <= 0.0) continue;
    const double confidence = std::min(1.0, fi.support / sup->second);
    if (confidence >= options.min_confidence) {
      rules.push_back({*state, *residual, fi.support, confidence});
    }
  }
  auto order = [](const CandidateRule& a, const CandidateRule& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.support != b.support) return a.support > b.support;
    if (a.state_id != b.state_id) return a.state_id < b.state_id;
    return a.residual_ok && !b.residual_ok;
  };
  std::sort(rules.begin(), rules.end(), order);
  if (options.best_per_state) {
    std::vector<CandidateRule> kept;
    std::map<int, bool> seen;
    for (const auto& r : rules) {
      if (seen.emplace(r.state_id, true).second) kept.push_back(r);
    }
    rules = std::move(kept);
  }
  return rules;
}

std::vector<CandidateRule> mine_rules(const SymbolSequence& seq, double min_support,
                                      const RuleGenerationOptions& options) {
  return generate_rules(fp_growth(build_transactions(seq), min_support), options);
}

nlohmann::json to_json(const std::vector<CandidateRule>& rules) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rules) {
    out.push_back({{"antecedent", state_item(r.state_id)},
                   {"consequent", residual_item(r.residual_ok)},
                   {"support", r.support},
                   {"confidence", r.confidence}});
  }
  return out;
}

std::vector<CandidateRule> candidate_rules_from_json(const nlohmann::json& doc) {
  std::vector<CandidateRule> rules;
  for (const auto& j : doc) {
    auto state = parse_state_item(j.at("antecedent").get<std::string>());
    auto residual = parse_residual_item(j.at("consequent").get<std::string>());
    if (!state || !residual) throw Error(ErrorKind::kSchema, "malformed candidate rule");
    rules.push_back({*state, *residual, j.at("support").get<double>(), j.at("confidence").get<double>()});
  }
  return rules;
}

}  // namespace d2d
