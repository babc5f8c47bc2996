#include "discret2di/diagnosis.hpp"

#include <algorithm>
#include <tuple>

#include "discret2di/error.hpp"

namespace d2d {

bool is_consistent_diagnosis(const RuleBase& rules, const Observation& obs, const std::set<Component>& delta) {
  sat::ClauseSet cs = encode_cnf(rules, obs, {});
  for (const auto& c : rules.comps) {
    cs.add_assumption({cs.atom(ab_atom(c)), delta.count(c) > 0});
  }
  return sat::solve(cs).satisfiable;
}

std::optional<DiagnosisResult> diagnose_observation(const RuleBase& rules, const Observation& obs,
                                                    const DiagnoseOptions& options) {
  sat::ClauseSet cs = encode_cnf(rules, obs, rules.comps);
  if (sat::solve(cs).satisfiable) return std::nullopt;

  DiagnosisResult result;
  result.timestamp = obs.timestamp;
  result.state_id = obs.state_id;
  result.residual_ok = obs.residual_ok;
  for (auto& c : sat::all_minimal_conflicts(cs)) result.conflicts.push_back(std::move(c.components));
  for (auto& delta : sat::minimal_hitting_sets(result.conflicts, options.max_size)) {
    if (!is_consistent_diagnosis(rules, obs, delta)) {
      throw Error(ErrorKind::kNumeric, "hitting set does not restore consistency");
    }
    result.diagnoses.push_back(std::move(delta));
  }
  return result;
}

std::vector<DiagnosisResult> diagnose(const RuleBase& rules, const SymbolSequence& seq,
                                      const DiagnoseOptions& options) {
  // Results only depend on (state, residual), so each pair is solved once.
  std::map<std::pair<int, bool>, std::optional<DiagnosisResult>> cache;
  std::vector<DiagnosisResult> out;
  for (const auto& rec : seq) {
    const auto key = std::make_pair(rec.state.id, rec.residual.ok);
    auto it = cache.find(key);
    if (it == cache.end()) {
      it = cache.emplace(key, diagnose_observation(rules, {0.0, rec.state.id, rec.residual.ok}, options)).first;
    }
    if (it->second) {
      DiagnosisResult r = *it->second;
      r.timestamp = rec.timestamp;
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::map<Component, std::size_t> implicated_counts(const std::vector<DiagnosisResult>& results) {
  std::map<Component, std::size_t> counts;
  for (const auto& r : results) {
    std::set<Component> seen;
    for (const auto& d : r.diagnoses) seen.insert(d.begin(), d.end());
    for (const auto& c : seen) ++counts[c];
  }
  return counts;
}

nlohmann::json diagnosis_report_json(const std::vector<DiagnosisResult>& results, const nlohmann::json& metadata) {
  auto sets = [](const std::vector<std::set<Component>>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : v) arr.push_back(std::vector<Component>(s.begin(), s.end()));
    return arr;
  };
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& r : results) {
    entries.push_back({{"timestamp", r.timestamp},
                       {"state_id", r.state_id},
                       {"residual", r.residual_ok ? "ok" : "not_ok"},
                       {"conflicts", sets(r.conflicts)},
                       {"diagnoses", sets(r.diagnoses)}});
  }
  nlohmann::json summary = nlohmann::json::object();
  for (const auto& [c, n] : implicated_counts(results)) summary[c] = n;
  return {{"metadata", metadata}, {"diagnosed_timestamps", results.size()}, {"summary", summary}, {"timestamps", entries}};
}

}  // namespace d2d
