#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "discret2di/discretization.hpp"
#include "discret2di/knowledge_base.hpp"

namespace d2d {

struct DiagnosisResult {
  double timestamp = 0.0;
  int state_id = 0;
  bool residual_ok = true;
  std::vector<std::set<Component>> conflicts;
  std::vector<std::set<Component>> diagnoses;  // minimal, each re-verified
};

struct DiagnoseOptions {
  int max_size = 3;  // hitting-set cardinality cap
};

// Consistency check of one observation against the rule base with every
// component assumed healthy. Returns nothing when consistent.
std::optional<DiagnosisResult> diagnose_observation(const RuleBase& rules, const Observation& obs,
                                                    const DiagnoseOptions& options = {});

// One result per inconsistent timestamp, in sequence order.
std::vector<DiagnosisResult> diagnose(const RuleBase& rules, const SymbolSequence& seq,
                                      const DiagnoseOptions& options = {});

// True when SD + OBS + {AB(c) : c in delta} + {!AB(c) : c not in delta} is satisfiable.
bool is_consistent_diagnosis(const RuleBase& rules, const Observation& obs, const std::set<Component>& delta);

// component -> number of timestamps where it appears in some minimal diagnosis
std::map<Component, std::size_t> implicated_counts(const std::vector<DiagnosisResult>& results);

nlohmann::json diagnosis_report_json(const std::vector<DiagnosisResult>& results,
                                     const nlohmann::json& metadata = nlohmann::json::object());

}  // namespace d2d
