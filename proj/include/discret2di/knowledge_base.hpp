#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "discret2di/discretization.hpp"
#include "discret2di/rule_mining.hpp"
#include "discret2di/sat_solver.hpp"

namespace d2d {

using Component = std::string;

// Conjunction of not-AB(c) over its members.
struct HealthComponent {
  std::set<Component> components;
};

// health -> (state -> residual)
struct Rule {
  HealthComponent health;
  int state_id = 0;
  bool residual_ok = true;
  double support = 0.0;
  double confidence = 0.0;
  std::string source = "mined";
};

// Weak-fault system description over the declared components.
struct RuleBase {
  std::vector<Component> comps;
  std::vector<Rule> rules;
  nlohmann::json metadata = nlohmann::json::object();
};

// Expert knowledge: which components act on an observational state. Keys are
// numeric state ids or aliases that are resolved to ids after training.
struct HealthMap {
  std::vector<Component> comps;
  std::map<int, std::set<Component>> by_id;
  std::map<std::string, std::set<Component>> by_alias;

  // state id -> components, merging id entries with the entries of every
  // alias attached to that id.
  std::map<int, std::set<Component>> resolve(const std::map<int, std::vector<std::string>>& aliases = {}) const;
  void validate() const;
};

HealthMap health_map_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const HealthMap& map);
HealthMap load_health_map(const std::filesystem::path& path);

struct Observation {
  double timestamp = 0.0;
  int state_id = 0;
  bool residual_ok = true;
};

// Attaches the mapped health component to every candidate. Throws
// kMissingMapping naming the first unmapped state id.
RuleBase complete_rules(const std::vector<CandidateRule>& partial,
                        const std::map<int, std::set<Component>>& resolved,
                        const std::vector<Component>& comps);

nlohmann::json to_json(const RuleBase& rules);
RuleBase rule_base_from_json(const nlohmann::json& doc);

std::string ab_atom(const Component& c);
std::string state_atom(int state_id);
inline const std::string kResidualAtom = "r_ok";

// Clauses (AB(c1) | ... | AB(cl) | !state | lit(r)) per rule, unit clauses
// closing the observation (observed state true, other states false, residual
// with observed polarity), and an assumption !AB(c) per healthy component.
sat::ClauseSet encode_cnf(const RuleBase& rules, const Observation& obs,
                          const std::vector<Component>& assume_healthy);

}  // namespace d2d
