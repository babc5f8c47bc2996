#include "discret2di/knowledge_base.hpp"

#include <algorithm>
#include <fstream>

#include "discret2di/error.hpp"

namespace d2d {

namespace {

bool parse_int(const std::string& s, int& out) {
  if (s.empty()) return false;
  try {
    std::size_t used = 0;
    out = std::stoi(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

std::map<int, std::set<Component>> HealthMap::resolve(const std::map<int, std::vector<std::string>>& aliases) const {
  std::map<int, std::set<Component>> out = by_id;
  for (const auto& [id, names] : aliases) {
    for (const auto& name : names) {
      auto it = by_alias.find(name);
      if (it != by_alias.end()) out[id].insert(it->second.begin(), it->second.end());
    }
  }
  return out;
}

void HealthMap::validate() const {
  const std::set<Component> known(comps.begin(), comps.end());
  if (known.size() != comps.size()) throw Error(ErrorKind::kSchema, "health map: duplicate component");
  auto check = [&](const std::set<Component>& members, const std::string& key) {
    for (const auto& c : members) {
      if (!known.count(c)) {
        throw Error(ErrorKind::kSchema, "health map entry '" + key + "' uses undeclared component '" + c + "'");
      }
    }
  };
  for (const auto& [id, m] : by_id) check(m, std::to_string(id));
  for (const auto& [alias, m] : by_alias) check(m, alias);
}

HealthMap health_map_from_json(const nlohmann::json& doc) {
  HealthMap map;
  if (!doc.contains("comps")) throw Error(ErrorKind::kSchema, "health map: missing 'comps'");
  map.comps = doc.at("comps").get<std::vector<Component>>();
  for (const auto& [key, value] : doc.items()) {
    if (key == "comps" || key == "metadata") continue;
    const auto members = value.get<std::vector<Component>>();
    std::set<Component> set(members.begin(), members.end());
    int id = 0;
    if (parse_int(key, id)) {
      map.by_id[id] = std::move(set);
    } else {
      map.by_alias[key] = std::move(set);
    }
  }
  map.validate();
  return map;
}

nlohmann::json to_json(const HealthMap& map) {
  nlohmann::json doc = {{"comps", map.comps}};
  for (const auto& [id, m] : map.by_id) doc[std::to_string(id)] = std::vector<Component>(m.begin(), m.end());
  for (const auto& [alias, m] : map.by_alias) doc[alias] = std::vector<Component>(m.begin(), m.end());
  return doc;
}

HealthMap load_health_map(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw Error(ErrorKind::kIo, "cannot open health map '" + path.string() + "'");
  try {
    return health_map_from_json(nlohmann::json::parse(file));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, "health map '" + path.string() + "': " + e.what());
  }
}

RuleBase complete_rules(const std::vector<CandidateRule>& partial,
                        const std::map<int, std::set<Component>>& resolved,
                        const std::vector<Component>& comps) {
  RuleBase rb;
  rb.comps = comps;
  const std::set<Component> known(comps.begin(), comps.end());
  for (const auto& cand : partial) {
    auto it = resolved.find(cand.state_id);
    if (it == resolved.end() || it->second.empty()) {
      throw Error(ErrorKind::kMissingMapping,
                  "state " + std::to_string(cand.state_id) + " has no health mapping; extend the health map");
    }
    for (const auto& c : it->second) {
      if (!known.count(c)) throw Error(ErrorKind::kSchema, "component '" + c + "' not declared");
    }
    rb.rules.push_back({{it->second}, cand.state_id, cand.residual_ok, cand.support, cand.confidence, "mined"});
  }
  return rb;
}

nlohmann::json to_json(const RuleBase& rb) {
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& r : rb.rules) {
    rules.push_back({{"components", std::vector<Component>(r.health.components.begin(), r.health.components.end())},
                     {"state_id", r.state_id},
                     {"residual", r.residual_ok ? "ok" : "not_ok"},
                     {"support", r.support},
                     {"confidence", r.confidence}});
  }
  return {{"comps", rb.comps}, {"rules", rules}, {"metadata", rb.metadata}};
}

RuleBase rule_base_from_json(const nlohmann::json& doc) {
  RuleBase rb;
  rb.comps = doc.at("comps").get<std::vector<Component>>();
  if (doc.contains("metadata")) rb.metadata = doc.at("metadata");
  const std::set<Component> known(rb.comps.begin(), rb.comps.end());
  for (const auto& j : doc.at("rules")) {
    Rule r;
    const auto comps = j.at("components").get<std::vector<Component>>();
    if (comps.empty()) throw Error(ErrorKind::kSchema, "rule without components");
    for (const auto& c : comps) {
      if (!known.count(c)) throw Error(ErrorKind::kSchema, "rule uses undeclared component '" + c + "'");
    }
    r.health.components = {comps.begin(), comps.end()};
    r.state_id = j.at("state_id").get<int>();
    const auto residual = j.at("residual").get<std::string>();
    if (residual != "ok" && residual != "not_ok") throw Error(ErrorKind::kSchema, "bad residual '" + residual + "'");
    r.residual_ok = residual == "ok";
    r.support = j.value("support", 0.0);
    r.confidence = j.value("confidence", 0.0);
    rb.rules.push_back(std::move(r));
  }
  return rb;
}

std::string ab_atom(const Component& c) { return "AB(" + c + ")"; }
std::string state_atom(int state_id) { return "state_" + std::to_string(state_id); }

sat::ClauseSet encode_cnf(const RuleBase& rules, const Observation& obs,
                          const std::vector<Component>& assume_healthy) {
  sat::ClauseSet cs;
  for (const auto& c : rules.comps) cs.add_atom(ab_atom(c));
  std::set<int> states{obs.state_id};
  for (const auto& r : rules.rules) states.insert(r.state_id);
  for (int s : states) cs.add_atom(state_atom(s));
  const int r_ok = cs.add_atom(kResidualAtom);

  for (const auto& r : rules.rules) {
    sat::Clause clause;
    for (const auto& c : r.health.components) clause.push_back({cs.add_atom(ab_atom(c)), true});
    clause.push_back({cs.atom(state_atom(r.state_id)), false});
    clause.push_back({r_ok, r.residual_ok});
    cs.add_clause(std::move(clause));
  }
  for (int s : states) cs.add_clause({{cs.atom(state_atom(s)), s == obs.state_id}});
  cs.add_clause({{r_ok, obs.residual_ok}});
  for (const auto& c : assume_healthy) {
    if (!cs.has_atom(ab_atom(c))) throw Error(ErrorKind::kInvalidArgument, "unknown component '" + c + "'");
    cs.add_assumption({cs.atom(ab_atom(c)), false});
  }
  return cs;
}

}  // namespace d2d
