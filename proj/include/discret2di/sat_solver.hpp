#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace d2d::sat {

struct Literal {
  int atom = 0;
  bool positive = true;

  Literal operator~() const { return {atom, !positive}; }
  bool operator==(const Literal&) const = default;
  auto operator<=>(const Literal&) const = default;
};

using Clause = std::vector<Literal>;

// Named atoms, hard clauses, and retractable assumption literals.
class ClauseSet {
 public:
  // Registers the atom if needed and returns its index.
  int add_atom(const std::string& name);
  int atom(const std::string& name) const;  // throws if unknown
  bool has_atom(const std::string& name) const { return index_.count(name) > 0; }

  void add_clause(Clause clause);
  void add_assumption(Literal lit);
  void clear_assumptions() { assumptions_.clear(); }

  std::size_t atom_count() const { return names_.size(); }
  const std::vector<std::string>& atom_names() const { return names_; }
  const std::vector<Clause>& clauses() const { return clauses_; }
  const std::vector<Literal>& assumptions() const { return assumptions_; }

 private:
  std::vector<std::string> names_;
  std::map<std::string, int> index_;
  std::vector<Clause> clauses_;
  std::vector<Literal> assumptions_;
};

struct SolveResult {
  bool satisfiable = false;
  std::vector<bool> model;    // one value per atom when satisfiable
  std::vector<Literal> core;  // subset of the assumptions when unsatisfiable
};

// DPLL with unit propagation and pure-literal elimination; branches on the
// lowest unassigned atom, true first. `model` is filled when satisfiable.
bool satisfiable(const std::vector<Clause>& clauses, std::size_t atom_count,
                 const std::vector<Literal>& assumptions, std::vector<bool>* model = nullptr);

// Solves clauses plus assumptions. An unsatisfiable answer carries a core
// shrunk by deletion until dropping any member makes it satisfiable.
SolveResult solve(const ClauseSet& cs);

// Deletion-based shrinking of an unsatisfiable assumption set.
std::vector<Literal> minimize_core(const ClauseSet& cs, std::vector<Literal> core);

// A minimal set of assumptions that cannot hold together. Members are the
// names of the assumption atoms with an "AB(...)" wrapper removed.
struct Conflict {
  std::set<std::string> components;
  std::vector<Literal> assumptions;

  bool operator==(const Conflict& o) const { return components == o.components; }
};

// Every minimal unsatisfiable subset of the assumptions, enumerated by
// seed/shrink/block iterations over a map formula on assumption selectors.
std::vector<Conflict> all_minimal_conflicts(const ClauseSet& cs);

// All inclusion-minimal sets of size <= max_size meeting every conflict,
// ordered by size and then lexicographically.
std::vector<std::set<std::string>> minimal_hitting_sets(const std::vector<std::set<std::string>>& conflicts,
                                                        int max_size);

std::string component_of(const std::string& atom_name);

}  // namespace d2d::sat
