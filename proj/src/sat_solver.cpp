#include "discret2di/sat_solver.hpp"

#include <algorithm>
#include <cstdint>

#include "discret2di/error.hpp"

namespace d2d::sat {

int ClauseSet::add_atom(const std::string& name) {
  auto it = index_.find(name);
  if (it != index_.end()) return it->second;
  const int idx = static_cast<int>(names_.size());
  names_.push_back(name);
  index_.emplace(name, idx);
  return idx;
}

int ClauseSet::atom(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error(ErrorKind::kInvalidArgument, "unknown atom '" + name + "'");
  return it->second;
}

void ClauseSet::add_clause(Clause clause) {
  if (clause.empty()) throw Error(ErrorKind::kInvalidArgument, "empty clause");
  for (const auto& l : clause) {
    if (l.atom < 0 || static_cast<std::size_t>(l.atom) >= names_.size()) {
      throw Error(ErrorKind::kInvalidArgument, "clause references unregistered atom");
    }
  }
  clauses_.push_back(std::move(clause));
}

void ClauseSet::add_assumption(Literal lit) {
  if (lit.atom < 0 || static_cast<std::size_t>(lit.atom) >= names_.size()) {
    throw Error(ErrorKind::kInvalidArgument, "assumption references unregistered atom");
  }
  assumptions_.push_back(lit);
}

namespace {

class Dpll {
 public:
  Dpll(const std::vector<Clause>& clauses, std::size_t atoms)
      : clauses_(clauses), value_(atoms, kUnassigned) {}

  bool run(const std::vector<Literal>& assumptions) {
    for (const auto& a : assumptions) {
      const auto v = value_[static_cast<std::size_t>(a.atom)];
      if (v == kUnassigned) {
        assign(a);
      } else if ((v == kTrue) != a.positive) {
        return false;
      }
    }
    return search();
  }

  std::vector<bool> model() const {
    std::vector<bool> m(value_.size());
    for (std::size_t i = 0; i < value_.size(); ++i) m[i] = value_[i] == kTrue;
    return m;
  }

 private:
  static constexpr std::int8_t kUnassigned = -1;
  static constexpr std::int8_t kFalse = 0;
  static constexpr std::int8_t kTrue = 1;

  void assign(Literal l) {
    value_[static_cast<std::size_t>(l.atom)] = l.positive ? kTrue : kFalse;
    trail_.push_back(l.atom);
  }

  void undo(std::size_t mark) {
    while (trail_.size() > mark) {
      value_[static_cast<std::size_t>(trail_.back())] = kUnassigned;
      trail_.pop_back();
    }
  }

  std::int8_t eval(Literal l) const {
    const auto v = value_[static_cast<std::size_t>(l.atom)];
    if (v == kUnassigned) return kUnassigned;
    return (v == kTrue) == l.positive ? kTrue : kFalse;
  }

  // Unit propagation and pure-literal elimination to a fixpoint.
  // Returns false on a falsified clause.
  bool simplify() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& c : clauses_) {
        int unassigned = 0;
        Literal last{};
        bool sat = false;
        for (const auto& l : c) {
          const auto e = eval(l);
          if (e == kTrue) { sat = true; break; }
          if (e == kUnassigned) { ++unassigned; last = l; }
        }
        if (sat) continue;
        if (unassigned == 0) return false;
        if (unassigned == 1) {
          assign(last);
          changed = true;
        }
      }
      if (changed) continue;
      // polarity bits: 1 = seen positive, 2 = seen negative
      std::vector<std::uint8_t> polarity(value_.size(), 0);
      for (const auto& c : clauses_) {
        bool sat = false;
        for (const auto& l : c) {
          if (eval(l) == kTrue) { sat = true; break; }
        }
        if (sat) continue;
        for (const auto& l : c) {
          if (eval(l) == kUnassigned) polarity[static_cast<std::size_t>(l.atom)] |= l.positive ? 1 : 2;
        }
      }
      for (std::size_t a = 0; a < polarity.size(); ++a) {
        if (polarity[a] == 1 || polarity[a] == 2) {
          assign({static_cast<int>(a), polarity[a] == 1});
          changed = true;
        }
      }
    }
    return true;
  }

  bool search() {
    const std::size_t mark = trail_.size();
    if (!simplify()) {
      undo(mark);
      return false;
    }
    auto it = std::find(value_.begin(), value_.end(), kUnassigned);
    if (it == value_.end()) return true;
    const int atom = static_cast<int>(it - value_.begin());
    for (bool polarity : {true, false}) {
      const std::size_t branch_mark = trail_.size();
      assign({atom, polarity});
      if (search()) return true;
      undo(branch_mark);
    }
    undo(mark);
    return false;
  }

  const std::vector<Clause>& clauses_;
  std::vector<std::int8_t> value_;
  std::vector<int> trail_;
};

}  // namespace

bool satisfiable(const std::vector<Clause>& clauses, std::size_t atom_count,
                 const std::vector<Literal>& assumptions, std::vector<bool>* model) {
  Dpll solver(clauses, atom_count);
  const bool sat = solver.run(assumptions);
  if (sat && model) *model = solver.model();
  return sat;
}

std::vector<Literal> minimize_core(const ClauseSet& cs, std::vector<Literal> core) {
  for (std::size_t i = 0; i < core.size();) {
    std::vector<Literal> trial = core;
    trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(i));
    if (!satisfiable(cs.clauses(), cs.atom_count(), trial)) {
      core = std::move(trial);
    } else {
      ++i;
    }
  }
  return core;
}

SolveResult solve(const ClauseSet& cs) {
  SolveResult r;
  r.satisfiable = satisfiable(cs.clauses(), cs.atom_count(), cs.assumptions(), &r.model);
  if (!r.satisfiable) r.core = minimize_core(cs, cs.assumptions());
  return r;
}

std::string component_of(const std::string& atom_name) {
  if (atom_name.size() > 4 && atom_name.rfind("AB(", 0) == 0 && atom_name.back() == ')') {
    return atom_name.substr(3, atom_name.size() - 4);
  }
  return atom_name;
}

std::vector<Conflict> all_minimal_conflicts(const ClauseSet& cs) {
  const auto& assumptions = cs.assumptions();
  const std::size_t m = assumptions.size();
  std::vector<std::vector<std::size_t>> found;
  std::vector<Clause> map;  // over selector atoms 0..m-1

  auto subset = [&](const std::vector<bool>& seed) {
    std::vector<Literal> lits;
    for (std::size_t i = 0; i < m; ++i) {
      if (seed[i]) lits.push_back(assumptions[i]);
    }
    return lits;
  };
  auto map_allows = [&](const std::vector<bool>& seed) {
    for (const auto& c : map) {
      bool ok = false;
      for (const auto& l : c) {
        if (seed[static_cast<std::size_t>(l.atom)] == l.positive) { ok = true; break; }
      }
      if (!ok) return false;
    }
    return true;
  };

  while (true) {
    std::vector<bool> seed;
    if (!satisfiable(map, m, {}, &seed)) break;
    seed.resize(m, false);
    for (std::size_t i = 0; i < m; ++i) {
      if (seed[i]) continue;
      seed[i] = true;
      if (!map_allows(seed)) seed[i] = false;
    }
    const auto lits = subset(seed);
    if (satisfiable(cs.clauses(), cs.atom_count(), lits)) {
      Clause block_down;
      for (std::size_t i = 0; i < m; ++i) {
        if (!seed[i]) block_down.push_back({static_cast<int>(i), true});
      }
      if (block_down.empty()) break;
      map.push_back(std::move(block_down));
      continue;
    }
    const auto mus = minimize_core(cs, lits);
    std::vector<std::size_t> idx;
    Clause block_up;
    for (const auto& l : mus) {
      const auto pos = static_cast<std::size_t>(std::find(assumptions.begin(), assumptions.end(), l) - assumptions.begin());
      idx.push_back(pos);
      block_up.push_back({static_cast<int>(pos), false});
    }
    found.push_back(idx);
    if (block_up.empty()) break;  // hard clauses alone are inconsistent
    map.push_back(std::move(block_up));
  }

  std::vector<Conflict> out;
  for (std::size_t a = 0; a < found.size(); ++a) {
    const std::set<std::size_t> sa(found[a].begin(), found[a].end());
    bool minimal = true;
    for (std::size_t b = 0; b < found.size() && minimal; ++b) {
      if (a == b) continue;
      const std::set<std::size_t> sb(found[b].begin(), found[b].end());
      if (sb.size() < sa.size() && std::includes(sa.begin(), sa.end(), sb.begin(), sb.end())) minimal = false;
    }
    if (!minimal) continue;
    Conflict c;
    for (auto i : sa) {
      c.assumptions.push_back(assumptions[i]);
      c.components.insert(component_of(cs.atom_names()[static_cast<std::size_t>(assumptions[i].atom)]));
    }
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const Conflict& x, const Conflict& y) {
    if (x.components.size() != y.components.size()) return x.components.size() < y.components.size();
    return x.components < y.components;
  });
  return out;
}

std::vector<std::set<std::string>> minimal_hitting_sets(const std::vector<std::set<std::string>>& conflicts,
                                                        int max_size) {
  if (max_size < 1) throw Error(ErrorKind::kInvalidArgument, "max_size must be >= 1");
  if (conflicts.empty()) return {std::set<std::string>{}};
  std::set<std::string> universe_set;
  for (const auto& c : conflicts) {
    if (c.empty()) return {};
    universe_set.insert(c.begin(), c.end());
  }
  const std::vector<std::string> universe(universe_set.begin(), universe_set.end());
  const int n = static_cast<int>(universe.size());

  std::vector<std::set<std::string>> result;
  std::vector<int> pick;
  for (int size = 1; size <= std::min(max_size, n); ++size) {
    pick.resize(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) pick[static_cast<std::size_t>(i)] = i;
    while (true) {
      std::set<std::string> candidate;
      for (int i : pick) candidate.insert(universe[static_cast<std::size_t>(i)]);
      const bool has_smaller = std::any_of(result.begin(), result.end(), [&](const auto& h) {
        return std::includes(candidate.begin(), candidate.end(), h.begin(), h.end());
      });
      if (!has_smaller) {
        const bool hits_all = std::all_of(conflicts.begin(), conflicts.end(), [&](const auto& c) {
          return std::any_of(c.begin(), c.end(), [&](const auto& x) { return candidate.count(x) > 0; });
        });
        if (hits_all) result.push_back(std::move(candidate));
      }
      // next combination in lexicographic order
      int k = size - 1;
      while (k >= 0 && pick[static_cast<std::size_t>(k)] == n - size + k) --k;
      if (k < 0) break;
      ++pick[static_cast<std::size_t>(k)];
      for (int j = k + 1; j < size; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return result;
}

}  // namespace d2d::sat
