#pragma once

// Brute-force reference implementations used to check the real algorithms.

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "discret2di/fp_growth.hpp"
#include "discret2di/sat_solver.hpp"

namespace d2d::testing {

// Every itemset over the item universe with count >= ceil(s * N).
inline std::map<std::vector<int>, std::size_t> brute_force_itemsets(const std::vector<std::vector<int>>& db,
                                                                    int n_items, double min_support) {
  std::vector<unsigned> masks;
  for (const auto& t : db) {
    unsigned m = 0;
    for (int i : t) m |= 1u << i;
    masks.push_back(m);
  }
  const auto min_count = static_cast<std::size_t>(
      std::max(1.0, std::ceil(min_support * static_cast<double>(db.size()) - 1e-9)));
  std::map<std::vector<int>, std::size_t> out;
  for (unsigned s = 1; s < (1u << n_items); ++s) {
    std::size_t count = 0;
    for (unsigned m : masks) count += (m & s) == s;
    if (count >= min_count) {
      std::vector<int> items;
      for (int i = 0; i < n_items; ++i) {
        if (s & (1u << i)) items.push_back(i);
      }
      out[items] = count;
    }
  }
  return out;
}

inline std::vector<std::vector<int>> random_database(std::mt19937_64& rng, int* n_items_out) {
  std::uniform_int_distribution<int> items_d(1, 10), tx_d(1, 500);
  const int n_items = items_d(rng);
  const int n_tx = tx_d(rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(static_cast<std::size_t>(n_items));
  for (auto& v : p) v = 0.05 + 0.9 * u(rng);
  std::vector<std::vector<int>> db;
  for (int t = 0; t < n_tx; ++t) {
    std::vector<int> tx;
    for (int i = 0; i < n_items; ++i) {
      if (u(rng) < p[static_cast<std::size_t>(i)]) tx.push_back(i);
    }
    db.push_back(tx);
  }
  *n_items_out = n_items;
  return db;
}

// Returns "" when the fp-growth output differs from the oracle.
inline std::string compare_with_oracle(const std::vector<std::vector<int>>& db, int n_items, double s) {
  const auto expected = brute_force_itemsets(db, n_items, s);
  const auto got = fp_growth(db, s);
  if (got.size() != expected.size()) {
    return "itemset count " + std::to_string(got.size()) + " != " + std::to_string(expected.size());
  }
  for (const auto& fi : got) {
    auto it = expected.find(fi.items);
    if (it == expected.end()) return "unexpected itemset";
    if (it->second != fi.count) return "count mismatch";
    if (std::abs(fi.support - static_cast<double>(fi.count) / static_cast<double>(db.size())) > 1e-15) {
      return "support mismatch";
    }
  }
  return "";
}

inline bool clause_true(const sat::Clause& c, unsigned assignment) {
  for (const auto& l : c) {
    if (((assignment >> l.atom) & 1u) == (l.positive ? 1u : 0u)) return true;
  }
  return false;
}

// Exhaustive enumeration over all 2^n assignments.
inline bool truth_table_sat(const std::vector<sat::Clause>& clauses, std::size_t n,
                            const std::vector<sat::Literal>& assumptions) {
  for (unsigned a = 0; a < (1u << n); ++a) {
    bool ok = true;
    for (const auto& l : assumptions) ok = ok && (((a >> l.atom) & 1u) == (l.positive ? 1u : 0u));
    for (const auto& c : clauses) ok = ok && clause_true(c, a);
    if (ok) return true;
  }
  return false;
}

struct RandomInstance {
  sat::ClauseSet cs;
  std::size_t atoms = 0;
};

// Random 1..3-literal clauses over <= 12 atoms with up to 5 assumptions.
inline RandomInstance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_d(1, 12), m_d(1, 40), len_d(1, 3), b_d(0, 1), na_d(0, 5);
  RandomInstance inst;
  const int n = n_d(rng);
  for (int i = 0; i < n; ++i) inst.cs.add_atom("x" + std::to_string(i));
  std::uniform_int_distribution<int> atom_d(0, n - 1);
  const int m = m_d(rng);
  for (int c = 0; c < m; ++c) {
    sat::Clause clause;
    const int len = len_d(rng);
    for (int k = 0; k < len; ++k) clause.push_back({atom_d(rng), b_d(rng) == 1});
    inst.cs.add_clause(clause);
  }
  const int na = std::min(na_d(rng), n);
  std::vector<int> atoms(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) atoms[static_cast<std::size_t>(i)] = i;
  std::shuffle(atoms.begin(), atoms.end(), rng);
  for (int i = 0; i < na; ++i) inst.cs.add_assumption({atoms[static_cast<std::size_t>(i)], b_d(rng) == 1});
  inst.atoms = static_cast<std::size_t>(n);
  return inst;
}

// Returns "" when solve() agrees with the truth table and its core is
// unsatisfiable and minimal.
inline std::string check_sat_instance(const RandomInstance& inst) {
  const auto& cs = inst.cs;
  const bool expected = truth_table_sat(cs.clauses(), inst.atoms, cs.assumptions());
  const auto r = sat::solve(cs);
  if (r.satisfiable != expected) return "verdict differs from truth table";
  if (r.satisfiable) {
    unsigned a = 0;
    for (std::size_t i = 0; i < r.model.size(); ++i) a |= (r.model[i] ? 1u : 0u) << i;
    for (const auto& c : cs.clauses()) {
      if (!clause_true(c, a)) return "model violates a clause";
    }
    for (const auto& l : cs.assumptions()) {
      if (r.model[static_cast<std::size_t>(l.atom)] != l.positive) return "model violates an assumption";
    }
    return "";
  }
  for (const auto& l : r.core) {
    if (std::find(cs.assumptions().begin(), cs.assumptions().end(), l) == cs.assumptions().end()) {
      return "core literal is not an assumption";
    }
  }
  if (truth_table_sat(cs.clauses(), inst.atoms, r.core)) return "core is satisfiable";
  for (std::size_t i = 0; i < r.core.size(); ++i) {
    auto smaller = r.core;
    smaller.erase(smaller.begin() + static_cast<std::ptrdiff_t>(i));
    if (!truth_table_sat(cs.clauses(), inst.atoms, smaller)) return "core is not minimal";
  }
  return "";
}

// All minimal hitting sets with at most max_size members, by exhaustive
// subset enumeration over the universe.
inline std::set<std::set<std::string>> exhaustive_hitting_sets(const std::vector<std::set<std::string>>& conflicts,
                                                               int max_size) {
  std::set<std::string> universe;
  for (const auto& c : conflicts) universe.insert(c.begin(), c.end());
  const std::vector<std::string> u(universe.begin(), universe.end());
  const std::size_t n = u.size();
  std::vector<unsigned> hitting;
  for (unsigned s = 0; s < (1u << n); ++s) {
    bool hits_all = true;
    for (const auto& c : conflicts) {
      bool hit = false;
      for (std::size_t i = 0; i < n; ++i) hit = hit || ((s >> i) & 1u && c.count(u[i]));
      hits_all = hits_all && hit;
    }
    if (hits_all) hitting.push_back(s);
  }
  std::set<std::set<std::string>> out;
  for (unsigned s : hitting) {
    if (__builtin_popcount(s) > max_size) continue;
    bool minimal = true;
    for (unsigned t : hitting) minimal = minimal && !(t != s && (t & s) == t);
    if (!minimal) continue;
    std::set<std::string> hs;
    for (std::size_t i = 0; i < n; ++i) {
      if ((s >> i) & 1u) hs.insert(u[i]);
    }
    out.insert(hs);
  }
  return out;
}

inline std::vector<std::set<std::string>> random_conflicts(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_d(1, 8), m_d(1, 6);
  const int n = n_d(rng);
  std::uniform_int_distribution<int> pick(0, n - 1), size_d(1, std::min(n, 4));
  std::vector<std::set<std::string>> out;
  const int m = m_d(rng);
  for (int i = 0; i < m; ++i) {
    std::set<std::string> c;
    const int size = size_d(rng);
    while (static_cast<int>(c.size()) < size) c.insert(std::string(1, static_cast<char>('a' + pick(rng))));
    out.push_back(c);
  }
  return out;
}

// Minimal unsatisfiable subsets of the assumptions, by checking every subset.
inline std::set<std::set<std::string>> exhaustive_conflicts(const sat::ClauseSet& cs) {
  const auto& a = cs.assumptions();
  const std::size_t m = a.size();
  std::vector<unsigned> unsat;
  for (unsigned s = 0; s < (1u << m); ++s) {
    std::vector<sat::Literal> lits;
    for (std::size_t i = 0; i < m; ++i) {
      if ((s >> i) & 1u) lits.push_back(a[i]);
    }
    if (!truth_table_sat(cs.clauses(), cs.atom_count(), lits)) unsat.push_back(s);
  }
  std::set<std::set<std::string>> out;
  for (unsigned s : unsat) {
    bool minimal = true;
    for (unsigned t : unsat) minimal = minimal && !(t != s && (t & s) == t);
    if (!minimal) continue;
    std::set<std::string> names;
    for (std::size_t i = 0; i < m; ++i) {
      if ((s >> i) & 1u) names.insert(sat::component_of(cs.atom_names()[static_cast<std::size_t>(a[i].atom)]));
    }
    out.insert(names);
  }
  return out;
}

}  // namespace d2d::testing
