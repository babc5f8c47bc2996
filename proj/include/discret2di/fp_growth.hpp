#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "discret2di/error.hpp"

namespace d2d {

template <typename Item>
struct FrequentItemset {
  std::vector<Item> items;  // ascending
  std::size_t count = 0;
  double support = 0.0;

  bool operator==(const FrequentItemset&) const = default;
};

template <typename Item>
using WeightedTransactions = std::vector<std::pair<std::vector<Item>, std::size_t>>;

// Prefix tree over transactions whose items are sorted by descending global
// frequency (ties by ascending item). Infrequent items are dropped.
template <typename Item>
class FpTree {
 public:
  struct Node {
    Item item{};
    std::size_t count = 0;
    int parent = -1;
    int next = -1;  // next node carrying the same item
    std::map<Item, int> children;
  };

  struct HeaderEntry {
    Item item{};
    std::size_t count = 0;  // global support count
    int head = -1;
  };

  FpTree(const WeightedTransactions<Item>& transactions, std::size_t min_count) {
    std::map<Item, std::size_t> counts;
    for (const auto& [items, weight] : transactions) {
      for (const auto& it : items) counts[it] += weight;
    }
    for (const auto& [item, count] : counts) {
      if (count >= min_count) header_.push_back({item, count, -1});
    }
    std::stable_sort(header_.begin(), header_.end(), [](const HeaderEntry& a, const HeaderEntry& b) {
      return a.count > b.count;
    });
    for (std::size_t i = 0; i < header_.size(); ++i) rank_[header_[i].item] = i;

    nodes_.push_back(Node{});  // root
    std::vector<int> tails(header_.size(), -1);
    for (const auto& [items, weight] : transactions) {
      std::vector<Item> path;
      for (const auto& it : items) {
        if (rank_.count(it)) path.push_back(it);
      }
      std::sort(path.begin(), path.end(), [this](const Item& a, const Item& b) { return rank_.at(a) < rank_.at(b); });
      path.erase(std::unique(path.begin(), path.end()), path.end());
      int cur = 0;
      for (const auto& it : path) {
        auto found = nodes_[static_cast<std::size_t>(cur)].children.find(it);
        if (found == nodes_[static_cast<std::size_t>(cur)].children.end()) {
          const int idx = static_cast<int>(nodes_.size());
          nodes_.push_back(Node{it, 0, cur, -1, {}});
          nodes_[static_cast<std::size_t>(cur)].children.emplace(it, idx);
          const std::size_t r = rank_.at(it);
          if (tails[r] < 0) header_[r].head = idx; else nodes_[static_cast<std::size_t>(tails[r])].next = idx;
          tails[r] = idx;
          cur = idx;
        } else {
          cur = found->second;
        }
        nodes_[static_cast<std::size_t>(cur)].count += weight;
      }
    }
  }

  const std::vector<HeaderEntry>& header() const { return header_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t node_count() const { return nodes_.size() - 1; }

  // Sum of the counts along an item's node chain.
  std::size_t chain_count(const Item& item) const {
    auto r = rank_.find(item);
    if (r == rank_.end()) return 0;
    std::size_t total = 0;
    for (int n = header_[r->second].head; n >= 0; n = nodes_[static_cast<std::size_t>(n)].next) {
      total += nodes_[static_cast<std::size_t>(n)].count;
    }
    return total;
  }

  // Prefix paths leading to each occurrence of the header entry `index`.
  WeightedTransactions<Item> conditional_pattern_base(std::size_t index) const {
    WeightedTransactions<Item> base;
    for (int n = header_[index].head; n >= 0; n = nodes_[static_cast<std::size_t>(n)].next) {
      std::vector<Item> prefix;
      for (int p = nodes_[static_cast<std::size_t>(n)].parent; p > 0; p = nodes_[static_cast<std::size_t>(p)].parent) {
        prefix.push_back(nodes_[static_cast<std::size_t>(p)].item);
      }
      if (!prefix.empty()) base.emplace_back(std::move(prefix), nodes_[static_cast<std::size_t>(n)].count);
    }
    return base;
  }

 private:
  std::vector<HeaderEntry> header_;
  std::map<Item, std::size_t> rank_;
  std::vector<Node> nodes_;
};

namespace detail {

template <typename Item>
void fp_mine(const WeightedTransactions<Item>& transactions, std::size_t min_count,
             const std::vector<Item>& suffix, std::vector<FrequentItemset<Item>>& out) {
  FpTree<Item> tree(transactions, min_count);
  for (std::size_t i = tree.header().size(); i-- > 0;) {
    const auto& entry = tree.header()[i];
    std::vector<Item> itemset = suffix;
    itemset.push_back(entry.item);
    out.push_back({itemset, entry.count, 0.0});
    auto base = tree.conditional_pattern_base(i);
    if (!base.empty()) fp_mine(base, min_count, itemset, out);
  }
}

}  // namespace detail

// Every itemset whose support (count / N) is at least `min_support`.
// Results are sorted by size, then lexicographically.
template <typename Item>
std::vector<FrequentItemset<Item>> fp_growth(const std::vector<std::vector<Item>>& transactions,
                                             double min_support) {
  if (!(min_support > 0.0 && min_support <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "min_support must lie in (0, 1]");
  }
  std::vector<FrequentItemset<Item>> out;
  if (transactions.empty()) return out;
  const double n = static_cast<double>(transactions.size());
  const auto min_count = static_cast<std::size_t>(std::max(1.0, std::ceil(min_support * n - 1e-9)));

  WeightedTransactions<Item> weighted;
  weighted.reserve(transactions.size());
  for (const auto& t : transactions) {
    std::vector<Item> items = t;  // a transaction is a set
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    weighted.emplace_back(std::move(items), 1);
  }
  detail::fp_mine(weighted, min_count, {}, out);

  for (auto& fi : out) {
    std::sort(fi.items.begin(), fi.items.end());
    fi.support = static_cast<double>(fi.count) / n;
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.items.size() != b.items.size()) return a.items.size() < b.items.size();
    return a.items < b.items;
  });
  return out;
}

}  // namespace d2d
