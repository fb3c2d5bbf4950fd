// Copyright 2026 The mrefine Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Association rule mining. Level-wise Apriori over categorical
// transactions: frequent itemsets are enumerated completely (candidates of
// size n+1 joined from frequent size-n sets, pruned by downward closure),
// then rules are derived with single-item consequents restricted to a set
// of attribute keys. Support, confidence and lift are exact rationals.
//
// Rule derivation collapses extensionally equal rules: when several rules
// share consequent, support and confidence and their antecedents are
// nested, they hold on exactly the same transactions and only the most
// specific antecedent is kept. On a per-function database this is what
// keeps one rule per finding instead of a func-less twin of each.

#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mrefine/common.hpp"
#include "mrefine/rational.hpp"

namespace mrefine {

struct Item {
  std::string key;
  std::string value;

  auto operator<=>(const Item&) const = default;

  std::string str() const { return key + ":" + value; }

  static Item parse(std::string_view token) {
    const std::size_t colon = token.find(':');
    if (colon == std::string_view::npos || colon == 0 ||
        colon + 1 == token.size()) {
      throw UsageError("malformed item token '" + std::string(token) + "'");
    }
    return {std::string(token.substr(0, colon)),
            std::string(token.substr(colon + 1))};
  }
};

// Canonical form: sorted, unique, at most one value per key.
using Itemset = std::vector<Item>;

// Sort + dedupe only; a two-values-per-key itemset is representable (it
// simply occurs in no well-formed transaction).
inline Itemset sorted_itemset(Itemset items) {
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  return items;
}

inline Itemset canonical_itemset(Itemset items) {
  items = sorted_itemset(std::move(items));
  for (std::size_t i = 1; i < items.size(); ++i) {
    if (items[i].key == items[i - 1].key) {
      throw UsageError("itemset has two values for key '" + items[i].key +
                       "'");
    }
  }
  return items;
}

inline std::string itemset_str(const Itemset& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i != 0) out += ',';
    out += items[i].str();
  }
  return out;
}

// a subset-of b, both sorted.
inline bool itemset_subset(const Itemset& a, const Itemset& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

struct Transaction {
  Itemset items;  // canonical
};

/// Fraction of transactions containing every item of s. The empty itemset
/// is contained in everything. Accepts itemsets in any order.
inline Rational support(const std::vector<Transaction>& db, const Itemset& s) {
  if (db.empty()) throw UsageError("transaction database is empty");
  const Itemset needle = sorted_itemset(s);
  std::uint64_t hits = 0;
  for (const Transaction& t : db) {
    if (itemset_subset(needle, t.items)) ++hits;
  }
  return Rational::ratio(hits, db.size());
}

/// P(y | x) as an exact rational. Undefined when x never occurs.
inline Rational confidence(const std::vector<Transaction>& db,
                           const Itemset& x, const Itemset& y) {
  const Rational sup_x = support(db, x);
  if (sup_x.is_zero()) {
    throw UsageError("confidence undefined: antecedent has zero support");
  }
  Itemset both = x;
  both.insert(both.end(), y.begin(), y.end());
  return support(db, both) / sup_x;
}

/// confidence(x -> y) / support(y); 1 means x and y are independent.
inline Rational lift(const std::vector<Transaction>& db, const Itemset& x,
                     const Itemset& y) {
  const Rational sup_y = support(db, y);
  if (sup_y.is_zero()) {
    throw UsageError("lift undefined: consequent has zero support");
  }
  return confidence(db, x, y) / sup_y;
}

struct FrequentItemsets {
  // size -> lexicographically ordered (itemset, support)
  std::map<std::size_t, std::vector<std::pair<Itemset, Rational>>> levels;
  std::map<Itemset, Rational> index;

  std::optional<Rational> support_of(const Itemset& s) const {
    const auto it = index.find(s);
    if (it == index.end()) return std::nullopt;
    return it->second;
  }
};

namespace detail {

// Internal integer encoding of one database: items interned to dense ids in
// Item order, transactions as sorted id vectors.
struct EncodedDb {
  std::vector<Item> items;                    // id -> item
  std::vector<std::vector<int>> transactions;  // sorted ids
};

inline EncodedDb encode_db(const std::vector<Transaction>& db) {
  std::set<Item> universe;
  for (const Transaction& t : db) {
    for (const Item& item : t.items) universe.insert(item);
  }
  EncodedDb enc;
  enc.items.assign(universe.begin(), universe.end());
  std::map<Item, int> ids;
  for (std::size_t i = 0; i < enc.items.size(); ++i) {
    ids[enc.items[i]] = static_cast<int>(i);
  }
  enc.transactions.reserve(db.size());
  for (const Transaction& t : db) {
    std::vector<int> row;
    row.reserve(t.items.size());
    for (const Item& item : t.items) row.push_back(ids.at(item));
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    enc.transactions.push_back(std::move(row));
  }
  return enc;
}

inline std::uint64_t count_support(const std::vector<std::vector<int>>& txns,
                                   const std::vector<int>& candidate) {
  std::uint64_t hits = 0;
  for (const std::vector<int>& t : txns) {
    if (std::includes(t.begin(), t.end(), candidate.begin(), candidate.end())) {
      ++hits;
    }
  }
  return hits;
}

}  // namespace detail

/// Complete level-wise frequent itemset enumeration. Frequency is
/// support >= min_support, compared exactly.
inline FrequentItemsets apriori_frequent(const std::vector<Transaction>& db,
                                         const Rational& min_support) {
  if (db.empty()) throw UsageError("transaction database is empty");
  if (min_support <= Rational(0) || min_support > Rational(1)) {
    throw UsageError("min_support must be in (0, 1]");
  }
  const detail::EncodedDb enc = detail::encode_db(db);
  const std::uint64_t n = enc.transactions.size();

  const auto frequent = [&](std::uint64_t hits) {
    return Rational::ratio(hits, n) >= min_support;
  };

  FrequentItemsets out;

  // Level 1.
  std::vector<std::vector<int>> level;
  std::vector<std::uint64_t> level_hits;
  {
    std::vector<std::uint64_t> counts(enc.items.size(), 0);
    for (const std::vector<int>& t : enc.transactions) {
      for (int id : t) ++counts[static_cast<std::size_t>(id)];
    }
    for (std::size_t id = 0; id < counts.size(); ++id) {
      if (frequent(counts[id])) {
        level.push_back({static_cast<int>(id)});
        level_hits.push_back(counts[id]);
      }
    }
  }

  std::size_t size = 1;
  while (!level.empty()) {
    std::set<std::vector<int>> level_set(level.begin(), level.end());
    auto& slot = out.levels[size];
    for (std::size_t i = 0; i < level.size(); ++i) {
      Itemset items;
      for (int id : level[i]) items.push_back(enc.items[static_cast<std::size_t>(id)]);
      const Rational sup = Rational::ratio(level_hits[i], n);
      slot.emplace_back(items, sup);
      out.index.emplace(std::move(items), sup);
    }
    std::sort(slot.begin(), slot.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    // Join step: pairs sharing the first size-1 ids.
    std::vector<std::vector<int>> candidates;
    for (std::size_t i = 0; i < level.size(); ++i) {
      for (std::size_t j = i + 1; j < level.size(); ++j) {
        if (!std::equal(level[i].begin(), level[i].end() - 1,
                        level[j].begin(), level[j].end() - 1)) {
          continue;
        }
        std::vector<int> cand = level[i];
        cand.push_back(level[j].back());
        if (cand[cand.size() - 2] > cand.back()) {
          std::swap(cand[cand.size() - 2], cand.back());
        }
        // Prune: every size-subset obtained by dropping one element must be
        // frequent (downward closure).
        bool keep = true;
        for (std::size_t drop = 0; keep && drop < cand.size(); ++drop) {
          std::vector<int> sub;
          sub.reserve(cand.size() - 1);
          for (std::size_t k = 0; k < cand.size(); ++k) {
            if (k != drop) sub.push_back(cand[k]);
          }
          keep = level_set.count(sub) != 0;
        }
        if (keep) candidates.push_back(std::move(cand));
      }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()),
                     candidates.end());

    std::vector<std::vector<int>> next_level;
    std::vector<std::uint64_t> next_hits;
    for (std::vector<int>& cand : candidates) {
      const std::uint64_t hits = detail::count_support(enc.transactions, cand);
      if (frequent(hits)) {
        next_level.push_back(std::move(cand));
        next_hits.push_back(hits);
      }
    }
    level = std::move(next_level);
    level_hits = std::move(next_hits);
    ++size;
  }
  return out;
}

struct AssociationRule {
  Itemset lhs;
  Itemset rhs;  // single item by construction
  Rational support;
  Rational confidence;
  Rational lift;

  friend bool operator==(const AssociationRule&,
                         const AssociationRule&) = default;
};

/// Derives rules from the frequent itemsets: every split with a single-item
/// consequent whose key is in rhs_keys and confidence >= min_confidence.
/// Extensionally equal rules are collapsed to the most specific antecedent;
/// output is ordered by descending support, then lexicographic lhs, rhs.
inline std::vector<AssociationRule> derive_rules(
    const FrequentItemsets& frequent, const Rational& min_confidence,
    const std::set<std::string>& rhs_keys) {
  if (min_confidence <= Rational(0) || min_confidence > Rational(1)) {
    throw UsageError("min_confidence must be in (0, 1]");
  }
  std::vector<AssociationRule> rules;
  for (const auto& [size, sets] : frequent.levels) {
    if (size < 2) continue;
    for (const auto& [itemset, sup] : sets) {
      for (const Item& rhs_item : itemset) {
        if (rhs_keys.count(rhs_item.key) == 0) continue;
        Itemset lhs;
        lhs.reserve(itemset.size() - 1);
        for (const Item& item : itemset) {
          if (!(item == rhs_item)) lhs.push_back(item);
        }
        const std::optional<Rational> lhs_sup = frequent.support_of(lhs);
        const std::optional<Rational> rhs_sup =
            frequent.support_of(Itemset{rhs_item});
        if (!lhs_sup.has_value() || !rhs_sup.has_value()) {
          // Unreachable for a closure-complete enumeration.
          throw Error("frequent itemset with an infrequent subset");
        }
        const Rational conf = sup / *lhs_sup;
        if (conf < min_confidence) continue;
        rules.push_back({std::move(lhs),
                         Itemset{rhs_item},
                         sup,
                         conf,
                         conf / *rhs_sup});
      }
    }
  }

  // Collapse: drop a rule whose lhs is a strict subset of another rule with
  // the same rhs, support and confidence (same extension, less specific).
  std::vector<AssociationRule> kept;
  for (const AssociationRule& r : rules) {
    bool subsumed = false;
    for (const AssociationRule& other : rules) {
      if (&other == &r) continue;
      if (other.rhs == r.rhs && other.support == r.support &&
          other.confidence == r.confidence && r.lhs != other.lhs &&
          itemset_subset(r.lhs, other.lhs)) {
        subsumed = true;
        break;
      }
    }
    if (!subsumed) kept.push_back(r);
  }

  std::sort(kept.begin(), kept.end(),
            [](const AssociationRule& a, const AssociationRule& b) {
              if (a.support != b.support) return a.support > b.support;
              if (a.lhs != b.lhs) return a.lhs < b.lhs;
              return a.rhs < b.rhs;
            });
  return kept;
}

}  // namespace mrefine
