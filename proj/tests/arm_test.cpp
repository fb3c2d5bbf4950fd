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

#include "mrefine/arm.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <algorithm>
#include <map>
#include <random>

#include "arm_oracle.hpp"

using namespace mrefine;
using testutil::brute_frequent;
using testutil::brute_rules;
using testutil::flatten_frequent;
using testutil::random_db;

namespace {

Transaction txn(std::initializer_list<Item> items) {
  return {canonical_itemset(Itemset(items))};
}

// The subtraction-function scaling-relation database over the full
// {0..9} x {0..9} grid, built with raw arithmetic: the relation item, the
// function item, and whether (a-b) < (a-b)*k held (k > 1, so it holds
// exactly when a > b).
std::vector<Transaction> sub_scaling_db() {
  std::vector<Transaction> db;
  for (int a = 0; a <= 9; ++a) {
    for (int b = 0; b <= 9; ++b) {
      const char* rel = a < b ? "lt" : (a == b ? "eq" : "gt");
      const bool violated = !((a - b) < (a - b) * 5);
      db.push_back(txn({{"rel", rel},
                        {"func", "SUB"},
                        {"MR2", violated ? "Violated" : "NotViolated"}}));
    }
  }
  return db;
}

std::map<Itemset, Rational> flatten(const FrequentItemsets& frequent) {
  return flatten_frequent(frequent);
}

}  // namespace

TEST_CASE("support") {
  const std::vector<Transaction> db = {
      txn({{"a", "1"}, {"b", "1"}}), txn({{"a", "1"}}),
      txn({{"b", "1"}}), txn({{"c", "1"}})};
  CHECK(support(db, {}) == Rational(1));  // empty itemset in everything
  CHECK(support(db, {{"a", "1"}, {"b", "1"}}) == Rational(1, 4));
  CHECK(support(db, {{"a", "1"}}) == Rational(1, 2));
  CHECK(support(db, {{"z", "9"}}) == Rational(0));

  CHECK(support(sub_scaling_db(), {{"rel", "gt"}}) == Rational(45, 100));
  CHECK(support(sub_scaling_db(), {{"rel", "eq"}}) == Rational(10, 100));
}

TEST_CASE("confidence") {
  const std::vector<Transaction> db = {
      txn({{"a", "1"}, {"b", "1"}}), txn({{"a", "1"}, {"b", "1"}}),
      txn({{"a", "1"}, {"b", "1"}}), txn({{"a", "1"}})};
  CHECK(confidence(db, {{"b", "1"}}, {{"a", "1"}}) == Rational(1));
  CHECK(confidence(db, {{"a", "1"}}, {{"b", "1"}}) == Rational(3, 4));
  CHECK_THROWS_AS(confidence(db, {{"z", "1"}}, {{"a", "1"}}), UsageError);

  // a > b forces the scaled difference to grow.
  CHECK(confidence(sub_scaling_db(), {{"rel", "gt"}, {"func", "SUB"}},
                   {{"MR2", "NotViolated"}}) == Rational(1));
}

TEST_CASE("lift") {
  // Independent items: lift exactly 1.
  const std::vector<Transaction> independent = {
      txn({{"x", "1"}, {"y", "1"}}), txn({{"x", "1"}, {"y", "0"}}),
      txn({{"x", "0"}, {"y", "1"}}), txn({{"x", "0"}, {"y", "0"}})};
  CHECK(lift(independent, {{"x", "1"}}, {{"y", "1"}}) == Rational(1));

  // The two reference renderings: confidence 1 over consequent supports
  // 0.61 and 0.39.
  CHECK((Rational(1) / Rational(61, 100)).fixed(3) == "1.639");
  CHECK((Rational(1) / Rational(39, 100)).fixed(3) == "2.564");

  CHECK_THROWS_AS(
      lift(independent, {{"x", "1"}}, {{"z", "1"}}), UsageError);

  SECTION("lift is 1 exactly when support factorizes") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
      const std::vector<Transaction> db = random_db(rng);
      const Itemset x = {db[0].items[0]};
      const Itemset y = {db.back().items.back()};
      if (x == y || support(db, x).is_zero() || support(db, y).is_zero()) {
        continue;
      }
      Itemset both = x;
      both.insert(both.end(), y.begin(), y.end());
      const bool factorizes =
          support(db, canonical_itemset(both)) == support(db, x) * support(db, y);
      CHECK((lift(db, x, y) == Rational(1)) == factorizes);
    }
  }
}

TEST_CASE("apriori on hand-checked databases") {
  SECTION("single repeated item") {
    const std::vector<Transaction> db = {txn({{"A", "1"}}), txn({{"A", "1"}})};
    const auto frequent = flatten(apriori_frequent(db, Rational(1, 2)));
    REQUIRE(frequent.size() == 1);
    CHECK(frequent.at({{"A", "1"}}) == Rational(1));
  }
  SECTION("four transaction example") {
    const std::vector<Transaction> db = {
        txn({{"A", "1"}, {"B", "1"}}), txn({{"A", "1"}, {"B", "1"}}),
        txn({{"A", "1"}}), txn({{"B", "1"}})};
    const auto frequent = flatten(apriori_frequent(db, Rational(1, 2)));
    REQUIRE(frequent.size() == 3);
    CHECK(frequent.at({{"A", "1"}}) == Rational(3, 4));
    CHECK(frequent.at({{"B", "1"}}) == Rational(3, 4));
    CHECK(frequent.at({{"A", "1"}, {"B", "1"}}) == Rational(1, 2));
  }
  SECTION("sub scaling db at the default threshold") {
    const auto frequent =
        flatten(apriori_frequent(sub_scaling_db(), Rational(1, 5)));
    CHECK(frequent.count({{"MR2", "Violated"}, {"rel", "lt"}}) == 1);
    CHECK(frequent.at({{"MR2", "Violated"}, {"rel", "lt"}}) ==
          Rational(45, 100));
    // The a == b itemset sits at 0.10, below 0.2.
    CHECK(frequent.count({{"MR2", "Violated"}, {"rel", "eq"}}) == 0);
    CHECK(frequent.count({{"rel", "eq"}}) == 0);
  }
  SECTION("threshold bounds validated") {
    const std::vector<Transaction> db = {txn({{"A", "1"}})};
    CHECK_THROWS_AS(apriori_frequent(db, Rational(0)), UsageError);
    CHECK_THROWS_AS(apriori_frequent(db, Rational(3, 2)), UsageError);
    CHECK_THROWS_AS(apriori_frequent({}, Rational(1, 2)), UsageError);
  }
}

TEST_CASE("downward closure holds on mined levels") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<Transaction> db = random_db(rng);
    const Rational min_support(1 + static_cast<int>(rng() % 4), 10);
    const auto frequent = apriori_frequent(db, min_support);
    const auto flat = flatten(frequent);
    for (const auto& [itemset, sup] : flat) {
      for (std::size_t drop = 0; drop < itemset.size(); ++drop) {
        if (itemset.size() == 1) continue;
        Itemset sub;
        for (std::size_t i = 0; i < itemset.size(); ++i) {
          if (i != drop) sub.push_back(itemset[i]);
        }
        REQUIRE(flat.count(sub) == 1);
        CHECK(flat.at(sub) >= sup);
      }
    }
  }
}

TEST_CASE("rule derivation on hand-checked databases") {
  SECTION("certain implication") {
    const std::vector<Transaction> db = {
        txn({{"A", "1"}, {"B", "1"}}), txn({{"A", "1"}, {"B", "1"}}),
        txn({{"C", "1"}}), txn({{"C", "1"}})};
    const auto rules = derive_rules(apriori_frequent(db, Rational(1, 2)),
                                    Rational(1), {"B"});
    REQUIRE(rules.size() == 1);
    CHECK(rules[0].lhs == Itemset{{"A", "1"}});
    CHECK(rules[0].rhs == Itemset{{"B", "1"}});
    CHECK(rules[0].support == Rational(1, 2));
    CHECK(rules[0].confidence == Rational(1));
    CHECK(rules[0].lift == Rational(2));
  }

  SECTION("sub scaling db yields exactly the two relation rules") {
    const auto rules = derive_rules(
        apriori_frequent(sub_scaling_db(), Rational(1, 5)), Rational(1),
        {"MR2"});
    REQUIRE(rules.size() == 2);
    CHECK(rules[0].lhs == Itemset{{"func", "SUB"}, {"rel", "gt"}});
    CHECK(rules[0].rhs == Itemset{{"MR2", "NotViolated"}});
    CHECK(rules[0].support == Rational(45, 100));
    CHECK(rules[0].confidence == Rational(1));
    CHECK(rules[0].lift == Rational(1) / Rational(45, 100));
    CHECK(rules[1].lhs == Itemset{{"func", "SUB"}, {"rel", "lt"}});
    CHECK(rules[1].rhs == Itemset{{"MR2", "Violated"}});
    CHECK(rules[1].support == Rational(45, 100));
    CHECK(rules[1].lift == Rational(1) / Rational(55, 100));
  }

  SECTION("one counterexample kills an exact-confidence rule") {
    std::vector<Transaction> db(9, txn({{"A", "1"}, {"B", "1"}}));
    const auto exact = derive_rules(apriori_frequent(db, Rational(1, 10)),
                                    Rational(1), {"B"});
    CHECK(exact.size() == 1);
    db.push_back(txn({{"A", "1"}, {"B", "0"}}));
    const auto broken = derive_rules(apriori_frequent(db, Rational(1, 10)),
                                     Rational(1), {"B"});
    for (const AssociationRule& r : broken) {
      CHECK(r.lhs != Itemset{{"A", "1"}});
    }
  }

  SECTION("rule metric invariants") {
    const auto rules = derive_rules(
        apriori_frequent(sub_scaling_db(), Rational(1, 10)), Rational(1, 2),
        {"MR2"});
    for (const AssociationRule& r : rules) {
      CHECK(r.support <= r.confidence);
      CHECK(r.confidence <= Rational(1));
      CHECK(r.support > Rational(0));
      Itemset overlap;
      std::set_intersection(r.lhs.begin(), r.lhs.end(), r.rhs.begin(),
                            r.rhs.end(), std::back_inserter(overlap));
      CHECK(overlap.empty());
    }
  }
}

TEST_CASE("oracle equivalence on randomized databases") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    const std::vector<Transaction> db = random_db(rng);
    const Rational min_support(1 + static_cast<int>(rng() % 3), 10);
    const Rational min_confidence(static_cast<int>(rng() % 2) + 1, 2);

    const auto frequent = apriori_frequent(db, min_support);
    CHECK(flatten(frequent) == brute_frequent(db, min_support));

    const auto rules = derive_rules(frequent, min_confidence, {"Y"});
    const auto expected = brute_rules(db, min_support, min_confidence, {"Y"});
    CHECK(rules == expected);
  }
}
