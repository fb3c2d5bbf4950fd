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

// Rule refinement and phase-II suite generation. Encodes execution records
// into categorical transactions (pair relation lt/eq/gt, zero flags), mines
// every Mixed (function, MR) cell with its own per-function database,
// merges mined rules with reviewer decisions into a final refined rule set,
// and emits a regression suite manifest with concrete inputs per rule.

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrefine/analyser.hpp"
#include "mrefine/arm.hpp"
#include "mrefine/common.hpp"
#include "mrefine/harness.hpp"
#include "mrefine/manifest.hpp"
#include "mrefine/mr.hpp"
#include "mrefine/rational.hpp"
#include "mrefine/tdg.hpp"

namespace mrefine {

inline std::string function_item_value(const std::string& function) {
  std::string out = function;
  for (char& c : out) c = static_cast<char>(std::toupper(c));
  return out;
}

struct FeatureEncoder {
  bool pair_relation = true;
  bool zero_flags = true;

  Itemset encode_features(Value a, Value b) const {
    Itemset out;
    if (pair_relation) {
      out.push_back({"rel", a < b ? "lt" : (a == b ? "eq" : "gt")});
    }
    if (zero_flags) {
      out.push_back({"a_zero", a == 0 ? "true" : "false"});
      out.push_back({"b_zero", b == 0 ? "true" : "false"});
      out.push_back({"both_zero", a == 0 && b == 0 ? "true" : "false"});
    }
    return out;
  }

  std::string descriptor() const {
    std::vector<std::string> parts;
    if (pair_relation) parts.push_back("rel");
    if (zero_flags) parts.push_back("zero");
    return join(parts, ",");
  }

  static FeatureEncoder parse(std::string_view csv) {
    FeatureEncoder enc{false, false};
    for (const std::string& part : split(csv, ',')) {
      const std::string_view token = trim(part);
      if (token == "rel") {
        enc.pair_relation = true;
      } else if (token == "zero") {
        enc.zero_flags = true;
      } else if (!token.empty()) {
        throw UsageError("unknown feature '" + std::string(token) +
                         "' (known: rel, zero)");
      }
    }
    if (!enc.pair_relation && !enc.zero_flags) {
      throw UsageError("feature set is empty (need at least one of rel, zero)");
    }
    return enc;
  }

  /// Evaluates a single condition item against an input pair. Function
  /// items are matched against `function`.
  static bool item_holds(const Item& item, const std::string& function,
                         Value a, Value b) {
    if (item.key == "func") {
      return item.value == function_item_value(function);
    }
    if (item.key == "rel") {
      const std::string_view actual = a < b ? "lt" : (a == b ? "eq" : "gt");
      return item.value == actual;
    }
    const auto flag = [&](bool truth) {
      return item.value == (truth ? "true" : "false");
    };
    if (item.key == "a_zero") return flag(a == 0);
    if (item.key == "b_zero") return flag(b == 0);
    if (item.key == "both_zero") return flag(a == 0 && b == 0);
    throw UsageError("cannot evaluate condition item '" + item.str() + "'");
  }

  static bool condition_holds(const Itemset& condition,
                              const std::string& function, Value a, Value b) {
    for (const Item& item : condition) {
      if (!item_holds(item, function, a, b)) return false;
    }
    return true;
  }
};

/// One transaction per record: encoder features of (a, b), the function
/// item, and the record's verdict for the given MR.
inline std::vector<Transaction> encode(std::span<const ExecutionRecord> records,
                                       std::size_t mr_index,
                                       const std::string& mr_id,
                                       const FeatureEncoder& encoder) {
  std::vector<Transaction> db;
  db.reserve(records.size());
  for (const ExecutionRecord& rec : records) {
    Itemset items = encoder.encode_features(rec.a, rec.b);
    items.push_back({"func", function_item_value(rec.function)});
    items.push_back(
        {mr_id,
         std::string(verdict_item_token(rec.outcomes.at(mr_index).verdict))});
    db.push_back({canonical_itemset(std::move(items))});
  }
  return db;
}

inline std::vector<Transaction> encode(const CleanLog& clean,
                                       const std::string& mr_id,
                                       const FeatureEncoder& encoder) {
  for (std::size_t m = 0; m < clean.mrs.size(); ++m) {
    if (clean.mrs[m].id == mr_id) {
      return encode(clean.records, m, mr_id, encoder);
    }
  }
  throw UsageError("MR '" + mr_id + "' is not part of this campaign");
}

struct MinedRule {
  std::string function;  // lowercase SUT function name
  std::string mr;
  AssociationRule rule;
};

/// Mines every Mixed cell that is not excluded. Each (function, MR) cell
/// gets its own transaction database so supports are cell-local and the
/// consequent is unambiguous; the function item still appears in every
/// antecedent.
inline std::vector<MinedRule> mine_all(
    const CleanLog& clean, const std::vector<FeedbackDecision>& decisions,
    const FeatureEncoder& encoder, const Rational& min_support,
    const Rational& min_confidence) {
  std::vector<MinedRule> out;
  for (const FeedbackDecision& d : decisions) {
    if (d.classification != Classification::Mixed) continue;
    if (d.include_as == IncludeAs::Exclude) continue;
    std::size_t mr_index = clean.mrs.size();
    for (std::size_t m = 0; m < clean.mrs.size(); ++m) {
      if (clean.mrs[m].id == d.mr) mr_index = m;
    }
    if (mr_index == clean.mrs.size()) {
      throw UsageError("decision references MR '" + d.mr +
                       "' outside the campaign MR set");
    }
    std::vector<ExecutionRecord> cell_records;
    for (const ExecutionRecord& rec : clean.records) {
      if (rec.function == d.function) cell_records.push_back(rec);
    }
    if (cell_records.empty()) continue;
    const std::vector<Transaction> db =
        encode(cell_records, mr_index, d.mr, encoder);
    const FrequentItemsets frequent = apriori_frequent(db, min_support);
    for (AssociationRule& rule :
         derive_rules(frequent, min_confidence, {d.mr})) {
      // Every emitted antecedent names its function; the collapse already
      // keeps the func-qualified form, this pins the invariant.
      Itemset lhs = rule.lhs;
      lhs.push_back({"func", function_item_value(d.function)});
      rule.lhs = canonical_itemset(std::move(lhs));
      out.push_back({d.function, d.mr, std::move(rule)});
    }
  }
  return out;
}

enum class Polarity { PositiveTest, NegativeTest };

inline std::string_view to_token(Polarity p) {
  return p == Polarity::PositiveTest ? "positive" : "negative";
}

inline Polarity polarity_from(std::string_view token) {
  if (token == "positive") return Polarity::PositiveTest;
  if (token == "negative") return Polarity::NegativeTest;
  throw UsageError("unknown polarity '" + std::string(token) + "'");
}

struct RuleStats {
  Rational support;
  Rational confidence;
  Rational lift;
  friend bool operator==(const RuleStats&, const RuleStats&) = default;
};

struct RefinedRule {
  enum class Provenance { Feedback, Mined };

  Itemset condition;  // includes the func item
  std::string function;
  std::string mr;
  Polarity polarity = Polarity::PositiveTest;
  Provenance provenance = Provenance::Feedback;
  std::optional<RuleStats> stats;  // mined rules only
  bool advisory = false;           // mined with confidence < 1
};

inline std::string_view to_token(RefinedRule::Provenance p) {
  return p == RefinedRule::Provenance::Feedback ? "feedback" : "mined";
}

namespace detail {

// Negation of one mined condition, used to guard a reviewer-accepted
// positive (or negative) rule on a Mixed cell against the inputs claimed by
// opposite-polarity mined rules. Any single negated item of a conjunctive
// condition excludes that condition's whole extension; pick the tightest
// deterministic choice. Boolean flags negate in place; a pair-relation item
// expands to the two alternative relations.
inline std::vector<Itemset> negate_condition(const Itemset& features) {
  static const std::vector<std::string> kBoolPreference = {
      "both_zero", "a_zero", "b_zero"};
  for (const std::string& key : kBoolPreference) {
    for (const Item& item : features) {
      if (item.key == key && item.value == "true") {
        return {{{item.key, "false"}}};
      }
    }
  }
  for (const Item& item : features) {
    if (item.value == "true" || item.value == "false") {
      return {{{item.key, item.value == "true" ? "false" : "true"}}};
    }
  }
  for (const Item& item : features) {
    if (item.key == "rel") {
      static const std::vector<std::string> kRelValues = {"lt", "eq", "gt"};
      std::vector<Itemset> out;
      for (const std::string& v : kRelValues) {
        if (v != item.value) out.push_back({{item.key, v}});
      }
      return out;
    }
  }
  return {};
}

inline Itemset features_only(const Itemset& condition) {
  Itemset out;
  for (const Item& item : condition) {
    if (item.key != "func") out.push_back(item);
  }
  return out;
}

// Merge guard items into branches; a key conflict kills the branch.
inline std::vector<Itemset> cross_guards(const std::vector<Itemset>& branches,
                                         const std::vector<Itemset>& options) {
  std::vector<Itemset> out;
  for (const Itemset& branch : branches) {
    for (const Itemset& option : options) {
      Itemset merged = branch;
      bool ok = true;
      for (const Item& item : option) {
        bool duplicate = false;
        for (const Item& existing : merged) {
          if (existing.key == item.key) {
            duplicate = true;
            ok = existing.value == item.value;
            break;
          }
        }
        if (!ok) break;
        if (!duplicate) merged.push_back(item);
      }
      if (ok) out.push_back(canonical_itemset(std::move(merged)));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  constexpr std::size_t kMaxGuardBranches = 8;
  if (out.size() > kMaxGuardBranches) out.resize(kMaxGuardBranches);
  return out;
}

}  // namespace detail

struct FinalizeResult {
  std::vector<RefinedRule> rules;
  std::vector<std::string> warnings;
};

/// Merges mined rules with reviewer decisions into the final rule set.
///
///  - FullMatch cells: unconditional positive feedback rule.
///  - NoMatch cells: unconditional negative feedback rule.
///  - Mixed cells: their mined rules, polarity from the consequent. An
///    explicit include_as also emits a feedback rule guarded by the
///    negation of the cell's opposite-polarity mined conditions.
///  - include_as = exclude drops the cell entirely.
///
/// Duplicates (same condition, MR, polarity) merge keeping feedback
/// provenance. Output order is canonical, independent of input order.
inline FinalizeResult finalize_rules(
    const std::vector<MinedRule>& mined,
    const std::vector<FeedbackDecision>& decisions) {
  if (const std::optional<std::string> cell = blocked_cell(decisions)) {
    throw BlockedError("campaign is blocked by a fault decision on " + *cell +
                       "; rerun phase I after fixing the SUT");
  }

  FinalizeResult result;
  std::vector<RefinedRule> rules;

  const auto cell_excluded = [&](const std::string& function,
                                 const std::string& mr) {
    for (const FeedbackDecision& d : decisions) {
      if (d.function == function && d.mr == mr) {
        return d.include_as == IncludeAs::Exclude;
      }
    }
    return false;
  };

  for (const FeedbackDecision& d : decisions) {
    if (d.include_as == IncludeAs::Exclude) continue;
    const Itemset func_only =
        canonical_itemset({{"func", function_item_value(d.function)}});
    if (d.classification == Classification::FullMatch ||
        d.classification == Classification::NoMatch) {
      RefinedRule rule;
      rule.condition = func_only;
      rule.function = d.function;
      rule.mr = d.mr;
      rule.polarity = d.include_as == IncludeAs::NegativeTest ||
                              (!d.include_as.has_value() &&
                               d.classification == Classification::NoMatch)
                          ? Polarity::NegativeTest
                          : Polarity::PositiveTest;
      rule.provenance = RefinedRule::Provenance::Feedback;
      rules.push_back(std::move(rule));
      continue;
    }
    if (d.classification == Classification::Mixed && d.include_as.has_value()) {
      // Reviewer accepted a mixed cell; guard the feedback rule against the
      // inputs covered by opposite-polarity mined rules.
      const Polarity polarity = *d.include_as == IncludeAs::PositiveTest
                                    ? Polarity::PositiveTest
                                    : Polarity::NegativeTest;
      const Verdict opposite = polarity == Polarity::PositiveTest
                                   ? Verdict::Violated
                                   : Verdict::NotViolated;
      std::vector<Itemset> branches = {{}};
      bool guarded = true;
      for (const MinedRule& m : mined) {
        if (m.function != d.function || m.mr != d.mr) continue;
        if (m.rule.rhs.size() != 1 ||
            m.rule.rhs[0].value != verdict_item_token(opposite)) {
          continue;
        }
        const std::vector<Itemset> options =
            detail::negate_condition(detail::features_only(m.rule.lhs));
        if (options.empty()) {
          guarded = false;
          break;
        }
        branches = detail::cross_guards(branches, options);
        if (branches.empty()) {
          guarded = false;
          break;
        }
      }
      if (!guarded) {
        result.warnings.push_back(
            "cell " + d.function + "." + d.mr + ": cannot build a guard from "
            "the mined opposite rules; reviewer rule skipped");
        continue;
      }
      for (const Itemset& guard : branches) {
        RefinedRule rule;
        Itemset condition = guard;
        condition.push_back({"func", function_item_value(d.function)});
        rule.condition = canonical_itemset(std::move(condition));
        rule.function = d.function;
        rule.mr = d.mr;
        rule.polarity = polarity;
        rule.provenance = RefinedRule::Provenance::Feedback;
        rules.push_back(std::move(rule));
      }
    }
  }

  for (const MinedRule& m : mined) {
    if (cell_excluded(m.function, m.mr)) continue;
    if (m.rule.rhs.size() != 1) {
      throw Error("mined rule with a non-singleton consequent");
    }
    RefinedRule rule;
    rule.condition = m.rule.lhs;
    rule.function = m.function;
    rule.mr = m.mr;
    rule.polarity = m.rule.rhs[0].value == verdict_item_token(Verdict::Violated)
                        ? Polarity::NegativeTest
                        : Polarity::PositiveTest;
    rule.provenance = RefinedRule::Provenance::Mined;
    rule.stats = RuleStats{m.rule.support, m.rule.confidence, m.rule.lift};
    rule.advisory = m.rule.confidence < Rational(1);
    rules.push_back(std::move(rule));
  }

  // Canonical order, then merge duplicates keeping feedback provenance
  // (feedback sorts first).
  std::sort(rules.begin(), rules.end(),
            [](const RefinedRule& a, const RefinedRule& b) {
              if (a.provenance != b.provenance) {
                return a.provenance == RefinedRule::Provenance::Feedback;
              }
              if (a.function != b.function) return a.function < b.function;
              if (a.mr != b.mr) return a.mr < b.mr;
              if (a.condition != b.condition) return a.condition < b.condition;
              return static_cast<int>(a.polarity) <
                     static_cast<int>(b.polarity);
            });
  for (const RefinedRule& rule : rules) {
    bool duplicate = false;
    for (const RefinedRule& kept : result.rules) {
      if (kept.mr == rule.mr && kept.polarity == rule.polarity &&
          kept.condition == rule.condition) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) result.rules.push_back(rule);
  }
  return result;
}

inline std::string rule_rhs_token(const RefinedRule& rule) {
  return rule.mr + ":" +
         std::string(verdict_item_token(rule.polarity == Polarity::NegativeTest
                                            ? Verdict::Violated
                                            : Verdict::NotViolated));
}

/// Counts log counterexamples per rule: inputs satisfying the condition
/// whose verdict contradicts the rule's polarity. Mined confidence-1 rules
/// have none by construction; reviewer-accepted rules on mixed cells can,
/// when the mining thresholds hid part of the violating inputs from the
/// guard. One warning line per offending rule.
inline std::vector<std::string> validate_rules_against_log(
    const std::vector<RefinedRule>& rules, const CleanLog& clean) {
  std::vector<std::string> warnings;
  for (const RefinedRule& rule : rules) {
    std::size_t mr_index = clean.mrs.size();
    for (std::size_t m = 0; m < clean.mrs.size(); ++m) {
      if (clean.mrs[m].id == rule.mr) mr_index = m;
    }
    if (mr_index == clean.mrs.size()) continue;
    const Verdict wanted = rule.polarity == Polarity::PositiveTest
                               ? Verdict::NotViolated
                               : Verdict::Violated;
    std::uint64_t matching = 0;
    std::uint64_t counterexamples = 0;
    for (const ExecutionRecord& rec : clean.records) {
      if (rec.function != rule.function) continue;
      if (!FeatureEncoder::condition_holds(rule.condition, rec.function, rec.a,
                                           rec.b)) {
        continue;
      }
      ++matching;
      if (rec.outcomes[mr_index].verdict != wanted) ++counterexamples;
    }
    if (counterexamples != 0) {
      warnings.push_back(
          "rule '" + itemset_str(rule.condition) + " -> " +
          rule_rhs_token(rule) + "' has " + std::to_string(counterexamples) +
          " counterexample(s) among " + std::to_string(matching) +
          " matching log rows; generated tests would fail");
    }
  }
  return warnings;
}

// ---------------------------------------------------------------------------
// Rule file io. Pipe-separated records:
//   lhs_items|rhs_item|support|confidence|lift|provenance
// Stats are rendered round-half-even to 3 places; feedback rules carry "-".
// A campaign blocked by a fault decision yields a marker-only file.

struct RulesFile {
  std::vector<RefinedRule> rules;
  Manifest manifest;
  std::optional<std::string> blocked;
};

inline void save_rules(const std::filesystem::path& path,
                       const std::vector<RefinedRule>& rules,
                       const Manifest& manifest,
                       const std::optional<std::string>& blocked) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write rules file " + path.string());
  out << "lhs_items|rhs_item|support|confidence|lift|provenance\n";
  if (blocked.has_value()) {
    // Marker-only file; the blocked cell is a manifest entry so it is
    // covered by the recorded hash.
    Manifest m = manifest;
    m.set("blocked", *blocked);
    m.write_comment_block(out);
    return;
  }
  manifest.write_comment_block(out);
  for (const RefinedRule& rule : rules) {
    out << itemset_str(rule.condition) << '|' << rule_rhs_token(rule) << '|';
    if (rule.stats.has_value()) {
      out << rule.stats->support.fixed(3) << '|'
          << rule.stats->confidence.fixed(3) << '|' << rule.stats->lift.fixed(3);
    } else {
      out << "-|-|-";
    }
    out << '|' << to_token(rule.provenance);
    if (rule.advisory) out << "-advisory";
    out << '\n';
  }
  if (!out) throw UsageError("short write to rules file " + path.string());
}

inline RulesFile load_rules(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open rules file " + path.string());
  std::string line;
  if (!std::getline(in, line) ||
      std::string_view(trim(line)) !=
          "lhs_items|rhs_item|support|confidence|lift|provenance") {
    throw UsageError(path.string() + ": malformed rules header");
  }
  RulesFile file;
  std::uint64_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view sv = trim(line);
    if (sv.empty()) continue;
    if (Manifest::is_comment(sv)) {
      file.manifest.parse_comment_line(sv);
      continue;
    }
    const std::vector<std::string> fields = split(sv, '|');
    if (fields.size() != 6) {
      throw UsageError(path.string() + ":" + std::to_string(lineno) +
                       ": expected 6 pipe-separated fields");
    }
    RefinedRule rule;
    for (const std::string& token : split(fields[0], ',')) {
      rule.condition.push_back(Item::parse(token));
    }
    rule.condition = canonical_itemset(std::move(rule.condition));
    const Item rhs = Item::parse(fields[1]);
    rule.mr = rhs.key;
    rule.polarity = rhs.value == verdict_item_token(Verdict::Violated)
                        ? Polarity::NegativeTest
                        : Polarity::PositiveTest;
    bool have_function = false;
    for (const Item& item : rule.condition) {
      if (item.key == "func") {
        std::string f = item.value;
        for (char& c : f) c = static_cast<char>(std::tolower(c));
        rule.function = f;
        have_function = true;
      }
    }
    if (!have_function) {
      throw UsageError(path.string() + ":" + std::to_string(lineno) +
                       ": rule condition has no func item");
    }
    std::string provenance = fields[5];
    if (provenance.size() > 9 &&
        provenance.substr(provenance.size() - 9) == "-advisory") {
      rule.advisory = true;
      provenance = provenance.substr(0, provenance.size() - 9);
    }
    if (provenance == "feedback") {
      rule.provenance = RefinedRule::Provenance::Feedback;
    } else if (provenance == "mined") {
      rule.provenance = RefinedRule::Provenance::Mined;
    } else {
      throw UsageError(path.string() + ":" + std::to_string(lineno) +
                       ": unknown provenance '" + provenance + "'");
    }
    if (fields[2] != "-") {
      // File stats are display renderings (3 places); carried through for
      // provenance display only.
      const auto parse_fixed = [&](const std::string& text) {
        const std::size_t dot = text.find('.');
        try {
          if (dot == std::string::npos) return Rational(std::stoll(text));
          const std::string frac = text.substr(dot + 1);
          std::int64_t den = 1;
          for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
          const std::int64_t whole = std::stoll(text.substr(0, dot));
          const std::int64_t sign = text[0] == '-' ? -1 : 1;
          return Rational(whole * den + sign * std::stoll(frac), den);
        } catch (const std::exception&) {
          throw UsageError(path.string() + ":" + std::to_string(lineno) +
                           ": malformed decimal '" + text + "'");
        }
      };
      rule.stats = RuleStats{parse_fixed(fields[2]), parse_fixed(fields[3]),
                             parse_fixed(fields[4])};
    }
    file.rules.push_back(std::move(rule));
  }
  if (const std::string* blocked = file.manifest.find("blocked")) {
    file.blocked = *blocked;
  }
  file.manifest.verify_recorded_hash(path.string());
  return file;
}

// ---------------------------------------------------------------------------
// Suite generation.

struct SuiteTest {
  std::string name;
  std::string function;
  std::string mr;
  Polarity polarity = Polarity::PositiveTest;
  std::string provenance;  // feedback | mined | mined-advisory
  Itemset condition;
  std::vector<ValuePair> inputs;
  TransformKind transform = TransformKind::Permute;
  Value k = 0;
  OutputRelation relation = OutputRelation::RemainEqual;
  std::string assert_text;
};

struct TestSuiteManifest {
  std::string suite_id;
  Manifest manifest;
  std::vector<SuiteTest> tests;
};

namespace detail {

inline std::string transformed_call(const std::string& function,
                                    TransformKind kind, Value k) {
  switch (kind) {
    case TransformKind::Permute:
      return function + "(b, a)";
    case TransformKind::MultiplyEachByK:
      return function + "(a * " + std::to_string(k) + ", b * " +
             std::to_string(k) + ")";
    case TransformKind::AddKToEach:
      return function + "(a + " + std::to_string(k) + ", b + " +
             std::to_string(k) + ")";
    case TransformKind::SubtractKFromEach:
      return function + "(a - " + std::to_string(k) + ", b - " +
             std::to_string(k) + ")";
  }
  throw Error("unreachable transform kind");
}

inline std::string assert_text(const std::string& function,
                               const MRSpec& mr, Polarity polarity) {
  const std::string op =
      mr.expected == OutputRelation::RemainEqual ? "==" : "<";
  const std::string predicate =
      function + "(a, b) " + op + " " +
      transformed_call(function, mr.transformation.kind, mr.transformation.k);
  return polarity == Polarity::PositiveTest ? "assert " + predicate
                                            : "assert !(" + predicate + ")";
}

inline std::string condition_slug(const Itemset& condition) {
  std::string slug;
  for (const Item& item : condition) {
    if (item.key == "func") continue;
    if (!slug.empty()) slug += '_';
    slug += item.key + "_" + item.value;
  }
  return slug;
}

// Deterministic candidate pairs for rules no corpus input satisfies:
// midpoint and boundary combinations first, then (for small domains) a full
// lexicographic scan.
inline std::optional<ValuePair> synthesize_input(const Itemset& condition,
                                                 const std::string& function,
                                                 Value lo, Value hi) {
  const Value mid = lo + (hi - lo) / 2;
  std::vector<ValuePair> candidates = {
      {mid, mid}, {lo, lo}, {hi, hi}, {lo, hi}, {hi, lo},
      {lo, mid}, {mid, lo}, {mid, hi}, {hi, mid}};
  if (mid < hi) {
    candidates.push_back({mid, mid + 1});
    candidates.push_back({mid + 1, mid});
  }
  if (lo <= 0 && 0 <= hi) {
    candidates.push_back({0, 0});
    candidates.push_back({0, mid});
    candidates.push_back({mid, 0});
    candidates.push_back({0, hi});
    candidates.push_back({hi, 0});
  }
  for (const ValuePair& c : candidates) {
    if (FeatureEncoder::condition_holds(condition, function, c.a, c.b)) {
      return c;
    }
  }
  const std::uint64_t side = static_cast<std::uint64_t>(hi) -
                             static_cast<std::uint64_t>(lo) + 1;
  if (side != 0 && side <= 1000) {
    for (Value a = lo;; ++a) {
      for (Value b = lo;; ++b) {
        if (FeatureEncoder::condition_holds(condition, function, a, b)) {
          return ValuePair{a, b};
        }
        if (b == hi) break;
      }
      if (a == hi) break;
    }
  }
  return std::nullopt;
}

}  // namespace detail

struct SuiteResult {
  TestSuiteManifest suite;
  std::vector<std::string> warnings;
};

/// Builds the regression suite: for every rule, up to per_rule_cases
/// corpus inputs satisfying the condition (lowest ids first); a rule no
/// corpus input satisfies gets one synthetic boundary input and a warning.
/// Advisory rules (mined below confidence 1) are skipped unless asked for:
/// a test generated from one would fail by construction.
inline SuiteResult generate_suite(const std::vector<RefinedRule>& rules,
                                  const std::vector<TestDatum>& corpus,
                                  const std::vector<MRSpec>& mrs,
                                  Value domain_min, Value domain_max,
                                  const Manifest& manifest,
                                  std::size_t per_rule_cases = 5,
                                  bool include_advisory = false) {
  SuiteResult result;
  std::vector<const RefinedRule*> active;
  for (const RefinedRule& rule : rules) {
    if (rule.advisory && !include_advisory) {
      result.warnings.push_back("advisory rule on " + rule.function + "." +
                                rule.mr + " skipped (confidence < 1)");
      continue;
    }
    active.push_back(&rule);
  }
  if (active.empty()) {
    throw UsageError("no rules to generate a suite from");
  }

  result.suite.manifest = manifest;
  result.suite.manifest.set_u64("per_rule_cases", per_rule_cases);
  result.suite.suite_id =
      "suite-" + result.suite.manifest.hash_hex().substr(0, 12);

  std::set<std::string> used_names;
  for (const RefinedRule* rule : active) {
    const MRSpec* mr = nullptr;
    for (const MRSpec& m : mrs) {
      if (m.id == rule->mr) mr = &m;
    }
    if (mr == nullptr) {
      throw UsageError("rule references MR '" + rule->mr +
                       "' outside the campaign MR set");
    }

    SuiteTest test;
    test.function = rule->function;
    test.mr = rule->mr;
    test.polarity = rule->polarity;
    test.provenance = std::string(to_token(rule->provenance));
    if (rule->advisory) test.provenance += "-advisory";
    test.condition = rule->condition;
    test.transform = mr->transformation.kind;
    test.k = mr->transformation.kind == TransformKind::Permute
                 ? 0
                 : mr->transformation.k;
    test.relation = mr->expected;
    test.assert_text = detail::assert_text(rule->function, *mr, rule->polarity);

    std::string name = rule->function + "_" + rule->mr + "_" +
                       (rule->polarity == Polarity::PositiveTest ? "pos"
                                                                 : "neg");
    const std::string slug = detail::condition_slug(rule->condition);
    if (!slug.empty()) name += "_" + slug;
    std::string unique = name;
    for (int n = 2; !used_names.insert(unique).second; ++n) {
      unique = name + "_" + std::to_string(n);
    }
    test.name = unique;

    if (per_rule_cases > 0) {
      for (const TestDatum& d : corpus) {
        if (test.inputs.size() >= per_rule_cases) break;
        if (FeatureEncoder::condition_holds(rule->condition, rule->function,
                                            d.a, d.b)) {
          test.inputs.push_back({d.a, d.b});
        }
      }
      if (test.inputs.empty()) {
        const std::optional<ValuePair> synth = detail::synthesize_input(
            rule->condition, rule->function, domain_min, domain_max);
        if (!synth.has_value()) {
          throw UsageError("rule condition '" +
                           itemset_str(rule->condition) +
                           "' is unsatisfiable over the domain");
        }
        result.warnings.push_back(
            "no corpus input satisfies '" + itemset_str(rule->condition) +
            "'; using synthetic input (" + std::to_string(synth->a) + "," +
            std::to_string(synth->b) + ")");
        test.inputs.push_back(*synth);
      }
    }
    result.suite.tests.push_back(std::move(test));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Suite manifest io (ordered json; loading and re-saving an emitted file is
// byte-identical).

inline nlohmann::ordered_json suite_to_json(const TestSuiteManifest& suite) {
  nlohmann::ordered_json doc;
  doc["suite_id"] = suite.suite_id;
  doc["manifest"] = suite.manifest.to_json();
  auto tests = nlohmann::ordered_json::array();
  for (const SuiteTest& t : suite.tests) {
    nlohmann::ordered_json jt;
    jt["name"] = t.name;
    jt["function"] = t.function;
    jt["mr"] = t.mr;
    jt["polarity"] = to_token(t.polarity);
    jt["provenance"] = t.provenance;
    auto condition = nlohmann::ordered_json::array();
    for (const Item& item : t.condition) condition.push_back(item.str());
    jt["condition"] = std::move(condition);
    auto inputs = nlohmann::ordered_json::array();
    for (const ValuePair& p : t.inputs) inputs.push_back({p.a, p.b});
    jt["inputs"] = std::move(inputs);
    jt["check"] = {
        {"transform", to_token(t.transform)},
        {"k", t.transform == TransformKind::Permute
                  ? nlohmann::ordered_json(nullptr)
                  : nlohmann::ordered_json(t.k)},
        {"relation", to_token(t.relation)},
        {"expect", t.polarity == Polarity::PositiveTest ? "not_violated"
                                                        : "violated"},
        {"assert_text", t.assert_text},
    };
    tests.push_back(std::move(jt));
  }
  doc["tests"] = std::move(tests);
  return doc;
}

inline void save_suite(const std::filesystem::path& path,
                       const TestSuiteManifest& suite) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write suite file " + path.string());
  out << suite_to_json(suite).dump(2) << '\n';
  if (!out) throw UsageError("short write to suite file " + path.string());
}

inline TestSuiteManifest load_suite(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open suite file " + path.string());
  nlohmann::ordered_json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("suite file " + path.string() + ": " + e.what());
  }
  TestSuiteManifest suite;
  try {
    suite.suite_id = doc.at("suite_id").get<std::string>();
    suite.manifest = Manifest::from_json(doc.at("manifest"), path.string());
    for (const auto& jt : doc.at("tests")) {
      SuiteTest t;
      t.name = jt.at("name").get<std::string>();
      t.function = jt.at("function").get<std::string>();
      t.mr = jt.at("mr").get<std::string>();
      t.polarity = polarity_from(jt.at("polarity").get<std::string>());
      t.provenance = jt.at("provenance").get<std::string>();
      for (const auto& token : jt.at("condition")) {
        t.condition.push_back(Item::parse(token.get<std::string>()));
      }
      t.condition = canonical_itemset(std::move(t.condition));
      for (const auto& input : jt.at("inputs")) {
        t.inputs.push_back({input.at(0).get<Value>(), input.at(1).get<Value>()});
      }
      const auto& check = jt.at("check");
      t.transform = transform_kind_from(check.at("transform").get<std::string>());
      t.k = check.at("k").is_null() ? 0 : check.at("k").get<Value>();
      t.relation = output_relation_from(check.at("relation").get<std::string>());
      t.assert_text = check.at("assert_text").get<std::string>();
      for (const ValuePair& input : t.inputs) {
        if (!FeatureEncoder::condition_holds(t.condition, t.function, input.a,
                                             input.b)) {
          throw UsageError(path.string() + ": test '" + t.name + "' input (" +
                           std::to_string(input.a) + "," +
                           std::to_string(input.b) +
                           ") does not satisfy its condition");
        }
      }
      suite.tests.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("suite file " + path.string() + ": " + e.what());
  }
  return suite;
}

/// Plain-text rendering of the suite as assertion pseudocode.
inline std::string render_suite_text(const TestSuiteManifest& suite) {
  std::ostringstream os;
  os << "# regression suite " << suite.suite_id << "\n";
  os << "# manifest " << suite.manifest.hash_hex() << "\n\n";
  for (const SuiteTest& t : suite.tests) {
    os << "test " << t.name << " [" << t.provenance << "]:\n";
    os << "  condition: "
       << (detail::condition_slug(t.condition).empty()
               ? "func:" + function_item_value(t.function)
               : itemset_str(t.condition))
       << "\n";
    if (t.inputs.empty()) {
      os << "  inputs: (condition only)\n";
    } else {
      os << "  inputs:";
      for (const ValuePair& p : t.inputs) {
        os << " (" << p.a << ", " << p.b << ")";
      }
      os << "\n";
    }
    os << "  " << t.assert_text << "\n\n";
  }
  return os.str();
}

}  // namespace mrefine
