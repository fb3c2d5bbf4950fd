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

// Acceptance suite. Eight end-to-end criteria over the builtin calculator
// campaign (exhaustive {0..9} x {0..9} corpus, k = 5), printing one
// pass/fail line each. Everything is checked exactly: counts as exact
// rationals, artifacts by byte equality.

#include <chrono>
#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mrefine/analyser.hpp"
#include "mrefine/arm.hpp"
#include "mrefine/harness.hpp"
#include "mrefine/mr.hpp"
#include "mrefine/rational.hpp"
#include "mrefine/refine.hpp"
#include "mrefine/tdg.hpp"

#include "arm_oracle.hpp"
#include "test_util.hpp"

using namespace mrefine;

namespace {

const std::string kCli = MREFINE_CLI_PATH;
const std::string kRefCalc = REFCALC_PATH;

struct Criterion {
  std::string id;
  std::string title;
  std::function<void(std::vector<std::string>&)> run;
};

void expect(std::vector<std::string>& failures, bool ok,
            const std::string& what) {
  if (!ok) failures.push_back(what);
}

// Shared fixture: the toy campaign everything else builds on.
struct Campaign {
  std::vector<TestDatum> corpus;
  std::vector<MRSpec> mrs;
  CleanLog clean;
  VerdictSummary summary;
  std::vector<FeedbackDecision> decisions;
};

const Campaign& campaign() {
  static const Campaign c = [] {
    Campaign out;
    out.corpus = generate({0, 0, 9, 7, FuzzMode::Exhaustive});
    out.mrs = default_mr_set(5);
    const auto records = run_campaign(out.corpus, out.mrs,
                                      SutAdapter::builtin());
    out.clean = preprocess(records, out.mrs, {"add", "sub", "mul"});
    out.summary = summarize(out.clean, 7);
    out.decisions = classify(out.summary);
    return out;
  }();
  return c;
}

Rational cell_pct(const VerdictSummary& summary, const std::string& f,
                  const std::string& mr) {
  for (const CellStats& cell : summary.cells) {
    if (cell.function == f && cell.mr == mr) return cell.violated_pct;
  }
  throw Error("missing cell " + f + "." + mr);
}

// ---------------------------------------------------------------------------
// C1: exact violation table for the toy example.

void criterion1(std::vector<std::string>& failures) {
  const auto start = std::chrono::steady_clock::now();

  // Frozen expectation, cross-checked by an inline enumeration with raw
  // arithmetic (independent of the checker path).
  std::map<std::pair<std::string, std::string>, int> oracle;
  for (int a = 0; a <= 9; ++a) {
    for (int b = 0; b <= 9; ++b) {
      constexpr int k = 5;
      oracle[{"add", "MR1"}] += a + b != b + a;
      oracle[{"sub", "MR1"}] += a - b != b - a;
      oracle[{"mul", "MR1"}] += a * b != b * a;
      oracle[{"add", "MR2"}] += !(a + b < a * k + b * k);
      oracle[{"sub", "MR2"}] += !(a - b < a * k - b * k);
      oracle[{"mul", "MR2"}] += !(a * b < a * k * b * k);
      oracle[{"add", "MR3"}] += a + b != (a + k) + (b + k);
      oracle[{"sub", "MR3"}] += a - b != (a + k) - (b + k);
      oracle[{"mul", "MR3"}] += a * b != (a + k) * (b + k);
      oracle[{"add", "MR4"}] += a + b != (a - k) + (b - k);
      oracle[{"sub", "MR4"}] += a - b != (a - k) - (b - k);
      oracle[{"mul", "MR4"}] += a * b != (a - k) * (b - k);
    }
  }

  const std::map<std::pair<std::string, std::string>, Rational> frozen = {
      {{"add", "MR1"}, Rational(0)},        {{"add", "MR2"}, Rational(1, 100)},
      {{"add", "MR3"}, Rational(1)},        {{"add", "MR4"}, Rational(1)},
      {{"sub", "MR1"}, Rational(90, 100)},  {{"sub", "MR2"}, Rational(55, 100)},
      {{"sub", "MR3"}, Rational(0)},        {{"sub", "MR4"}, Rational(0)},
      {{"mul", "MR1"}, Rational(0)},        {{"mul", "MR2"}, Rational(19, 100)},
      {{"mul", "MR3"}, Rational(1)},        {{"mul", "MR4"}, Rational(94, 100)},
  };

  const Campaign& c = campaign();
  expect(failures, c.summary.cells.size() == 12, "expected 12 cells");
  for (const auto& [key, pct] : frozen) {
    expect(failures, Rational(oracle.at(key), 100) == pct,
           "oracle disagrees with frozen table at " + key.first + "." +
               key.second);
    const Rational actual = cell_pct(c.summary, key.first, key.second);
    if (actual != pct) {
      failures.push_back(key.first + "." + key.second + ": expected " +
                         pct.percent() + "%, got " + actual.percent() + "%");
    }
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  expect(failures, seconds < 1.0,
         "table took " + std::to_string(seconds) + "s (limit 1s)");
}

// ---------------------------------------------------------------------------
// C2: exactly two subtraction rules under pair-relation encoding.

void criterion2(std::vector<std::string>& failures) {
  const Campaign& c = campaign();
  const std::vector<MinedRule> mined =
      mine_all(c.clean, c.decisions, FeatureEncoder{true, false},
               Rational(1, 5), Rational(1));

  std::vector<const MinedRule*> sub_mr2;
  for (const MinedRule& r : mined) {
    if (r.function == "sub" && r.mr == "MR2") sub_mr2.push_back(&r);
  }
  expect(failures, sub_mr2.size() == 2,
         "expected exactly 2 sub/MR2 rules, got " +
             std::to_string(sub_mr2.size()));

  const auto has_rule = [&](const Itemset& lhs, const std::string& verdict,
                            const Rational& sup, const Rational& lift) {
    for (const MinedRule* r : sub_mr2) {
      if (r->rule.lhs == lhs && r->rule.rhs == Itemset{{"MR2", verdict}} &&
          r->rule.support == sup && r->rule.confidence == Rational(1) &&
          r->rule.lift == lift) {
        return true;
      }
    }
    return false;
  };
  expect(failures,
         has_rule(canonical_itemset({{"func", "SUB"}, {"rel", "gt"}}),
                  "NotViolated", Rational(45, 100),
                  Rational(1) / Rational(45, 100)),
         "missing {a>b, SUB} -> NotViolated at support 0.45, confidence 1");
  expect(failures,
         has_rule(canonical_itemset({{"func", "SUB"}, {"rel", "lt"}}),
                  "Violated", Rational(45, 100),
                  Rational(1) / Rational(55, 100)),
         "missing {a<b, SUB} -> Violated at support 0.45, confidence 1");

  for (const MinedRule* r : sub_mr2) {
    for (const Item& item : r->rule.lhs) {
      expect(failures, !(item == Item{"rel", "eq"}),
             "the a==b rule (support 0.10) must be absent at threshold 0.2");
    }
  }
}

// ---------------------------------------------------------------------------
// C3: zero-flag refinement at min_support 0.1.

void criterion3(std::vector<std::string>& failures) {
  const Campaign& c = campaign();
  const std::vector<MinedRule> mined =
      mine_all(c.clean, c.decisions, FeatureEncoder{true, true},
               Rational(1, 10), Rational(1));

  const auto find = [&](const std::string& function, const Item& needle,
                        const std::string& verdict) -> const MinedRule* {
    for (const MinedRule& r : mined) {
      if (r.function != function || r.mr != "MR2") continue;
      if (r.rule.rhs != Itemset{{"MR2", verdict}}) continue;
      for (const Item& item : r.rule.lhs) {
        if (item == needle) return &r;
      }
    }
    return nullptr;
  };

  const MinedRule* a_zero = find("mul", {"a_zero", "true"}, "Violated");
  expect(failures, a_zero != nullptr,
         "missing {a_zero, MUL} -> MR2:Violated at min_support 0.1");
  if (a_zero != nullptr) {
    expect(failures, a_zero->rule.confidence == Rational(1),
           "{a_zero, MUL} confidence is not 1");
    expect(failures, a_zero->rule.support == Rational(1, 10),
           "{a_zero, MUL} support is not 0.10");
  }
  const MinedRule* b_zero = find("mul", {"b_zero", "true"}, "Violated");
  expect(failures, b_zero != nullptr,
         "missing {b_zero, MUL} -> MR2:Violated at min_support 0.1");

  // The add-function zero rule. Its itemset support over the 100-record
  // add/MR2 database is exactly 1/100 (the single input (0,0)), so a 0.1
  // support floor cannot surface it; the assertion is kept as specified and
  // the measured support is reported alongside the failure.
  const MinedRule* both_zero = find("add", {"both_zero", "true"}, "Violated");
  if (both_zero == nullptr) {
    std::vector<ExecutionRecord> add_records;
    for (const ExecutionRecord& rec : c.clean.records) {
      if (rec.function == "add") add_records.push_back(rec);
    }
    const auto db = encode(add_records, 1, "MR2", FeatureEncoder{true, true});
    const Rational measured = support(db, {{"both_zero", "true"}});
    failures.push_back(
        "missing {both_zero, ADD} -> MR2:Violated at min_support 0.1 "
        "(measured itemset support is " +
        measured.str() + " = " + measured.fixed(3) +
        ", below the 0.1 floor; it is mined at min_support <= 0.01)");
  } else {
    expect(failures, both_zero->rule.confidence == Rational(1),
           "{both_zero, ADD} confidence is not 1");
  }
}

// ---------------------------------------------------------------------------
// C4: metric formulas on hand-built databases, plus lift renderings.

void criterion4(std::vector<std::string>& failures) {
  const auto txn = [](std::initializer_list<Item> items) {
    return Transaction{canonical_itemset(Itemset(items))};
  };

  // Four transactions.
  const std::vector<Transaction> db4 = {
      txn({{"A", "1"}, {"B", "1"}}), txn({{"A", "1"}, {"B", "1"}}),
      txn({{"A", "1"}}), txn({{"B", "1"}})};
  expect(failures, support(db4, {{"A", "1"}}) == Rational(3, 4),
         "support({A}) != 3/4");
  expect(failures, support(db4, {{"A", "1"}, {"B", "1"}}) == Rational(1, 2),
         "support({A,B}) != 1/2");
  expect(failures, support(db4, {}) == Rational(1), "support(empty) != 1");
  expect(failures,
         confidence(db4, {{"A", "1"}}, {{"B", "1"}}) == Rational(2, 3),
         "confidence(A->B) != 2/3");
  expect(failures,
         lift(db4, {{"A", "1"}}, {{"B", "1"}}) ==
             Rational(2, 3) / Rational(3, 4),
         "lift(A->B) != 8/9");

  // Eight transactions with exactly independent items: support(x) = 1/2,
  // support(y) = 3/4, support(x,y) = 3/8 = their product.
  std::vector<Transaction> db8;
  for (int i = 0; i < 8; ++i) {
    Itemset items = {{"pad", std::to_string(i)}};
    if (i < 4) items.push_back({"x", "1"});
    if (i < 3 || (i >= 4 && i < 7)) items.push_back({"y", "1"});
    db8.push_back(Transaction{canonical_itemset(std::move(items))});
  }
  expect(failures, support(db8, {{"x", "1"}}) == Rational(1, 2),
         "support({x}) != 1/2");
  expect(failures, support(db8, {{"y", "1"}}) == Rational(3, 4),
         "support({y}) != 3/4");
  expect(failures,
         support(db8, {{"x", "1"}, {"y", "1"}}) == Rational(3, 8),
         "support({x,y}) != 3/8");
  expect(failures, lift(db8, {{"x", "1"}}, {{"y", "1"}}) == Rational(1),
         "independent items must have lift exactly 1");

  // Rendered lifts for confidence 1 over consequent supports 0.61 / 0.39.
  const Rational lift_61 = Rational(1) / Rational(61, 100);
  const Rational lift_39 = Rational(1) / Rational(39, 100);
  expect(failures, lift_61.fixed(3) == "1.639",
         "lift rendering for support 0.61: got " + lift_61.fixed(3));
  expect(failures, lift_39.fixed(3) == "2.564",
         "lift rendering for support 0.39: got " + lift_39.fixed(3));
}

// ---------------------------------------------------------------------------
// C5: apriori and rule derivation equal brute force on 50 random databases.

void criterion5(std::vector<std::string>& failures) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240505);
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<Transaction> db = testutil::random_db(rng);
    const Rational min_support(1 + static_cast<int>(rng() % 4), 10);
    const Rational min_confidence(1 + static_cast<int>(rng() % 2), 2);

    const FrequentItemsets frequent = apriori_frequent(db, min_support);
    if (testutil::flatten_frequent(frequent) !=
        testutil::brute_frequent(db, min_support)) {
      failures.push_back("frequent itemsets diverge from brute force at trial " +
                         std::to_string(trial));
      break;
    }
    if (derive_rules(frequent, min_confidence, {"Y"}) !=
        testutil::brute_rules(db, min_support, min_confidence, {"Y"})) {
      failures.push_back("rules diverge from brute force at trial " +
                         std::to_string(trial));
      break;
    }
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  expect(failures, seconds < 10.0,
         "oracle sweep took " + std::to_string(seconds) + "s (limit 10s)");
}

// ---------------------------------------------------------------------------
// C6: byte-identical artifacts across reruns and worker counts.

struct PipelineFiles {
  std::string corpus, log, report, rules, suite, suite_text;
};

PipelineFiles run_pipeline(const testutil::TempDir& dir, int jobs,
                           const std::string& sut,
                           std::vector<std::string>& failures) {
  const auto path = [&](const std::string& name) {
    return (dir.path() / name).string();
  };
  const std::vector<std::string> commands = {
      kCli + " fuzz --min 0 --max 9 --mode exhaustive --seed 7 --out " +
          path("corpus.txt"),
      kCli + " run --corpus " + path("corpus.txt") + " --k 5 --sut '" + sut +
          "' --jobs " + std::to_string(jobs) + " --out " + path("log.txt"),
      kCli + " analyze --log " + path("log.txt") + " --report " +
          path("report.json"),
      kCli + " mine --log " + path("log.txt") + " --report " +
          path("report.json") + " --out " + path("rules.txt"),
      kCli + " gen-suite --rules " + path("rules.txt") + " --corpus " +
          path("corpus.txt") + " --out " + path("suite.json") +
          " --render-text " + path("suite.txt"),
  };
  for (const std::string& command : commands) {
    const testutil::CommandResult r = testutil::run_command(command);
    if (r.exit_code != 0) {
      failures.push_back("pipeline step failed (" + std::to_string(r.exit_code) +
                         "): " + command + "\n" + r.output);
      break;
    }
  }
  PipelineFiles files;
  const auto read = [&](const std::string& name) {
    return std::filesystem::exists(dir.path() / name)
               ? testutil::read_file(dir.path() / name)
               : std::string();
  };
  files.corpus = read("corpus.txt");
  files.log = read("log.txt");
  files.report = read("report.json");
  files.rules = read("rules.txt");
  files.suite = read("suite.json");
  files.suite_text = read("suite.txt");
  return files;
}

void compare_pipelines(const PipelineFiles& a, const PipelineFiles& b,
                       const std::string& what,
                       std::vector<std::string>& failures) {
  expect(failures, !a.corpus.empty(), "empty corpus artifact");
  expect(failures, a.corpus == b.corpus, "corpus differs " + what);
  expect(failures, a.log == b.log, "log differs " + what);
  expect(failures, a.report == b.report, "report differs " + what);
  expect(failures, a.rules == b.rules, "rules differ " + what);
  expect(failures, a.suite == b.suite, "suite differs " + what);
  expect(failures, a.suite_text == b.suite_text, "rendering differs " + what);
}

void criterion6(std::vector<std::string>& failures) {
  const testutil::TempDir dir_a("acc-c6a");
  const testutil::TempDir dir_b("acc-c6b");
  const testutil::TempDir dir_c("acc-c6c");
  const PipelineFiles a = run_pipeline(dir_a, 1, "builtin:calculator", failures);
  const PipelineFiles b = run_pipeline(dir_b, 1, "builtin:calculator", failures);
  const PipelineFiles c = run_pipeline(dir_c, 4, "builtin:calculator", failures);
  compare_pipelines(a, b, "between identical reruns", failures);
  compare_pipelines(a, c, "between --jobs 1 and --jobs 4", failures);

  // Re-derivation: every stored verdict equals the recomputed one.
  const testutil::TempDir scratch("acc-c6d");
  testutil::write_file(scratch.file("log.txt"), a.log);
  const LoadedLog log = load_log(scratch.file("log.txt"));
  expect(failures, log.records.size() == 300, "expected a 300-record log");
  for (const ExecutionRecord& rec : log.records) {
    for (std::size_t m = 0; m < log.mrs.size(); ++m) {
      if (check_mr(log.mrs[m].expected, rec.source_out,
                   rec.outcomes[m].followup_out) != rec.outcomes[m].verdict) {
        failures.push_back("verdict re-derivation mismatch at id " +
                           std::to_string(rec.id) + " " + rec.function);
        return;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// C7: suite soundness against the builtin calculator.

void criterion7(std::vector<std::string>& failures) {
  const testutil::TempDir dir("acc-c7");
  const PipelineFiles files =
      run_pipeline(dir, 1, "builtin:calculator", failures);
  if (files.suite.empty()) {
    failures.push_back("no suite artifact to check");
    return;
  }
  const TestSuiteManifest suite = load_suite(dir.file("suite.json"));
  const Corpus corpus = load_corpus(dir.file("corpus.txt"));
  const SutAdapter adapter = SutAdapter::builtin();
  expect(failures, !suite.tests.empty(), "suite is empty");

  std::uint64_t checked_inputs = 0;
  for (const SuiteTest& test : suite.tests) {
    const Transformation transform{test.transform, test.k};
    for (const TestDatum& d : corpus.data) {
      if (!FeatureEncoder::condition_holds(test.condition, test.function, d.a,
                                           d.b)) {
        continue;
      }
      ++checked_inputs;
      const Value source = execute_sut(adapter, test.function, d.a, d.b);
      const ValuePair followup = transform_inputs(transform, d.a, d.b);
      const Value out =
          execute_sut(adapter, test.function, followup.a, followup.b);
      const Verdict verdict = check_mr(test.relation, source, out);
      const Verdict wanted = test.polarity == Polarity::PositiveTest
                                 ? Verdict::NotViolated
                                 : Verdict::Violated;
      if (verdict != wanted) {
        failures.push_back("test " + test.name + " breaks on (" +
                           std::to_string(d.a) + "," + std::to_string(d.b) +
                           ")");
        return;
      }
    }
  }
  expect(failures, checked_inputs > 0, "no condition-satisfying inputs");
}

// ---------------------------------------------------------------------------
// C8: the reference external calculator produces identical verdicts.

std::string verdict_columns(const std::string& log_text,
                            std::vector<std::string>& failures) {
  std::istringstream in(log_text);
  std::string line;
  std::ostringstream out;
  bool first = true;
  while (std::getline(in, line)) {
    if (first || line.empty() || line.front() == '#') {
      first = false;
      continue;
    }
    const std::vector<std::string> fields = split(line, ',');
    if (fields.size() != 13) {
      failures.push_back("unexpected log field count " +
                         std::to_string(fields.size()));
      return "";
    }
    out << fields[6] << ',' << fields[8] << ',' << fields[10] << ','
        << fields[12] << '\n';
  }
  return out.str();
}

void criterion8(std::vector<std::string>& failures) {
  const testutil::TempDir dir_builtin("acc-c8a");
  const testutil::TempDir dir_external("acc-c8b");
  const PipelineFiles builtin =
      run_pipeline(dir_builtin, 1, "builtin:calculator", failures);
  const PipelineFiles external =
      run_pipeline(dir_external, 4, "cmd:" + kRefCalc, failures);
  if (builtin.log.empty() || external.log.empty()) {
    failures.push_back("missing log artifacts");
    return;
  }
  const std::string verdicts_builtin = verdict_columns(builtin.log, failures);
  const std::string verdicts_external = verdict_columns(external.log, failures);
  expect(failures, !verdicts_builtin.empty(), "builtin verdict columns empty");
  expect(failures, verdicts_builtin == verdicts_external,
         "verdict columns differ between builtin and external adapters");
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"C1", "toy-example classification table (exhaustive, k=5)", criterion1},
      {"C2", "mined SUB/MR2 rules at thresholds (0.2, 1.0)", criterion2},
      {"C3", "zero-flag refinement at min_support 0.1", criterion3},
      {"C4", "support/confidence/lift formulas and renderings", criterion4},
      {"C5", "apriori equals brute force on 50 random databases", criterion5},
      {"C6", "byte-identical artifacts across reruns and --jobs", criterion6},
      {"C7", "suite soundness against the builtin calculator", criterion7},
      {"C8", "external adapter verdict equality", criterion8},
  };

  int failed = 0;
  for (const Criterion& criterion : criteria) {
    std::vector<std::string> failures;
    const auto start = std::chrono::steady_clock::now();
    try {
      criterion.run(failures);
    } catch (const std::exception& e) {
      failures.push_back(std::string("exception: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.2fs", seconds);
    if (failures.empty()) {
      std::cout << "[PASS] " << criterion.id << " " << criterion.title << " ("
                << timing << ")\n";
    } else {
      ++failed;
      std::cout << "[FAIL] " << criterion.id << " " << criterion.title << " ("
                << timing << ")\n";
      for (const std::string& f : failures) {
        std::cout << "       - " << f << "\n";
      }
    }
  }
  if (failed != 0) {
    std::cout << failed << " of " << criteria.size()
              << " criteria failed\n";
  } else {
    std::cout << "all " << criteria.size() << " criteria passed\n";
  }
  return failed;
}
