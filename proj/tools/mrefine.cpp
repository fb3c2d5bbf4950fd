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

// mrefine command line: fuzz -> run -> analyze -> review -> mine ->
// gen-suite. Each stage reads the previous stage's artifact, so any stage
// can be rerun in isolation. All randomness flows from --seed; artifacts
// embed the campaign manifest and are byte-stable across reruns.
//
// Exit codes: 0 success, 1 usage error, 2 SUT execution failure,
// 3 campaign blocked by a fault decision.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mrefine/analyser.hpp"
#include "mrefine/arm.hpp"
#include "mrefine/common.hpp"
#include "mrefine/harness.hpp"
#include "mrefine/manifest.hpp"
#include "mrefine/mr.hpp"
#include "mrefine/rational.hpp"
#include "mrefine/refine.hpp"
#include "mrefine/tdg.hpp"

namespace {

using namespace mrefine;

struct FuzzArgs {
  std::uint64_t count = 100;
  Value min = 0;
  Value max = 9;
  std::uint64_t seed = 0;
  std::string mode = "random";
  std::string out = "corpus.txt";
};

int cmd_fuzz(const FuzzArgs& args) {
  FuzzConfig config;
  config.count = args.count;
  config.domain_min = args.min;
  config.domain_max = args.max;
  config.seed = args.seed;
  config.mode = fuzz_mode_from(args.mode);
  const std::vector<TestDatum> data = generate(config);
  save_corpus(args.out, data, corpus_manifest(config));
  std::cout << "wrote " << data.size() << " test pairs to " << args.out
            << "\n";
  return 0;
}

struct RunArgs {
  std::string corpus;
  std::string sut = "builtin:calculator";
  std::optional<Value> k;
  std::string mrs = "default";
  std::string out = "log.txt";
  std::string functions;
  int jobs = std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
};

int cmd_run(const RunArgs& args) {
  const Corpus corpus = load_corpus(args.corpus);
  const std::uint64_t seed = corpus.manifest.require_u64("seed");
  const Value domain_max = corpus.manifest.require_i64("domain_max");

  // The shared constant: either pinned by flag or drawn once from the
  // constant stream of the corpus seed (lower bound 2 keeps every default
  // relation satisfiable).
  Value k = 0;
  std::string k_policy;
  if (args.k.has_value()) {
    k = *args.k;
    k_policy = "flag";
  } else {
    k = draw_constant_k(seed, 2, std::max<Value>(2, domain_max));
    k_policy = "drawn-once-shared";
  }

  const std::vector<MRSpec> mrs =
      args.mrs == "default" ? default_mr_set(k) : load_mr_set(args.mrs, k);

  std::vector<std::string> functions;
  for (const std::string& f : split(args.functions, ',')) {
    if (!std::string_view(trim(f)).empty()) functions.emplace_back(trim(f));
  }
  const SutAdapter adapter = SutAdapter::parse(args.sut, functions);

  Manifest manifest = corpus.manifest;
  manifest.set_i64("k", k);
  manifest.set("k_policy", k_policy);
  manifest.set("sut", adapter.descriptor());
  manifest.set("functions", join(adapter.functions, ","));
  mr_set_to_manifest(mrs, manifest);

  if (args.jobs < 1) throw UsageError("--jobs must be >= 1");
  try {
    const std::vector<ExecutionRecord> records =
        run_campaign(corpus.data, mrs, adapter, args.jobs);
    save_log(args.out, records, mrs, manifest);
    std::cout << "wrote " << records.size() << " execution records to "
              << args.out << " (k=" << k << ")\n";
    return 0;
  } catch (const CampaignError& e) {
    // Keep what completed, with an explicit marker so no consumer can
    // mistake the partial log for a finished campaign.
    save_log(args.out, e.partial(), mrs, manifest, std::string(e.what()));
    std::cerr << "error: " << e.what() << "\n"
              << "partial log (" << e.partial().size()
              << " records) written to " << args.out << "\n";
    return 2;
  }
}

struct AnalyzeArgs {
  std::string log;
  std::string report = "report.json";
  std::string min_support = "0.2";
  std::string min_confidence = "1.0";
  std::string atypical = "0.1";
  std::size_t samples = 5;
  std::string csv;
};

int cmd_analyze(const AnalyzeArgs& args) {
  const LoadedLog log = load_log(args.log);
  const CleanLog clean = preprocess(log.records, log.mrs, log.functions);
  if (clean.dropped_duplicates != 0 || clean.dropped_inconsistent != 0) {
    std::cerr << "cleaned log: dropped " << clean.dropped_duplicates
              << " duplicate and " << clean.dropped_inconsistent
              << " inconsistent rows\n";
  }
  const Rational atypical = Rational::parse(args.atypical);
  const Rational min_support = Rational::parse(args.min_support);
  const Rational min_confidence = Rational::parse(args.min_confidence);

  Report report;
  report.manifest = log.manifest;
  report.manifest.set("atypical_threshold", atypical.str());
  report.manifest.set("min_support", min_support.str());
  report.manifest.set("min_confidence", min_confidence.str());
  report.manifest.set_u64("samples", args.samples);
  report.manifest.set_u64("dropped_duplicates", clean.dropped_duplicates);
  report.manifest.set_u64("dropped_inconsistent", clean.dropped_inconsistent);
  report.summary =
      summarize(clean, log.manifest.require_u64("seed"), args.samples);
  report.decisions = classify(report.summary, atypical);
  save_report(args.report, report);
  if (!args.csv.empty()) save_summary_csv(args.csv, report);
  std::cout << render_summary_table(report);
  std::cout << "wrote report to " << args.report << "\n";
  return 0;
}

struct ReviewArgs {
  std::string report;
  std::string decisions;
  std::string out;
};

int cmd_review(const ReviewArgs& args) {
  Report report = load_report(args.report);
  if (!args.decisions.empty()) {
    std::ifstream in(args.decisions);
    if (!in) {
      throw UsageError("cannot open decisions file " + args.decisions);
    }
    nlohmann::ordered_json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("decisions file " + args.decisions + ": " + e.what());
    }
    report.decisions =
        apply_feedback(std::move(report.decisions), doc, report.summary);
    const std::string out = args.out.empty() ? args.report : args.out;
    save_report(out, report);
    std::cout << render_summary_table(report);
    std::cout << "wrote reviewed report to " << out << "\n";
  } else {
    std::cout << render_summary_table(report);
  }
  return 0;
}

struct MineArgs {
  std::string log;
  std::string report;
  std::string min_support;
  std::string min_confidence;
  std::string features = "rel,zero";
  std::string out = "rules.txt";
};

int cmd_mine(const MineArgs& args) {
  const LoadedLog log = load_log(args.log);
  const CleanLog clean = preprocess(log.records, log.mrs, log.functions);

  Report report;
  if (!args.report.empty()) {
    report = load_report(args.report);
    // The report must describe the same campaign as the log.
    if (report.manifest.get_or("mr_set_hash", "") !=
            log.manifest.get_or("mr_set_hash", "-") ||
        report.manifest.get_or("seed", "") != log.manifest.get_or("seed", "-")) {
      throw UsageError("report " + args.report +
                       " does not belong to the campaign of log " + args.log);
    }
  } else {
    report.manifest = log.manifest;
    report.manifest.set("atypical_threshold", Rational(1, 10).str());
    report.summary = summarize(clean, log.manifest.require_u64("seed"));
    report.decisions = classify(report.summary);
  }

  const Rational min_support = Rational::parse(
      !args.min_support.empty() ? args.min_support
                                : report.manifest.get_or("min_support", "0.2"));
  const Rational min_confidence =
      Rational::parse(!args.min_confidence.empty()
                          ? args.min_confidence
                          : report.manifest.get_or("min_confidence", "1.0"));
  const FeatureEncoder encoder = FeatureEncoder::parse(args.features);

  Manifest manifest = report.manifest;
  manifest.set("min_support", min_support.str());
  manifest.set("min_confidence", min_confidence.str());
  manifest.set("features", encoder.descriptor());

  if (const std::optional<std::string> cell = blocked_cell(report.decisions)) {
    manifest.set("blocked", *cell);
    save_rules(args.out, {}, manifest, *cell);
    std::cerr << "campaign is blocked by a fault decision on " << *cell
              << "; wrote marker-only rules file " << args.out << "\n";
    return 0;
  }

  const std::vector<MinedRule> mined =
      mine_all(clean, report.decisions, encoder, min_support, min_confidence);
  const FinalizeResult finalized = finalize_rules(mined, report.decisions);
  for (const std::string& warning : finalized.warnings) {
    std::cerr << "warning: " << warning << "\n";
  }
  for (const std::string& warning :
       validate_rules_against_log(finalized.rules, clean)) {
    std::cerr << "warning: " << warning << "\n";
  }
  save_rules(args.out, finalized.rules, manifest, std::nullopt);
  std::cout << "wrote " << finalized.rules.size() << " rules to " << args.out
            << " (" << mined.size() << " mined)\n";
  return 0;
}

struct GenSuiteArgs {
  std::string rules;
  std::string corpus;
  std::string out = "suite.json";
  std::size_t cases_per_rule = 5;
  std::string render_text;
  bool include_advisory = false;
};

int cmd_gensuite(const GenSuiteArgs& args) {
  const RulesFile rules = load_rules(args.rules);
  if (rules.blocked.has_value()) {
    throw BlockedError("campaign is blocked by a fault decision on " +
                       *rules.blocked +
                       "; rerun phase I after fixing the SUT");
  }
  const Corpus corpus = load_corpus(args.corpus);
  if (corpus.manifest.get_or("seed", "") !=
      rules.manifest.get_or("seed", "-")) {
    throw UsageError("corpus " + args.corpus +
                     " does not belong to the campaign of rules " +
                     args.rules);
  }
  const std::vector<MRSpec> mrs = mr_set_from_manifest(rules.manifest);
  const SuiteResult result = generate_suite(
      rules.rules, corpus.data, mrs, rules.manifest.require_i64("domain_min"),
      rules.manifest.require_i64("domain_max"), rules.manifest,
      args.cases_per_rule, args.include_advisory);
  for (const std::string& warning : result.warnings) {
    std::cerr << "warning: " << warning << "\n";
  }
  save_suite(args.out, result.suite);
  if (!args.render_text.empty()) {
    std::ofstream out(args.render_text, std::ios::binary);
    if (!out) {
      throw UsageError("cannot write rendering " + args.render_text);
    }
    out << render_suite_text(result.suite);
  }
  std::cout << "wrote suite " << result.suite.suite_id << " ("
            << result.suite.tests.size() << " tests) to " << args.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"metamorphic relation refinement pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version",
                       std::string(kToolName) + " " + std::string(kToolVersion));

  FuzzArgs fuzz_args;
  CLI::App* fuzz = app.add_subcommand("fuzz", "generate and persist a corpus");
  fuzz->add_option("--count", fuzz_args.count, "pairs to draw (random mode)")
      ->envname("MREFINE_COUNT");
  fuzz->add_option("--min", fuzz_args.min, "domain minimum (inclusive)");
  fuzz->add_option("--max", fuzz_args.max, "domain maximum (inclusive)");
  fuzz->add_option("--seed", fuzz_args.seed, "master seed")
      ->envname("MREFINE_SEED");
  fuzz->add_option("--mode", fuzz_args.mode, "random | exhaustive");
  fuzz->add_option("--out", fuzz_args.out, "corpus file to write");

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "execute the campaign and write the log");
  run->add_option("--corpus", run_args.corpus, "corpus file")->required();
  run->add_option("--sut", run_args.sut,
                  "builtin:calculator or cmd:<template>");
  run->add_option("--k", run_args.k, "shared constant (default: drawn once)");
  run->add_option("--mrs", run_args.mrs, "MR set json file, or 'default'");
  run->add_option("--functions", run_args.functions,
                  "comma-separated functions (external SUT)");
  run->add_option("--out", run_args.out, "log file to write");
  run->add_option("--jobs", run_args.jobs, "worker pool size")
      ->envname("MREFINE_JOBS");

  AnalyzeArgs analyze_args;
  CLI::App* analyze =
      app.add_subcommand("analyze", "clean the log and write the summary report");
  analyze->add_option("--log", analyze_args.log, "log file")->required();
  analyze->add_option("--report", analyze_args.report, "report file to write");
  analyze->add_option("--min-support", analyze_args.min_support,
                      "mining support threshold recorded for later stages")
      ->envname("MREFINE_MIN_SUPPORT");
  analyze->add_option("--min-confidence", analyze_args.min_confidence,
                      "mining confidence threshold recorded for later stages")
      ->envname("MREFINE_MIN_CONFIDENCE");
  analyze->add_option("--atypical", analyze_args.atypical,
                      "flag cells within this distance of 0%/100%")
      ->envname("MREFINE_ATYPICAL");
  analyze->add_option("--samples", analyze_args.samples,
                      "sample rows per cell");
  analyze->add_option("--csv", analyze_args.csv,
                      "also write a per-cell csv for plotting");

  ReviewArgs review_args;
  CLI::App* review =
      app.add_subcommand("review", "print the summary and apply decisions");
  review->add_option("--report", review_args.report, "report file")->required();
  review->add_option("--decisions", review_args.decisions,
                     "cell-addressed decisions json");
  review->add_option("--out", review_args.out,
                     "output report (default: rewrite --report)");

  MineArgs mine_args;
  CLI::App* mine =
      app.add_subcommand("mine", "mine mixed cells and write the rule file");
  mine->add_option("--log", mine_args.log, "log file")->required();
  mine->add_option("--report", mine_args.report,
                   "reviewed report (default: auto-classify)");
  mine->add_option("--min-support", mine_args.min_support,
                   "support threshold (default: report entry or 0.2)")
      ->envname("MREFINE_MIN_SUPPORT");
  mine->add_option("--min-confidence", mine_args.min_confidence,
                   "confidence threshold (default: report entry or 1.0)")
      ->envname("MREFINE_MIN_CONFIDENCE");
  mine->add_option("--features", mine_args.features,
                   "encoder features: rel,zero")
      ->envname("MREFINE_FEATURES");
  mine->add_option("--out", mine_args.out, "rules file to write");

  GenSuiteArgs gensuite_args;
  CLI::App* gensuite =
      app.add_subcommand("gen-suite", "emit the regression suite manifest");
  gensuite->add_option("--rules", gensuite_args.rules, "rules file")
      ->required();
  gensuite->add_option("--corpus", gensuite_args.corpus, "corpus file")
      ->required();
  gensuite->add_option("--out", gensuite_args.out, "suite file to write");
  gensuite->add_option("--cases-per-rule", gensuite_args.cases_per_rule,
                       "concrete inputs per rule")
      ->envname("MREFINE_CASES_PER_RULE");
  gensuite->add_option("--render-text", gensuite_args.render_text,
                       "also write a plain-text rendering");
  gensuite->add_flag("--include-advisory", gensuite_args.include_advisory,
                     "emit tests for rules mined below confidence 1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (fuzz->parsed()) return cmd_fuzz(fuzz_args);
    if (run->parsed()) return cmd_run(run_args);
    if (analyze->parsed()) return cmd_analyze(analyze_args);
    if (review->parsed()) return cmd_review(review_args);
    if (mine->parsed()) return cmd_mine(mine_args);
    if (gensuite->parsed()) return cmd_gensuite(gensuite_args);
  } catch (const BlockedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const SutError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
