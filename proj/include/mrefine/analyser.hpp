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

// Log analysis: cleaning (duplicate and inconsistent rows), the per
// (function, MR) violation summary, the exact 0%/100% auto-classification,
// and merging of reviewer decisions. Percentages are exact rationals;
// rendered strings never feed back into any comparison.

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrefine/common.hpp"
#include "mrefine/harness.hpp"
#include "mrefine/manifest.hpp"
#include "mrefine/mr.hpp"
#include "mrefine/rational.hpp"
#include "mrefine/tdg.hpp"

namespace mrefine {

struct CleanLog {
  std::vector<ExecutionRecord> records;
  std::vector<MRSpec> mrs;
  std::vector<std::string> functions;
  std::uint64_t dropped_duplicates = 0;
  std::uint64_t dropped_inconsistent = 0;
};

/// Cleans a raw record list: duplicate (id, function) rows are dropped
/// keeping the first; rows whose stored verdicts disagree with verdicts
/// recomputed from the stored outputs are dropped as inconsistent.
inline CleanLog preprocess(const std::vector<ExecutionRecord>& records,
                           const std::vector<MRSpec>& mrs,
                           const std::vector<std::string>& functions) {
  if (records.empty()) throw UsageError("log is empty");
  validate_mr_set(mrs);
  if (functions.empty()) throw UsageError("function list is empty");

  CleanLog clean;
  clean.mrs = mrs;
  clean.functions = functions;
  std::set<std::pair<std::uint64_t, std::string>> seen;
  for (const ExecutionRecord& rec : records) {
    if (!seen.insert({rec.id, rec.function}).second) {
      ++clean.dropped_duplicates;
      continue;
    }
    if (rec.outcomes.size() != mrs.size()) {
      ++clean.dropped_inconsistent;
      continue;
    }
    bool consistent = true;
    for (std::size_t m = 0; m < mrs.size(); ++m) {
      if (check_mr(mrs[m].expected, rec.source_out,
                   rec.outcomes[m].followup_out) != rec.outcomes[m].verdict) {
        consistent = false;
        break;
      }
    }
    if (!consistent) {
      ++clean.dropped_inconsistent;
      continue;
    }
    clean.records.push_back(rec);
  }
  if (clean.records.empty()) {
    throw UsageError("log is empty after cleaning (" +
                     std::to_string(clean.dropped_duplicates) +
                     " duplicates, " +
                     std::to_string(clean.dropped_inconsistent) +
                     " inconsistent rows dropped)");
  }
  return clean;
}

struct SampleRow {
  std::uint64_t id = 0;
  Value a = 0;
  Value b = 0;
  friend bool operator==(const SampleRow&, const SampleRow&) = default;
};

struct CellStats {
  std::string function;
  std::string mr;
  std::uint64_t total = 0;
  std::uint64_t violated = 0;
  Rational violated_pct;
  std::vector<SampleRow> sample_violating;
  std::vector<SampleRow> sample_nonviolating;
};

struct VerdictSummary {
  std::vector<CellStats> cells;  // function-major, MR order within
};

namespace detail {

// Seeded partial Fisher-Yates; the per-cell seed mixes the campaign seed
// with the cell name so sample picks are stable across runs and jobs.
inline std::vector<SampleRow> pick_samples(
    const std::vector<SampleRow>& pool, std::size_t want, std::uint64_t seed,
    const std::string& cell_tag) {
  if (pool.size() <= want) return pool;
  std::vector<SampleRow> rows = pool;
  SplitRng rng(seed ^ fnv1a64(cell_tag));
  std::vector<SampleRow> out;
  out.reserve(want);
  std::size_t remaining = rows.size();
  for (std::size_t i = 0; i < want; ++i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(remaining));
    out.push_back(rows[j]);
    rows[j] = rows[remaining - 1];
    --remaining;
  }
  return out;
}

}  // namespace detail

/// Exact violation counts per (function, MR) cell, with up to
/// `sample_size` seeded example rows per side for manual inspection.
inline VerdictSummary summarize(const CleanLog& clean, std::uint64_t seed,
                                std::size_t sample_size = 5) {
  if (clean.records.empty()) throw UsageError("clean log is empty");
  VerdictSummary summary;
  for (const std::string& function : clean.functions) {
    for (std::size_t m = 0; m < clean.mrs.size(); ++m) {
      CellStats cell;
      cell.function = function;
      cell.mr = clean.mrs[m].id;
      std::vector<SampleRow> violating;
      std::vector<SampleRow> nonviolating;
      for (const ExecutionRecord& rec : clean.records) {
        if (rec.function != function) continue;
        ++cell.total;
        if (rec.outcomes[m].verdict == Verdict::Violated) {
          ++cell.violated;
          violating.push_back({rec.id, rec.a, rec.b});
        } else {
          nonviolating.push_back({rec.id, rec.a, rec.b});
        }
      }
      if (cell.total == 0) {
        throw UsageError("no records for function '" + function + "'");
      }
      cell.violated_pct = Rational::ratio(cell.violated, cell.total);
      cell.sample_violating = detail::pick_samples(
          violating, sample_size, seed, function + "." + cell.mr + ".v");
      cell.sample_nonviolating = detail::pick_samples(
          nonviolating, sample_size, seed, function + "." + cell.mr + ".nv");
      summary.cells.push_back(std::move(cell));
    }
  }
  return summary;
}

enum class Classification { FullMatch, NoMatch, Mixed, Fault };
enum class IncludeAs { PositiveTest, NegativeTest, Exclude };

inline std::string_view to_token(Classification c) {
  switch (c) {
    case Classification::FullMatch: return "full_match";
    case Classification::NoMatch: return "no_match";
    case Classification::Mixed: return "mixed";
    case Classification::Fault: return "fault";
  }
  throw Error("unreachable classification");
}

inline Classification classification_from(std::string_view token) {
  if (token == "full_match") return Classification::FullMatch;
  if (token == "no_match") return Classification::NoMatch;
  if (token == "mixed") return Classification::Mixed;
  if (token == "fault") return Classification::Fault;
  throw UsageError("unknown classification '" + std::string(token) + "'");
}

inline std::string_view to_token(IncludeAs i) {
  switch (i) {
    case IncludeAs::PositiveTest: return "positive";
    case IncludeAs::NegativeTest: return "negative";
    case IncludeAs::Exclude: return "exclude";
  }
  throw Error("unreachable include_as");
}

inline IncludeAs include_as_from(std::string_view token) {
  if (token == "positive") return IncludeAs::PositiveTest;
  if (token == "negative") return IncludeAs::NegativeTest;
  if (token == "exclude") return IncludeAs::Exclude;
  throw UsageError("unknown include_as '" + std::string(token) + "'");
}

struct FeedbackDecision {
  std::string function;
  std::string mr;
  Classification classification = Classification::Mixed;
  std::optional<IncludeAs> include_as;
  bool atypical = false;
};

/// Default classification: only exact 0% / 100% cells auto-classify, as
/// full matches (positive tests) and no-matches (negative tests)
/// respectively; everything in between stays Mixed and is left to rule
/// mining or reviewer overrides. Cells within `atypical_threshold` of
/// either end are flagged for manual inspection.
inline std::vector<FeedbackDecision> classify(
    const VerdictSummary& summary, Rational atypical_threshold = {1, 10}) {
  std::vector<FeedbackDecision> out;
  const Rational zero(0);
  const Rational one(1);
  for (const CellStats& cell : summary.cells) {
    FeedbackDecision d;
    d.function = cell.function;
    d.mr = cell.mr;
    if (cell.violated_pct == zero) {
      d.classification = Classification::FullMatch;
      d.include_as = IncludeAs::PositiveTest;
    } else if (cell.violated_pct == one) {
      d.classification = Classification::NoMatch;
      d.include_as = IncludeAs::NegativeTest;
    } else {
      d.classification = Classification::Mixed;
      d.atypical = cell.violated_pct <= atypical_threshold ||
                   cell.violated_pct >= one - atypical_threshold;
    }
    out.push_back(std::move(d));
  }
  return out;
}

/// Applies reviewer overrides (cell-addressed json, keys "function.MR") on
/// top of the defaults. A Fault classification anywhere blocks phase II.
inline std::vector<FeedbackDecision> apply_feedback(
    std::vector<FeedbackDecision> defaults, const nlohmann::ordered_json& doc,
    const VerdictSummary& summary) {
  if (!doc.is_object()) {
    throw UsageError("decisions document must be a json object");
  }
  for (const auto& [key, value] : doc.items()) {
    const std::size_t dot = key.find('.');
    if (dot == std::string::npos) {
      throw UsageError("decision key '" + key +
                       "' is not of the form function.MR");
    }
    const std::string function = key.substr(0, dot);
    const std::string mr = key.substr(dot + 1);
    FeedbackDecision* target = nullptr;
    for (FeedbackDecision& d : defaults) {
      if (d.function == function && d.mr == mr) target = &d;
    }
    if (target == nullptr) {
      throw UsageError("decision references unknown cell '" + key + "'");
    }
    if (!value.is_object()) {
      throw UsageError("decision for '" + key + "' must be a json object");
    }
    for (const auto& [field, _] : value.items()) {
      if (field != "classification" && field != "include_as") {
        throw UsageError("decision for '" + key + "' has unknown field '" +
                         field + "'");
      }
    }
    if (value.contains("classification")) {
      const Classification c =
          classification_from(value["classification"].get<std::string>());
      // Keep the classification honest with the measured counts.
      const CellStats* cell = nullptr;
      for (const CellStats& s : summary.cells) {
        if (s.function == function && s.mr == mr) cell = &s;
      }
      if (cell != nullptr) {
        if (c == Classification::FullMatch && !cell->violated_pct.is_zero()) {
          throw UsageError("cell '" + key + "' has violations (" +
                           cell->violated_pct.percent() +
                           "%); full_match is only valid at exactly 0%");
        }
        if (c == Classification::NoMatch &&
            cell->violated_pct != Rational(1)) {
          throw UsageError("cell '" + key + "' is below 100% violations; "
                           "no_match is only valid at exactly 100%");
        }
      }
      target->classification = c;
    }
    if (value.contains("include_as")) {
      if (value["include_as"].is_null()) {
        target->include_as.reset();
      } else {
        target->include_as =
            include_as_from(value["include_as"].get<std::string>());
      }
    }
  }
  return defaults;
}

inline std::optional<std::string> blocked_cell(
    const std::vector<FeedbackDecision>& decisions) {
  for (const FeedbackDecision& d : decisions) {
    if (d.classification == Classification::Fault) {
      return d.function + "." + d.mr;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Report document: manifest + per-cell stats + decisions, as ordered json.

struct Report {
  Manifest manifest;
  VerdictSummary summary;
  std::vector<FeedbackDecision> decisions;
};

namespace detail {

inline nlohmann::ordered_json samples_json(const std::vector<SampleRow>& rows) {
  auto arr = nlohmann::ordered_json::array();
  for (const SampleRow& r : rows) {
    arr.push_back({r.id, r.a, r.b});
  }
  return arr;
}

inline std::vector<SampleRow> samples_from_json(
    const nlohmann::ordered_json& arr, std::string_view where) {
  std::vector<SampleRow> out;
  if (!arr.is_array()) {
    throw UsageError(std::string(where) + ": samples must be an array");
  }
  for (const auto& row : arr) {
    if (!row.is_array() || row.size() != 3) {
      throw UsageError(std::string(where) + ": sample rows are [id,a,b]");
    }
    out.push_back({row[0].get<std::uint64_t>(), row[1].get<Value>(),
                   row[2].get<Value>()});
  }
  return out;
}

}  // namespace detail

// The cells object is keyed by function, then MR, in campaign order.
inline nlohmann::ordered_json report_to_json(const Report& report) {
  nlohmann::ordered_json doc;
  doc["manifest"] = report.manifest.to_json();
  const std::optional<std::string> blocked = blocked_cell(report.decisions);
  doc["blocked"] = blocked.has_value() ? nlohmann::ordered_json(*blocked)
                                       : nlohmann::ordered_json(nullptr);
  auto cells = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < report.summary.cells.size(); ++i) {
    const CellStats& cell = report.summary.cells[i];
    const FeedbackDecision& d = report.decisions.at(i);
    if (d.function != cell.function || d.mr != cell.mr) {
      throw Error("report cells and decisions are out of step");
    }
    nlohmann::ordered_json c;
    c["total"] = cell.total;
    c["violated"] = cell.violated;
    c["pct"] = {{"num", cell.violated_pct.num()},
                {"den", cell.violated_pct.den()},
                {"percent", cell.violated_pct.percent()}};
    c["classification"] = to_token(d.classification);
    c["include_as"] = d.include_as.has_value()
                          ? nlohmann::ordered_json(to_token(*d.include_as))
                          : nlohmann::ordered_json(nullptr);
    c["atypical"] = d.atypical;
    c["samples_violating"] = detail::samples_json(cell.sample_violating);
    c["samples_nonviolating"] = detail::samples_json(cell.sample_nonviolating);
    cells[cell.function][cell.mr] = std::move(c);
  }
  doc["cells"] = std::move(cells);
  return doc;
}

inline Report report_from_json(const nlohmann::ordered_json& doc,
                               std::string_view where) {
  if (!doc.is_object() || !doc.contains("manifest") || !doc.contains("cells") ||
      !doc["cells"].is_object()) {
    throw UsageError(std::string(where) + ": malformed report document");
  }
  Report report;
  report.manifest = Manifest::from_json(doc["manifest"], where);
  for (const auto& [function, by_mr] : doc["cells"].items()) {
    if (!by_mr.is_object()) {
      throw UsageError(std::string(where) + ": cells." + function +
                       " is not an object");
    }
    for (const auto& [mr, c] : by_mr.items()) {
      CellStats cell;
      cell.function = function;
      cell.mr = mr;
      cell.total = c.at("total").get<std::uint64_t>();
      cell.violated = c.at("violated").get<std::uint64_t>();
      cell.violated_pct = Rational(c.at("pct").at("num").get<std::int64_t>(),
                                   c.at("pct").at("den").get<std::int64_t>());
      if (cell.violated_pct != Rational::ratio(cell.violated, cell.total)) {
        throw UsageError(std::string(where) + ": cell " + cell.function + "." +
                         cell.mr + " has an inconsistent percentage");
      }
      cell.sample_violating =
          detail::samples_from_json(c.at("samples_violating"), where);
      cell.sample_nonviolating =
          detail::samples_from_json(c.at("samples_nonviolating"), where);
      FeedbackDecision d;
      d.function = cell.function;
      d.mr = cell.mr;
      d.classification =
          classification_from(c.at("classification").get<std::string>());
      if (!c.at("include_as").is_null()) {
        d.include_as = include_as_from(c.at("include_as").get<std::string>());
      }
      d.atypical = c.at("atypical").get<bool>();
      report.summary.cells.push_back(std::move(cell));
      report.decisions.push_back(std::move(d));
    }
  }
  if (report.summary.cells.empty()) {
    throw UsageError(std::string(where) + ": report has no cells");
  }
  return report;
}

inline void save_report(const std::filesystem::path& path,
                        const Report& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write report file " + path.string());
  out << report_to_json(report).dump(2) << '\n';
  if (!out) throw UsageError("short write to report file " + path.string());
}

inline Report load_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open report file " + path.string());
  nlohmann::ordered_json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("report file " + path.string() + ": " + e.what());
  }
  return report_from_json(doc, path.string());
}

/// Human-readable summary table (percentages rendered to one decimal).
inline std::string render_summary_table(const Report& report) {
  std::ostringstream os;
  os << "function  MR      total  violated  pct%    class       include   "
        "flags\n";
  for (std::size_t i = 0; i < report.summary.cells.size(); ++i) {
    const CellStats& cell = report.summary.cells[i];
    const FeedbackDecision& d = report.decisions[i];
    const std::string pct = cell.violated_pct.percent();
    const std::string cls(to_token(d.classification));
    const std::string inc =
        d.include_as.has_value() ? std::string(to_token(*d.include_as)) : "-";
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-9s %-7s %5llu %9llu  %6s  %-11s %-9s %s",
                  cell.function.c_str(), cell.mr.c_str(),
                  static_cast<unsigned long long>(cell.total),
                  static_cast<unsigned long long>(cell.violated), pct.c_str(),
                  cls.c_str(), inc.c_str(), d.atypical ? "atypical" : "");
    os << buf << '\n';
  }
  const std::optional<std::string> blocked = blocked_cell(report.decisions);
  if (blocked.has_value()) {
    os << "campaign BLOCKED by fault decision on " << *blocked << '\n';
  }
  return os.str();
}

/// Per-cell csv (one row per cell) for external plotting.
inline void save_summary_csv(const std::filesystem::path& path,
                             const Report& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write csv file " + path.string());
  out << "function,mr,total,violated,violated_pct\n";
  for (const CellStats& cell : report.summary.cells) {
    out << cell.function << ',' << cell.mr << ',' << cell.total << ','
        << cell.violated << ',' << cell.violated_pct.fixed(3) << '\n';
  }
}

}  // namespace mrefine
