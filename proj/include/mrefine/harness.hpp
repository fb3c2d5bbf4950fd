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

// Campaign harness. Runs every function of a pluggable SUT on every corpus
// datum, applies each MR's transformation, executes the follow-up inputs,
// and records per-MR verdicts. The log stores raw outputs next to the
// verdicts so every verdict can be recomputed from the file alone.
//
// Two adapters: the builtin calculator (add/sub/mul over int64, overflow
// checked) and an external command spawned once per execution with
// argv = [function, a, b], expected to print one decimal number.

#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "mrefine/common.hpp"
#include "mrefine/manifest.hpp"
#include "mrefine/mr.hpp"
#include "mrefine/tdg.hpp"

extern char** environ;

namespace mrefine {

struct SutAdapter {
  enum class Kind { Builtin, External };

  Kind kind = Kind::Builtin;
  std::vector<std::string> functions;
  std::string command;  // whitespace-split template, External only

  static SutAdapter builtin() {
    return {Kind::Builtin, {"add", "sub", "mul"}, ""};
  }

  static SutAdapter external(std::string command,
                             std::vector<std::string> functions) {
    if (command.empty()) throw UsageError("external SUT command is empty");
    if (functions.empty()) throw UsageError("external SUT function list is empty");
    for (const std::string& f : functions) {
      if (!is_ident(f)) {
        throw UsageError("function name '" + f + "' is not a valid identifier");
      }
    }
    return {Kind::External, std::move(functions), std::move(command)};
  }

  /// Parses a CLI descriptor: "builtin:calculator" or "cmd:<template>".
  static SutAdapter parse(std::string_view descriptor,
                          const std::vector<std::string>& functions) {
    if (descriptor == "builtin:calculator") {
      if (!functions.empty() && functions != builtin().functions) {
        throw UsageError("builtin:calculator exposes exactly add,sub,mul");
      }
      return builtin();
    }
    if (descriptor.rfind("cmd:", 0) == 0) {
      std::string cmd(trim(descriptor.substr(4)));
      return external(std::move(cmd), functions.empty()
                                          ? builtin().functions
                                          : functions);
    }
    throw UsageError("unknown SUT descriptor '" + std::string(descriptor) +
                     "' (expected builtin:calculator or cmd:<template>)");
  }

  std::string descriptor() const {
    return kind == Kind::Builtin ? "builtin:calculator" : "cmd:" + command;
  }
};

namespace detail {

inline Value builtin_calculator(const std::string& function, Value a, Value b) {
  if (function == "add") return checked_add(a, b, "add");
  if (function == "sub") return checked_sub(a, b, "sub");
  if (function == "mul") return checked_mul(a, b, "mul");
  throw UsageError("unknown builtin function '" + function + "'");
}

inline Value parse_single_decimal(const std::string& text,
                                  const std::string& context) {
  const std::string_view sv = trim(text);
  if (sv.empty()) {
    throw SutError(context + ": empty output, expected one decimal number");
  }
  std::size_t pos = 0;
  Value value = 0;
  try {
    value = std::stoll(std::string(sv), &pos);
  } catch (const std::exception&) {
    throw SutError(context + ": unparseable output '" + std::string(sv) + "'");
  }
  if (pos != sv.size()) {
    throw SutError(context + ": trailing junk in output '" + std::string(sv) +
                   "'");
  }
  return value;
}

// Spawns the command with stdout captured through a pipe. One process per
// execution; the caller caps concurrency via the worker pool size.
inline Value run_external(const SutAdapter& adapter,
                          const std::string& function, Value a, Value b) {
  std::vector<std::string> args;
  for (const std::string& part : split(adapter.command, ' ')) {
    if (!part.empty()) args.push_back(part);
  }
  if (args.empty()) throw UsageError("external SUT command is empty");
  args.push_back(function);
  args.push_back(std::to_string(a));
  args.push_back(std::to_string(b));

  const std::string context = "external SUT '" + args[0] + "' " + function +
                              "(" + std::to_string(a) + "," +
                              std::to_string(b) + ")";

  std::vector<char*> argv;
  argv.reserve(args.size() + 1);
  for (std::string& s : args) argv.push_back(s.data());
  argv.push_back(nullptr);

  int fds[2];
  if (pipe(fds) != 0) throw SutError(context + ": pipe() failed");

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, fds[1], STDOUT_FILENO);
  posix_spawn_file_actions_addclose(&actions, fds[0]);
  posix_spawn_file_actions_addclose(&actions, fds[1]);

  pid_t pid = -1;
  const int rc =
      posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  close(fds[1]);
  if (rc != 0) {
    close(fds[0]);
    throw SutError(context + ": spawn failed (" + std::to_string(rc) + ")");
  }

  std::string output;
  char buf[512];
  ssize_t n;
  while ((n = read(fds[0], buf, sizeof buf)) > 0) {
    output.append(buf, static_cast<std::size_t>(n));
  }
  close(fds[0]);

  int status = 0;
  if (waitpid(pid, &status, 0) < 0) {
    throw SutError(context + ": waitpid failed");
  }
  if (!WIFEXITED(status)) {
    throw SutError(context + ": terminated by signal " +
                   std::to_string(WTERMSIG(status)));
  }
  if (WEXITSTATUS(status) != 0) {
    throw SutError(context + ": exit status " +
                   std::to_string(WEXITSTATUS(status)));
  }
  return parse_single_decimal(output, context);
}

}  // namespace detail

/// Runs one function of the SUT on one input pair.
inline Value execute_sut(const SutAdapter& adapter, const std::string& function,
                         Value a, Value b) {
  bool known = false;
  for (const std::string& f : adapter.functions) known = known || f == function;
  if (!known) {
    throw UsageError("function '" + function +
                     "' is not exposed by the SUT adapter");
  }
  if (adapter.kind == SutAdapter::Kind::Builtin) {
    try {
      return detail::builtin_calculator(function, a, b);
    } catch (const OverflowError& e) {
      throw SutError("builtin calculator " + function + "(" +
                     std::to_string(a) + "," + std::to_string(b) +
                     "): " + e.what());
    }
  }
  return detail::run_external(adapter, function, a, b);
}

struct MrOutcome {
  Value followup_out = 0;
  Verdict verdict = Verdict::NotViolated;
  friend bool operator==(const MrOutcome&, const MrOutcome&) = default;
};

struct ExecutionRecord {
  std::uint64_t id = 0;  // TestDatum id; shared by the per-function records
  Value a = 0;
  Value b = 0;
  std::string function;
  Value source_out = 0;
  std::vector<MrOutcome> outcomes;  // parallel to the campaign MR set
  friend bool operator==(const ExecutionRecord&,
                         const ExecutionRecord&) = default;
};

/// Campaign abort: carries the contiguous record prefix completed before
/// the failing execution, so a partial log with an explicit marker can be
/// written instead of a silently truncated one.
class CampaignError : public SutError {
 public:
  CampaignError(const std::string& message,
                std::vector<ExecutionRecord> partial)
      : SutError(message), partial_(std::move(partial)) {}

  const std::vector<ExecutionRecord>& partial() const { return partial_; }

 private:
  std::vector<ExecutionRecord> partial_;
};

namespace detail {

inline ExecutionRecord execute_one(const SutAdapter& adapter,
                                   const std::vector<MRSpec>& mrs,
                                   const TestDatum& datum,
                                   const std::string& function) {
  ExecutionRecord rec;
  rec.id = datum.id;
  rec.a = datum.a;
  rec.b = datum.b;
  rec.function = function;
  rec.source_out = execute_sut(adapter, function, datum.a, datum.b);
  rec.outcomes.reserve(mrs.size());
  for (const MRSpec& mr : mrs) {
    ValuePair followup;
    try {
      followup = transform_inputs(mr.transformation, datum.a, datum.b);
    } catch (const OverflowError& e) {
      throw SutError(mr.id + " on input id " + std::to_string(datum.id) +
                     ": " + e.what());
    }
    const Value out = execute_sut(adapter, function, followup.a, followup.b);
    rec.outcomes.push_back({out, check_mr(mr.expected, rec.source_out, out)});
  }
  return rec;
}

}  // namespace detail

/// Executes the full (datum x function) grid. Records come back datum-major
/// in corpus order with functions in adapter order, regardless of how many
/// workers ran them. On any execution failure the campaign aborts and the
/// thrown CampaignError carries the completed contiguous prefix.
inline std::vector<ExecutionRecord> run_campaign(
    std::span<const TestDatum> corpus, const std::vector<MRSpec>& mrs,
    const SutAdapter& adapter, int jobs = 1) {
  if (corpus.empty()) throw UsageError("corpus is empty");
  validate_mr_set(mrs);

  const std::size_t total = corpus.size() * adapter.functions.size();
  const auto task = [&](std::size_t index) {
    const TestDatum& datum = corpus[index / adapter.functions.size()];
    const std::string& function =
        adapter.functions[index % adapter.functions.size()];
    return detail::execute_one(adapter, mrs, datum, function);
  };

  std::vector<std::optional<ExecutionRecord>> slots(total);
  std::optional<std::string> first_error;
  std::size_t first_error_index = total;

  if (jobs <= 1) {
    for (std::size_t i = 0; i < total; ++i) {
      try {
        slots[i] = task(i);
      } catch (const Error& e) {
        first_error = e.what();
        first_error_index = i;
        break;
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    const auto worker = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= total || failed.load()) return;
        try {
          slots[i] = task(i);
        } catch (const Error& e) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error || i < first_error_index) {
            first_error = e.what();
            first_error_index = i;
          }
          failed.store(true);
        }
      }
    };
    std::vector<std::thread> pool;
    const std::size_t n_workers =
        std::min<std::size_t>(static_cast<std::size_t>(jobs), total);
    pool.reserve(n_workers);
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  std::vector<ExecutionRecord> records;
  records.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    if (!slots[i].has_value()) break;  // contiguous prefix only
    records.push_back(std::move(*slots[i]));
  }
  if (first_error) {
    throw CampaignError("campaign aborted: " + *first_error,
                        std::move(records));
  }
  if (records.size() != total) {
    throw Error("internal: campaign produced a gap without an error");
  }
  return records;
}

// ---------------------------------------------------------------------------
// Log file io. Header names every column explicitly:
//   id,a,b,function,source_out,<MR>_followup_out,<MR>_verdict,...
// followed by the manifest comment block, then one record per line with
// verdicts serialized as NV/V. An aborted campaign appends a final
// "# aborted=<reason>" marker; loaders refuse such files.

inline std::string log_header(const std::vector<MRSpec>& mrs) {
  std::string h = "id,a,b,function,source_out";
  for (const MRSpec& mr : mrs) {
    h += ',' + mr.id + "_followup_out," + mr.id + "_verdict";
  }
  return h;
}

inline void save_log(const std::filesystem::path& path,
                     std::span<const ExecutionRecord> records,
                     const std::vector<MRSpec>& mrs, const Manifest& manifest,
                     const std::optional<std::string>& aborted = std::nullopt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write log file " + path.string());
  out << log_header(mrs) << '\n';
  manifest.write_comment_block(out);
  for (const ExecutionRecord& rec : records) {
    if (rec.outcomes.size() != mrs.size()) {
      throw Error("record id " + std::to_string(rec.id) +
                  " does not cover the full MR set");
    }
    out << rec.id << ',' << rec.a << ',' << rec.b << ',' << rec.function << ','
        << rec.source_out;
    for (const MrOutcome& o : rec.outcomes) {
      out << ',' << o.followup_out << ',' << to_token(o.verdict);
    }
    out << '\n';
  }
  if (aborted.has_value()) {
    std::string reason = *aborted;
    for (char& c : reason) {
      if (c == '\n' || c == '\r') c = ' ';
    }
    out << "# aborted=" << reason << '\n';
  }
  if (!out) throw UsageError("short write to log file " + path.string());
}

struct LoadedLog {
  std::vector<ExecutionRecord> records;
  std::vector<MRSpec> mrs;
  std::vector<std::string> functions;
  Manifest manifest;
};

inline LoadedLog load_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open log file " + path.string());
  std::string line;
  if (!std::getline(in, line)) {
    throw UsageError(path.string() + ": empty log file");
  }

  // Recover MR ids from the header columns; semantics come from the
  // manifest entries once those are parsed.
  const std::vector<std::string> columns = split(trim(line), ',');
  if (columns.size() < 7 || columns[0] != "id" || columns[1] != "a" ||
      columns[2] != "b" || columns[3] != "function" ||
      columns[4] != "source_out" || (columns.size() - 5) % 2 != 0) {
    throw UsageError(path.string() + ": malformed log header");
  }
  std::vector<std::string> mr_ids;
  for (std::size_t i = 5; i < columns.size(); i += 2) {
    const std::string& out_col = columns[i];
    const std::string& verdict_col = columns[i + 1];
    constexpr std::string_view kOutSuffix = "_followup_out";
    constexpr std::string_view kVerdictSuffix = "_verdict";
    if (out_col.size() <= kOutSuffix.size() ||
        out_col.substr(out_col.size() - kOutSuffix.size()) != kOutSuffix) {
      throw UsageError(path.string() + ": bad log column '" + out_col + "'");
    }
    const std::string id = out_col.substr(0, out_col.size() - kOutSuffix.size());
    if (verdict_col != id + std::string(kVerdictSuffix)) {
      throw UsageError(path.string() + ": log columns for MR '" + id +
                       "' are not paired");
    }
    mr_ids.push_back(id);
  }

  LoadedLog log;
  std::uint64_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view sv = trim(line);
    if (sv.empty()) continue;
    if (Manifest::is_comment(sv)) {
      log.manifest.parse_comment_line(sv);
      continue;
    }
    const std::vector<std::string> fields = split(sv, ',');
    if (fields.size() != 5 + 2 * mr_ids.size()) {
      throw UsageError(path.string() + ":" + std::to_string(lineno) +
                       ": wrong field count");
    }
    ExecutionRecord rec;
    try {
      rec.id = std::stoull(fields[0]);
      rec.a = std::stoll(fields[1]);
      rec.b = std::stoll(fields[2]);
      rec.function = fields[3];
      rec.source_out = std::stoll(fields[4]);
      for (std::size_t m = 0; m < mr_ids.size(); ++m) {
        rec.outcomes.push_back({std::stoll(fields[5 + 2 * m]),
                                verdict_from(fields[6 + 2 * m])});
      }
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception&) {
      throw UsageError(path.string() + ":" + std::to_string(lineno) +
                       ": malformed record");
    }
    log.records.push_back(std::move(rec));
  }

  if (const std::string* aborted = log.manifest.find("aborted")) {
    throw UsageError(path.string() + ": log is partial (campaign aborted: " +
                     *aborted + ")");
  }
  log.manifest.verify_recorded_hash(path.string());
  log.mrs = mr_set_from_manifest(log.manifest);
  if (log.mrs.size() != mr_ids.size()) {
    throw UsageError(path.string() +
                     ": manifest MR set does not match log columns");
  }
  for (std::size_t i = 0; i < mr_ids.size(); ++i) {
    if (log.mrs[i].id != mr_ids[i]) {
      throw UsageError(path.string() + ": manifest MR order (" +
                       log.mrs[i].id + ") does not match log columns (" +
                       mr_ids[i] + ")");
    }
  }
  log.functions = split(log.manifest.require("functions"), ',');
  return log;
}

}  // namespace mrefine
