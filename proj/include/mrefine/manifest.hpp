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

// Campaign manifest: an ordered key/value record of everything that went
// into a run (seed, k, domain, MR set, SUT, thresholds, tool version).
// Every artifact embeds the manifest plus its FNV-1a hash so any file can
// be traced back to the exact campaign that produced it. Text artifacts
// carry it as '#'-prefixed lines after the csv header; json artifacts as a
// "manifest" object.

#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mrefine/common.hpp"

namespace mrefine {

class Manifest {
 public:
  using Json = nlohmann::ordered_json;

  void set(std::string_view key, std::string_view value) {
    if (key.empty() || key.find('=') != std::string_view::npos ||
        key.find('\n') != std::string_view::npos) {
      throw Error("bad manifest key: '" + std::string(key) + "'");
    }
    if (value.find('\n') != std::string_view::npos) {
      throw Error("manifest value for '" + std::string(key) +
                  "' contains a newline");
    }
    for (auto& [k, v] : entries_) {
      if (k == key) {
        v = std::string(value);
        return;
      }
    }
    entries_.emplace_back(std::string(key), std::string(value));
  }

  void set_u64(std::string_view key, std::uint64_t value) {
    set(key, std::to_string(value));
  }
  void set_i64(std::string_view key, std::int64_t value) {
    set(key, std::to_string(value));
  }

  bool contains(std::string_view key) const { return find(key) != nullptr; }

  const std::string* find(std::string_view key) const {
    for (const auto& [k, v] : entries_) {
      if (k == key) return &v;
    }
    return nullptr;
  }

  const std::string& require(std::string_view key) const {
    const std::string* v = find(key);
    if (v == nullptr) {
      throw UsageError("manifest is missing required entry '" +
                       std::string(key) + "'");
    }
    return *v;
  }

  std::string get_or(std::string_view key, std::string_view fallback) const {
    const std::string* v = find(key);
    return v != nullptr ? *v : std::string(fallback);
  }

  std::uint64_t require_u64(std::string_view key) const {
    return parse_int<std::uint64_t>(key, require(key));
  }
  std::int64_t require_i64(std::string_view key) const {
    return parse_int<std::int64_t>(key, require(key));
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

  // The hash covers the canonical "key=value\n" rendering of all entries.
  std::string canonical() const {
    std::string out;
    for (const auto& [k, v] : entries_) {
      out += k;
      out += '=';
      out += v;
      out += '\n';
    }
    return out;
  }

  std::string hash_hex() const { return to_hex(fnv1a64(canonical())); }

  void write_comment_block(std::ostream& os) const {
    os << "# manifest=" << hash_hex() << "\n";
    for (const auto& [k, v] : entries_) {
      os << "# " << k << "=" << v << "\n";
    }
  }

  static bool is_comment(std::string_view line) {
    return !line.empty() && line.front() == '#';
  }

  /// Consumes one '#' line from an artifact. Returns false for comment
  /// lines that are not manifest entries (e.g. free-form notes).
  bool parse_comment_line(std::string_view line) {
    line = trim(line);
    if (line.empty() || line.front() != '#') return false;
    line = trim(line.substr(1));
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) return false;
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = line.substr(eq + 1);
    if (key.empty()) return false;
    if (key == "manifest") {
      recorded_hash_ = std::string(value);
      return true;
    }
    entries_.emplace_back(std::string(key), std::string(value));
    return true;
  }

  /// After parsing, checks the recorded hash against the recomputed one.
  void verify_recorded_hash(std::string_view where) const {
    if (!recorded_hash_.has_value()) {
      throw UsageError(std::string(where) + ": no manifest hash recorded");
    }
    if (*recorded_hash_ != hash_hex()) {
      throw UsageError(std::string(where) +
                       ": manifest hash mismatch (file edited or corrupted)");
    }
  }

  Json to_json() const {
    Json entries = Json::object();
    for (const auto& [k, v] : entries_) entries[k] = v;
    Json out = Json::object();
    out["hash"] = hash_hex();
    out["entries"] = std::move(entries);
    return out;
  }

  static Manifest from_json(const Json& j, std::string_view where) {
    if (!j.is_object() || !j.contains("entries") ||
        !j["entries"].is_object()) {
      throw UsageError(std::string(where) + ": malformed manifest object");
    }
    Manifest m;
    for (const auto& [k, v] : j["entries"].items()) {
      if (!v.is_string()) {
        throw UsageError(std::string(where) + ": manifest entry '" + k +
                         "' is not a string");
      }
      m.entries_.emplace_back(k, v.get<std::string>());
    }
    if (j.contains("hash") && j["hash"].is_string()) {
      m.recorded_hash_ = j["hash"].get<std::string>();
      m.verify_recorded_hash(where);
    }
    return m;
  }

 private:
  template <typename T>
  static T parse_int(std::string_view key, const std::string& text) {
    T value{};
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
      throw UsageError("manifest entry '" + std::string(key) +
                       "' is not an integer: '" + text + "'");
    }
    return value;
  }

  std::vector<std::pair<std::string, std::string>> entries_;
  std::optional<std::string> recorded_hash_;
};

}  // namespace mrefine
