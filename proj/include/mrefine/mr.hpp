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

// Metamorphic relations over integer pairs: input transformations, expected
// output relations, and the checker that turns a (source output, follow-up
// output) pair into a violation verdict. The checker path is exact integer
// arithmetic throughout; there is deliberately no tolerance knob.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mrefine/common.hpp"
#include "mrefine/manifest.hpp"

namespace mrefine {

// Operand / output type. int64 comfortably covers the required exact
// integer range; transformations detect overflow instead of wrapping.
using Value = std::int64_t;

struct ValuePair {
  Value a = 0;
  Value b = 0;
  friend bool operator==(const ValuePair&, const ValuePair&) = default;
};

inline Value checked_add(Value a, Value b, std::string_view what) {
  Value out;
  if (__builtin_add_overflow(a, b, &out)) {
    throw OverflowError("integer overflow in " + std::string(what));
  }
  return out;
}

inline Value checked_sub(Value a, Value b, std::string_view what) {
  Value out;
  if (__builtin_sub_overflow(a, b, &out)) {
    throw OverflowError("integer overflow in " + std::string(what));
  }
  return out;
}

inline Value checked_mul(Value a, Value b, std::string_view what) {
  Value out;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw OverflowError("integer overflow in " + std::string(what));
  }
  return out;
}

enum class TransformKind {
  Permute,
  MultiplyEachByK,
  AddKToEach,
  SubtractKFromEach,
};

enum class OutputRelation {
  RemainEqual,
  Increase,
};

enum class Verdict {
  NotViolated,
  Violated,
};

inline std::string_view to_token(TransformKind k) {
  switch (k) {
    case TransformKind::Permute: return "permute";
    case TransformKind::MultiplyEachByK: return "multiply_each_by_k";
    case TransformKind::AddKToEach: return "add_k_to_each";
    case TransformKind::SubtractKFromEach: return "subtract_k_from_each";
  }
  throw Error("unreachable transform kind");
}

inline TransformKind transform_kind_from(std::string_view token) {
  if (token == "permute") return TransformKind::Permute;
  if (token == "multiply_each_by_k") return TransformKind::MultiplyEachByK;
  if (token == "add_k_to_each") return TransformKind::AddKToEach;
  if (token == "subtract_k_from_each") return TransformKind::SubtractKFromEach;
  throw UsageError("unknown transformation kind '" + std::string(token) + "'");
}

inline std::string_view to_token(OutputRelation r) {
  switch (r) {
    case OutputRelation::RemainEqual: return "remain_equal";
    case OutputRelation::Increase: return "increase";
  }
  throw Error("unreachable output relation");
}

inline OutputRelation output_relation_from(std::string_view token) {
  if (token == "remain_equal") return OutputRelation::RemainEqual;
  if (token == "increase") return OutputRelation::Increase;
  throw UsageError("unknown output relation '" + std::string(token) + "'");
}

// Log column token ("NV" / "V").
inline std::string_view to_token(Verdict v) {
  return v == Verdict::NotViolated ? "NV" : "V";
}

inline Verdict verdict_from(std::string_view token) {
  if (token == "NV") return Verdict::NotViolated;
  if (token == "V") return Verdict::Violated;
  throw UsageError("unknown verdict token '" + std::string(token) + "'");
}

// Transaction-item token ("NotViolated" / "Violated").
inline std::string_view verdict_item_token(Verdict v) {
  return v == Verdict::NotViolated ? "NotViolated" : "Violated";
}

struct Transformation {
  TransformKind kind = TransformKind::Permute;
  Value k = 0;  // unused for Permute

  void validate() const {
    switch (kind) {
      case TransformKind::Permute:
        return;
      case TransformKind::MultiplyEachByK:
        if (k <= 1) {
          throw UsageError("multiply_each_by_k requires k > 1, got k=" +
                           std::to_string(k));
        }
        return;
      case TransformKind::AddKToEach:
      case TransformKind::SubtractKFromEach:
        if (k <= 0) {
          throw UsageError(std::string(to_token(kind)) +
                           " requires k > 0, got k=" + std::to_string(k));
        }
        return;
    }
    throw Error("unreachable transform kind");
  }
};

struct MRSpec {
  std::string id;
  Transformation transformation;
  OutputRelation expected = OutputRelation::RemainEqual;
  std::string description;
};

/// Applies a transformation to an input pair. Exact; overflow is a hard
/// error rather than a wrapped value.
inline ValuePair transform_inputs(const Transformation& t, Value a, Value b) {
  switch (t.kind) {
    case TransformKind::Permute:
      return {b, a};
    case TransformKind::MultiplyEachByK:
      return {checked_mul(a, t.k, "multiply_each_by_k"),
              checked_mul(b, t.k, "multiply_each_by_k")};
    case TransformKind::AddKToEach:
      return {checked_add(a, t.k, "add_k_to_each"),
              checked_add(b, t.k, "add_k_to_each")};
    case TransformKind::SubtractKFromEach:
      return {checked_sub(a, t.k, "subtract_k_from_each"),
              checked_sub(b, t.k, "subtract_k_from_each")};
  }
  throw Error("unreachable transform kind");
}

/// The MR checker predicate. RemainEqual is exact equality; Increase is
/// strict, so a tie counts as a violation.
inline Verdict check_mr(OutputRelation expected, Value source_out,
                        Value followup_out) noexcept {
  switch (expected) {
    case OutputRelation::RemainEqual:
      return source_out == followup_out ? Verdict::NotViolated
                                        : Verdict::Violated;
    case OutputRelation::Increase:
      return source_out < followup_out ? Verdict::NotViolated
                                       : Verdict::Violated;
  }
  return Verdict::Violated;  // unreachable
}

inline void validate_mr_set(const std::vector<MRSpec>& mrs) {
  if (mrs.empty()) throw UsageError("MR set is empty");
  std::set<std::string> seen;
  for (const MRSpec& mr : mrs) {
    if (!is_ident(mr.id)) {
      throw UsageError("MR id '" + mr.id +
                       "' is not a valid identifier ([A-Za-z0-9_-]+)");
    }
    if (!seen.insert(mr.id).second) {
      throw UsageError("duplicate MR id '" + mr.id + "'");
    }
    try {
      mr.transformation.validate();
    } catch (const UsageError& e) {
      throw UsageError(mr.id + ": " + e.what());
    }
  }
}

/// The four-relation default set, all parameterized by one shared campaign
/// constant k. MR2 needs k > 1, MR3/MR4 need k > 0; the whole set is
/// rejected up front if k does not satisfy every member.
inline std::vector<MRSpec> default_mr_set(Value k) {
  std::vector<MRSpec> mrs = {
      {"MR1",
       {TransformKind::Permute, 0},
       OutputRelation::RemainEqual,
       "swap the operands; outputs must match"},
      {"MR2",
       {TransformKind::MultiplyEachByK, k},
       OutputRelation::Increase,
       "scale both operands by k (k > 1); output must strictly increase"},
      {"MR3",
       {TransformKind::AddKToEach, k},
       OutputRelation::RemainEqual,
       "add k (k > 0) to both operands; outputs must match"},
      {"MR4",
       {TransformKind::SubtractKFromEach, k},
       OutputRelation::RemainEqual,
       "subtract k (k > 0) from both operands; outputs must match"},
  };
  validate_mr_set(mrs);
  return mrs;
}

/// Loads an MR set from a json document: a list of objects with fields
/// id, transform, expected, and optional k / description. A member without
/// its own k inherits the campaign constant.
inline std::vector<MRSpec> load_mr_set(const std::filesystem::path& path,
                                       Value campaign_k) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open MR set file " + path.string());
  nlohmann::ordered_json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("MR set file " + path.string() + ": " + e.what());
  }
  if (!doc.is_array()) {
    throw UsageError("MR set file " + path.string() +
                     ": expected a top-level array");
  }
  std::vector<MRSpec> mrs;
  for (const auto& entry : doc) {
    if (!entry.is_object() || !entry.contains("id") ||
        !entry.contains("transform") || !entry.contains("expected")) {
      throw UsageError("MR set file " + path.string() +
                       ": each entry needs id, transform and expected");
    }
    MRSpec mr;
    mr.id = entry["id"].get<std::string>();
    mr.transformation.kind =
        transform_kind_from(entry["transform"].get<std::string>());
    mr.transformation.k =
        entry.contains("k") ? entry["k"].get<Value>() : campaign_k;
    mr.expected = output_relation_from(entry["expected"].get<std::string>());
    if (entry.contains("description")) {
      mr.description = entry["description"].get<std::string>();
    }
    mrs.push_back(std::move(mr));
  }
  validate_mr_set(mrs);
  return mrs;
}

inline std::uint64_t mr_set_hash(const std::vector<MRSpec>& mrs) {
  std::string canon;
  for (const MRSpec& mr : mrs) {
    canon += mr.id;
    canon += '|';
    canon += to_token(mr.transformation.kind);
    canon += '|';
    canon += mr.transformation.kind == TransformKind::Permute
                 ? "-"
                 : std::to_string(mr.transformation.k);
    canon += '|';
    canon += to_token(mr.expected);
    canon += '\n';
  }
  return fnv1a64(canon);
}

// Manifest embedding. Each MR becomes one entry
//   mr.<id> = <kind>,<k|->,<expected>
// in set order, plus the set fingerprint.
inline void mr_set_to_manifest(const std::vector<MRSpec>& mrs, Manifest& m) {
  for (const MRSpec& mr : mrs) {
    std::string v(to_token(mr.transformation.kind));
    v += ',';
    v += mr.transformation.kind == TransformKind::Permute
             ? "-"
             : std::to_string(mr.transformation.k);
    v += ',';
    v += to_token(mr.expected);
    m.set("mr." + mr.id, v);
  }
  m.set("mr_set_hash", to_hex(mr_set_hash(mrs)));
}

inline std::vector<MRSpec> mr_set_from_manifest(const Manifest& m) {
  std::vector<MRSpec> mrs;
  for (const auto& [key, value] : m.entries()) {
    if (key.rfind("mr.", 0) != 0) continue;
    MRSpec mr;
    mr.id = key.substr(3);
    const std::vector<std::string> parts = split(value, ',');
    if (parts.size() != 3) {
      throw UsageError("malformed manifest MR entry '" + key + "=" + value +
                       "'");
    }
    mr.transformation.kind = transform_kind_from(parts[0]);
    mr.transformation.k = parts[1] == "-" ? 0 : std::stoll(parts[1]);
    mr.expected = output_relation_from(parts[2]);
    mrs.push_back(std::move(mr));
  }
  validate_mr_set(mrs);
  return mrs;
}

}  // namespace mrefine
