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

// Test data generation: a seeded generation-based fuzzer producing pairs of
// integers, plus an exhaustive mode that enumerates the whole domain so
// downstream percentages are sample-independent. The corpus is persisted
// before anything executes and is immutable afterwards.
//
// Randomness: mt19937-64 with rejection-sampled bounded draws, so replay is
// stable for a given build regardless of the platform's distribution
// implementation. The master seed is split (splitmix64) into two streams:
// one for test data, one for campaign constants. Changing the pair count
// therefore never changes the constant k drawn for the same seed.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mrefine/common.hpp"
#include "mrefine/manifest.hpp"
#include "mrefine/mr.hpp"

namespace mrefine {

inline constexpr std::string_view kPrngName = "mt19937-64/rejection";

enum class FuzzMode {
  Random,
  Exhaustive,
};

inline std::string_view to_token(FuzzMode m) {
  return m == FuzzMode::Random ? "random" : "exhaustive";
}

inline FuzzMode fuzz_mode_from(std::string_view token) {
  if (token == "random") return FuzzMode::Random;
  if (token == "exhaustive") return FuzzMode::Exhaustive;
  throw UsageError("unknown fuzz mode '" + std::string(token) + "'");
}

struct FuzzConfig {
  std::uint64_t count = 100;
  Value domain_min = 0;
  Value domain_max = 9;
  std::uint64_t seed = 0;
  FuzzMode mode = FuzzMode::Random;

  void validate() const {
    if (domain_min > domain_max) {
      throw UsageError("empty domain: min " + std::to_string(domain_min) +
                       " > max " + std::to_string(domain_max));
    }
    if (mode == FuzzMode::Random && count == 0) {
      throw UsageError("random mode needs count >= 1");
    }
  }
};

struct TestDatum {
  std::uint64_t id = 0;
  Value a = 0;
  Value b = 0;
  friend bool operator==(const TestDatum&, const TestDatum&) = default;
};

/// Seeded uniform integer source with an implementation-pinned draw
/// algorithm (rejection sampling on top of mt19937-64).
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  std::uint64_t below(std::uint64_t bound) {
    // bound == 0 means the full 64-bit range.
    if (bound == 0) return engine_();
    const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return r % bound;
    }
  }

  Value value_in(Value lo, Value hi) {
    // Width in uint64 space; wraps to 0 for the full int64 range, which
    // below() treats as unbounded.
    const std::uint64_t width = static_cast<std::uint64_t>(hi) -
                                static_cast<std::uint64_t>(lo) + 1;
    return static_cast<Value>(static_cast<std::uint64_t>(lo) + below(width));
  }

 private:
  std::mt19937_64 engine_;
};

namespace detail {

inline std::uint64_t data_stream_seed(std::uint64_t master) {
  std::uint64_t s = master;
  return splitmix64(s);
}

inline std::uint64_t constant_stream_seed(std::uint64_t master) {
  std::uint64_t s = master;
  splitmix64(s);  // skip the data stream slot
  return splitmix64(s);
}

}  // namespace detail

/// Generates the corpus. Random mode draws `count` i.i.d. uniform pairs;
/// exhaustive mode emits the full cross product in lexicographic order and
/// ignores `count`. Ids are dense from 0.
inline std::vector<TestDatum> generate(const FuzzConfig& config) {
  config.validate();
  std::vector<TestDatum> out;
  if (config.mode == FuzzMode::Exhaustive) {
    const std::uint64_t side = static_cast<std::uint64_t>(config.domain_max) -
                               static_cast<std::uint64_t>(config.domain_min) +
                               1;
    constexpr std::uint64_t kMaxExhaustivePairs = 10'000'000;
    // side == 0 is the wrapped full-int64 domain; reject alongside anything
    // whose square exceeds the cap (checked before squaring).
    if (side == 0 || side > kMaxExhaustivePairs ||
        side * side > kMaxExhaustivePairs) {
      throw UsageError("exhaustive mode over this domain would produce more "
                       "than " +
                       std::to_string(kMaxExhaustivePairs) + " pairs");
    }
    out.reserve(side * side);
    std::uint64_t id = 0;
    for (Value a = config.domain_min;; ++a) {
      for (Value b = config.domain_min;; ++b) {
        out.push_back({id++, a, b});
        if (b == config.domain_max) break;
      }
      if (a == config.domain_max) break;
    }
    return out;
  }
  SplitRng rng(detail::data_stream_seed(config.seed));
  out.reserve(config.count);
  for (std::uint64_t id = 0; id < config.count; ++id) {
    const Value a = rng.value_in(config.domain_min, config.domain_max);
    const Value b = rng.value_in(config.domain_min, config.domain_max);
    out.push_back({id, a, b});
  }
  return out;
}

/// One uniform draw in [lo, hi] from the constant stream. Deterministic per
/// master seed and independent of how much test data was generated.
inline Value draw_constant_k(std::uint64_t master_seed, Value lo, Value hi) {
  if (lo > hi) {
    throw UsageError("constant range is empty: lo " + std::to_string(lo) +
                     " > hi " + std::to_string(hi));
  }
  SplitRng rng(detail::constant_stream_seed(master_seed));
  return rng.value_in(lo, hi);
}

inline Manifest corpus_manifest(const FuzzConfig& config) {
  Manifest m;
  m.set("tool", std::string(kToolName) + " " + std::string(kToolVersion));
  m.set_u64("seed", config.seed);
  m.set_i64("domain_min", config.domain_min);
  m.set_i64("domain_max", config.domain_max);
  m.set("mode", to_token(config.mode));
  if (config.mode == FuzzMode::Random) {
    m.set_u64("count", config.count);
    m.set("distribution", "uniform");
  }
  m.set("prng", kPrngName);
  return m;
}

// Corpus file: "id,a,b" header, manifest comment block, one decimal record
// per line.
inline void save_corpus(const std::filesystem::path& path,
                        std::span<const TestDatum> data,
                        const Manifest& manifest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write corpus file " + path.string());
  out << "id,a,b\n";
  manifest.write_comment_block(out);
  for (const TestDatum& d : data) {
    out << d.id << ',' << d.a << ',' << d.b << '\n';
  }
  if (!out) throw UsageError("short write to corpus file " + path.string());
}

struct Corpus {
  std::vector<TestDatum> data;
  Manifest manifest;
};

inline Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open corpus file " + path.string());
  std::string line;
  if (!std::getline(in, line) || std::string_view(trim(line)) != "id,a,b") {
    throw UsageError(path.string() + ": expected corpus header 'id,a,b'");
  }
  Corpus corpus;
  std::uint64_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view sv = trim(line);
    if (sv.empty()) continue;
    if (Manifest::is_comment(sv)) {
      corpus.manifest.parse_comment_line(sv);
      continue;
    }
    const std::vector<std::string> fields = split(sv, ',');
    if (fields.size() != 3) {
      throw UsageError(path.string() + ":" + std::to_string(lineno) +
                       ": expected 3 fields");
    }
    try {
      corpus.data.push_back({std::stoull(fields[0]), std::stoll(fields[1]),
                             std::stoll(fields[2])});
    } catch (const std::exception&) {
      throw UsageError(path.string() + ":" + std::to_string(lineno) +
                       ": malformed integer field");
    }
  }
  corpus.manifest.verify_recorded_hash(path.string());
  for (std::size_t i = 0; i < corpus.data.size(); ++i) {
    if (corpus.data[i].id != i) {
      throw UsageError(path.string() + ": corpus ids are not dense from 0");
    }
  }
  return corpus;
}

}  // namespace mrefine
