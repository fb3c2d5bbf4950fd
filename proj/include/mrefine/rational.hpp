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

// Exact rational arithmetic. Violation percentages, supports, confidences
// and lifts are all ratios of small counts; carrying them as normalized
// int64 fractions keeps every comparison and threshold test exact. Decimal
// strings are produced only at the rendering boundary (round half to even).

#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <string>

#include "mrefine/common.hpp"

namespace mrefine {

class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t value) : num_(value), den_(1) {}  // NOLINT: implicit
  Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    if (den_ == 0) throw Error("rational with zero denominator");
    normalize();
  }

  static Rational ratio(std::uint64_t part, std::uint64_t total) {
    if (total == 0) throw Error("ratio over empty total");
    return Rational(static_cast<std::int64_t>(part),
                    static_cast<std::int64_t>(total));
  }

  /// Exact parse of "3", "-1.25" or "num/den" forms; no binary rounding.
  static Rational parse(std::string_view text) {
    const std::string s{trim(text)};
    if (s.empty()) throw UsageError("empty ratio");
    try {
      const std::size_t slash = s.find('/');
      if (slash != std::string::npos) {
        return Rational(std::stoll(s.substr(0, slash)),
                        std::stoll(s.substr(slash + 1)));
      }
      const std::size_t dot = s.find('.');
      if (dot == std::string::npos) return Rational(std::stoll(s));
      const std::string frac = s.substr(dot + 1);
      if (frac.empty() || frac.find_first_not_of("0123456789") !=
                              std::string::npos) {
        throw UsageError("malformed ratio '" + s + "'");
      }
      std::int64_t den = 1;
      for (std::size_t i = 0; i < frac.size(); ++i) {
        if (den > INT64_MAX / 10) throw UsageError("ratio too precise");
        den *= 10;
      }
      const std::string whole_text = s.substr(0, dot);
      const std::int64_t whole =
          whole_text.empty() || whole_text == "-" ? 0 : std::stoll(whole_text);
      const bool negative = !whole_text.empty() && whole_text[0] == '-';
      const std::int64_t frac_value = std::stoll(frac);
      return Rational(whole * den + (negative ? -frac_value : frac_value),
                      den);
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception&) {
      throw UsageError("malformed ratio '" + s + "'");
    }
  }

  /// "num/den" form; parses back exactly.
  std::string str() const {
    return den_ == 1 ? std::to_string(num_)
                     : std::to_string(num_) + "/" + std::to_string(den_);
  }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_zero() const { return num_ == 0; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a,
                                          const Rational& b) {
    const __int128 lhs = static_cast<__int128>(a.num_) * b.den_;
    const __int128 rhs = static_cast<__int128>(b.num_) * a.den_;
    if (lhs < rhs) return std::strong_ordering::less;
    if (lhs > rhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return make(static_cast<__int128>(a.num_) * b.den_ +
                    static_cast<__int128>(b.num_) * a.den_,
                static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return make(static_cast<__int128>(a.num_) * b.den_ -
                    static_cast<__int128>(b.num_) * a.den_,
                static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return make(static_cast<__int128>(a.num_) * b.num_,
                static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw Error("rational division by zero");
    return make(static_cast<__int128>(a.num_) * b.den_,
                static_cast<__int128>(a.den_) * b.num_);
  }

  double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  /// Fixed-point decimal string with `places` fractional digits, round half
  /// to even. fixed(3) of 100/61 is "1.639".
  std::string fixed(int places) const {
    std::int64_t scale = 1;
    for (int i = 0; i < places; ++i) scale *= 10;
    const bool negative = num_ < 0;
    const __int128 n =
        negative ? -static_cast<__int128>(num_) : static_cast<__int128>(num_);
    const __int128 scaled = n * scale;
    __int128 q = scaled / den_;
    const __int128 r = scaled % den_;
    if (2 * r > den_) {
      ++q;
    } else if (2 * r == den_ && (q & 1) != 0) {
      ++q;
    }
    std::string digits;
    if (q == 0) digits = "0";
    while (q != 0) {
      digits.insert(digits.begin(), static_cast<char>('0' + int(q % 10)));
      q /= 10;
    }
    while (digits.size() < static_cast<std::size_t>(places) + 1) {
      digits.insert(digits.begin(), '0');
    }
    std::string out;
    if (negative && digits.find_first_not_of('0') != std::string::npos) {
      out += '-';
    }
    out += digits.substr(0, digits.size() - static_cast<std::size_t>(places));
    if (places > 0) {
      out += '.';
      out += digits.substr(digits.size() - static_cast<std::size_t>(places));
    }
    return out;
  }

  /// Percentage rendering used in summary reports: 19/100 -> "19.0".
  std::string percent(int places = 1) const {
    return (*this * Rational(100)).fixed(places);
  }

 private:
  static Rational make(__int128 num, __int128 den) {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const __int128 a = num < 0 ? -num : num;
    __int128 g = gcd128(a, den);
    if (g == 0) g = 1;
    num /= g;
    den /= g;
    constexpr __int128 lo = INT64_MIN;
    constexpr __int128 hi = INT64_MAX;
    if (num < lo || num > hi || den > hi) {
      throw OverflowError("rational overflow");
    }
    Rational r;
    r.num_ = static_cast<std::int64_t>(num);
    r.den_ = static_cast<std::int64_t>(den);
    return r;
  }

  static __int128 gcd128(__int128 a, __int128 b) {
    while (b != 0) {
      const __int128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  void normalize() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const std::int64_t g =
        std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace mrefine
