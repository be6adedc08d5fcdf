// Copyright 2026 The autocomp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <string>

#include "autocomp/error.hpp"

namespace autocomp {

// Exact fraction over int64 used for chance baselines and percentage
// arithmetic that must not pick up binary rounding.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1) : num_(num), den_(den) {
    if (den_ == 0) throw Error(ErrorCode::kInvalidArgument, "zero denominator");
    normalize();
  }

  // Parses a plain decimal such as "61.1" or "-8.9".
  static Rational from_decimal(std::string_view text) {
    std::string s(text);
    bool negative = !s.empty() && (s[0] == '-' || s[0] == '+');
    bool minus = negative && s[0] == '-';
    if (negative) s.erase(0, 1);
    auto dot = s.find('.');
    std::string digits = dot == std::string::npos ? s : s.substr(0, dot) + s.substr(dot + 1);
    std::int64_t den = 1;
    if (dot != std::string::npos) {
      for (std::size_t i = dot + 1; i < s.size(); ++i) den *= 10;
    }
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "not a decimal: " + std::string(text));
    }
    std::int64_t num = std::stoll(digits);
    return Rational(minus ? -num : num, den);
  }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  friend Rational operator+(Rational a, Rational b) {
    return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
  }
  friend Rational operator-(Rational a, Rational b) {
    return Rational(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
  }
  friend Rational operator*(Rational a, Rational b) {
    return Rational(a.num_ * b.num_, a.den_ * b.den_);
  }
  friend bool operator==(Rational a, Rational b) { return a.num_ == b.num_ && a.den_ == b.den_; }
  friend bool operator<(Rational a, Rational b) { return a.num_ * b.den_ < b.num_ * a.den_; }

  // Fixed-point rendering rounded half away from zero.
  std::string to_fixed(int decimals, bool explicit_sign = false) const {
    std::int64_t scale = 1;
    for (int i = 0; i < decimals; ++i) scale *= 10;
    const std::int64_t abs_num = std::llabs(num_);
    std::int64_t scaled = (abs_num * scale * 2 + den_) / (2 * den_);
    std::string body = std::to_string(scaled / scale);
    if (decimals > 0) {
      std::string frac = std::to_string(scaled % scale);
      body += "." + std::string(decimals - frac.size(), '0') + frac;
    }
    const bool negative = num_ < 0 && scaled != 0;
    if (negative) return "-" + body;
    return explicit_sign ? "+" + body : body;
  }

 private:
  void normalize() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace autocomp
