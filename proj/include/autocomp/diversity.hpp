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
#include <set>
#include <string>
#include <vector>

#include "autocomp/error.hpp"
#include "autocomp/text.hpp"

namespace autocomp {

struct DistinctCounts {
  std::size_t unique = 0;
  std::size_t total = 0;
  double ratio() const { return total ? static_cast<double>(unique) / total : 0.0; }
};

// Unique n-grams over all n-gram occurrences in the corpus, with the caption
// tokenizer (lowercase, edge punctuation stripped).
inline DistinctCounts distinct_n_counts(const std::vector<std::string>& captions, int n) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "n must be >= 1");
  std::set<std::vector<std::string>> seen;
  DistinctCounts c;
  for (const auto& caption : captions) {
    const auto words = token_texts(caption);
    if (words.size() < static_cast<std::size_t>(n)) continue;
    for (std::size_t i = 0; i + n <= words.size(); ++i) {
      seen.emplace(words.begin() + static_cast<std::ptrdiff_t>(i),
                   words.begin() + static_cast<std::ptrdiff_t>(i + n));
      ++c.total;
    }
  }
  if (c.total == 0) {
    throw Error(ErrorCode::kInvalidArgument, "no caption has at least n tokens");
  }
  c.unique = seen.size();
  return c;
}

inline double distinct_n(const std::vector<std::string>& captions, int n) {
  return distinct_n_counts(captions, n).ratio();
}

// 1 - mean of the strictly upper triangle of a symmetric similarity matrix
// with unit diagonal. Summation is compensated in long double so that the
// result is the correctly rounded double for exactly representable inputs.
inline double semantic_diversity(const std::vector<std::vector<double>>& sim) {
  const std::size_t n = sim.size();
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two items");
  long double sum = 0.0L;
  long double comp = 0.0L;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (sim[i].size() != n) throw Error(ErrorCode::kInvalidArgument, "matrix must be square");
    if (std::fabs(sim[i][i] - 1.0) > 1e-9) {
      throw Error(ErrorCode::kInvalidArgument, "diagonal must be 1");
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      if (sim[j].size() != n || sim[i][j] != sim[j][i]) {
        throw Error(ErrorCode::kInvalidArgument, "matrix must be symmetric");
      }
      const long double v = sim[i][j];
      const long double t = sum + v;
      comp += std::fabs(sum) >= std::fabs(v) ? (sum - t) + v : (v - t) + sum;
      sum = t;
      ++count;
    }
  }
  const long double mean = (sum + comp) / static_cast<long double>(count);
  return static_cast<double>(1.0L - mean);
}

}  // namespace autocomp
