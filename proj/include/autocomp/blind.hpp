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

#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include "autocomp/hash.hpp"
#include "autocomp/parallel.hpp"

namespace autocomp {

struct BlindPrompt {
  std::string text;
  std::vector<std::string> choices;  // in presentation order, label = index + 1
  int answer_label = 0;              // label of the positive caption
  std::vector<int> sources;          // -1 for the positive, else index into negatives
};

inline constexpr std::string_view kBlindInstructions =
    "You will not see the image. Below are {k} candidate captions for it and exactly one of "
    "them is correct. Pick the caption you think is correct.\n";
inline constexpr std::string_view kBlindAnswerFormat =
    "Reply with the number of the caption and nothing else.";

// Seeded subsample of `subsample` negatives without replacement, with the
// positive inserted at a seeded position.
inline BlindPrompt build_blind_prompt(const std::string& positive,
                                      const std::vector<std::string>& negatives,
                                      std::uint64_t seed, std::size_t subsample) {
  if (subsample > negatives.size()) {
    throw Error(ErrorCode::kInvalidArgument, "subsample exceeds the number of negatives");
  }
  Rng rng = Rng::stream(seed, 0);
  std::vector<int> pool(negatives.size());
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = static_cast<int>(i);
  for (std::size_t i = 0; i < subsample; ++i) {
    const std::size_t j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(subsample);
  const std::size_t at = rng.below(subsample + 1);
  BlindPrompt p;
  p.sources = pool;
  p.sources.insert(p.sources.begin() + static_cast<std::ptrdiff_t>(at), -1);
  p.answer_label = static_cast<int>(at) + 1;
  std::string instructions(kBlindInstructions);
  instructions.replace(instructions.find("{k}"), 3, std::to_string(p.sources.size()));
  p.text = instructions + "\n";
  for (std::size_t i = 0; i < p.sources.size(); ++i) {
    const int s = p.sources[i];
    p.choices.push_back(s < 0 ? positive : negatives[static_cast<std::size_t>(s)]);
    p.text += std::to_string(i + 1) + ". " + p.choices.back() + "\n";
  }
  p.text += "\n" + std::string(kBlindAnswerFormat);
  return p;
}

// First standalone run of ASCII digits, accepted only when it is in [1, k].
inline std::optional<int> parse_choice(std::string_view output, int k) {
  if (k < 2) throw Error(ErrorCode::kInvalidArgument, "k must be >= 2");
  auto alnum = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
  for (std::size_t i = 0; i < output.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(output[i]))) continue;
    std::size_t j = i;
    while (j < output.size() && std::isdigit(static_cast<unsigned char>(output[j]))) ++j;
    const bool standalone = (i == 0 || !alnum(output[i - 1])) && (j == output.size() || !alnum(output[j]));
    if (!standalone) {
      i = j;
      continue;
    }
    const std::string_view digits = output.substr(i, j - i);
    if (digits.size() > 9) return std::nullopt;
    const int value = std::stoi(std::string(digits));
    if (value < 1 || value > k) return std::nullopt;
    return value;
  }
  return std::nullopt;
}

inline bool blind_correct(const BlindPrompt& p, std::string_view output) {
  const auto choice = parse_choice(output, static_cast<int>(p.choices.size()));
  return choice && *choice == p.answer_label;
}

struct BlindSimulation {
  std::int64_t correct = 0;
  std::int64_t prompts = 0;
  double accuracy() const { return prompts ? static_cast<double>(correct) / prompts : 0.0; }
};

// A responder that names a uniformly random label, run through the same
// prompt construction and parsing path as a real model.
inline BlindSimulation simulate_blind_random(const std::string& positive,
                                             const std::vector<std::string>& negatives,
                                             std::size_t subsample, std::int64_t prompts,
                                             std::uint64_t seed, int workers = 1) {
  constexpr std::int64_t kChunk = 5000;
  const std::int64_t chunks = (prompts + kChunk - 1) / kChunk;
  std::vector<std::int64_t> hits(static_cast<std::size_t>(chunks), 0);
  parallel_for(static_cast<std::size_t>(chunks), workers, [&](std::size_t c) {
    const std::int64_t begin = static_cast<std::int64_t>(c) * kChunk;
    const std::int64_t end = std::min(prompts, begin + kChunk);
    for (std::int64_t i = begin; i < end; ++i) {
      std::uint64_t state = seed + static_cast<std::uint64_t>(i);
      const BlindPrompt p = build_blind_prompt(positive, negatives, splitmix64(state), subsample);
      Rng responder = Rng::stream(seed ^ 0x5bd1e995ULL, static_cast<std::uint64_t>(i));
      const auto label = 1 + responder.below(p.choices.size());
      if (blind_correct(p, "The answer is " + std::to_string(label) + ".")) ++hits[c];
    }
  });
  BlindSimulation s;
  s.prompts = prompts;
  for (auto h : hits) s.correct += h;
  return s;
}

}  // namespace autocomp
