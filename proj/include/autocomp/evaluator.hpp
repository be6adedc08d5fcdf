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
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "autocomp/backend/protocol.hpp"
#include "autocomp/negatives.hpp"
#include "autocomp/parallel.hpp"
#include "autocomp/rational.hpp"

namespace autocomp {

// Candidate 0 is the positive caption.
struct ScoreMatrix {
  std::string trial_id;
  std::vector<double> scores;
  std::vector<Arrangement> arrangements;  // optional, parallel to scores
};

struct TrialOutcome {
  bool correct = false;
  std::size_t chosen_index = 0;
  bool tie = false;
  std::optional<Arrangement> chosen_arrangement;
};

// Argmax over candidates; an exact tie for the top score is never correct.
inline TrialOutcome score_trial(const ScoreMatrix& m) {
  if (m.scores.size() < 2) throw Error(ErrorCode::kInvalidArgument, "a trial needs >= 2 candidates");
  if (!m.arrangements.empty() && m.arrangements.size() != m.scores.size()) {
    throw Error(ErrorCode::kInvalidArgument, "arrangements must parallel scores");
  }
  std::size_t best = 0;
  std::size_t ties = 0;
  for (std::size_t i = 0; i < m.scores.size(); ++i) {
    if (!std::isfinite(m.scores[i])) throw Error(ErrorCode::kInvalidArgument, "non-finite score");
    if (i == 0 || m.scores[i] > m.scores[best]) {
      best = i;
      ties = 0;
    } else if (m.scores[i] == m.scores[best]) {
      ++ties;
    }
  }
  TrialOutcome out;
  out.chosen_index = best;
  out.tie = ties > 0;
  out.correct = best == 0 && !out.tie;
  if (!m.arrangements.empty()) out.chosen_arrangement = m.arrangements[best];
  return out;
}

// Aggregation ------------------------------------------------------------------

struct TrialTag {
  TaskKind task = TaskKind::kColorBinding;
  int n = 2;
  Track track = Track::kMinimal;
  Scheme scheme = Scheme::kSwap;
  std::optional<std::string> relation;  // first relation, for position concepts
  std::optional<Concept> cpt;           // needed for the error taxonomy
};

struct TaggedOutcome {
  TrialTag tag;
  TrialOutcome outcome;
};

using CellKey = std::tuple<TaskKind, int, Track, Scheme>;

struct Tally {
  std::int64_t correct = 0;
  std::int64_t total = 0;

  // Percent, exact.
  std::optional<Rational> accuracy() const {
    if (total == 0) return std::nullopt;
    return Rational(correct * 100, total);
  }
};

struct CellScore {
  Tally tally;
  std::int64_t ties = 0;
  std::map<std::string, Tally> per_relation;
  std::map<ErrorCategory, std::int64_t> errors;
  // Incorrect trials whose chosen candidate was the positive (ties) or that
  // carried no arrangement; they sit outside the error histogram.
  std::int64_t unclassified_errors = 0;
};

struct BenchmarkScores {
  std::map<CellKey, CellScore> cells;
  std::vector<CellKey> empty_cells;
};

// Micro-averaged over trials. Requested cells without trials are listed in
// `empty_cells` rather than reported as zero.
inline BenchmarkScores aggregate(const std::vector<TaggedOutcome>& outcomes,
                                 const std::vector<CellKey>& requested = {}) {
  BenchmarkScores scores;
  for (const auto& [tag, outcome] : outcomes) {
    CellScore& cell = scores.cells[CellKey{tag.task, tag.n, tag.track, tag.scheme}];
    ++cell.tally.total;
    if (outcome.correct) ++cell.tally.correct;
    if (outcome.tie) ++cell.ties;
    if (tag.task == TaskKind::kPositionBinding && tag.n == 2 && tag.scheme == Scheme::kSwap &&
        tag.relation) {
      Tally& t = cell.per_relation[*tag.relation];
      ++t.total;
      if (outcome.correct) ++t.correct;
    }
    if (outcome.correct || tag.task != TaskKind::kColorBinding ||
        tag.scheme != Scheme::kConfusion) {
      continue;
    }
    if (!tag.cpt || !outcome.chosen_arrangement || is_identity(*outcome.chosen_arrangement)) {
      ++cell.unclassified_errors;
      continue;
    }
    ++cell.errors[classify_error(*outcome.chosen_arrangement, *tag.cpt)];
  }
  for (const auto& key : requested) {
    if (!scores.cells.count(key)) scores.empty_cells.push_back(key);
  }
  return scores;
}

// Paired deltas ----------------------------------------------------------------

struct PairedDelta {
  std::optional<Rational> swap;       // contextual - minimal, percentage points
  std::optional<Rational> confusion;
};

inline PairedDelta paired_delta(Rational min_swap, Rational ctx_swap, Rational min_conf,
                                Rational ctx_conf) {
  return PairedDelta{ctx_swap - min_swap, ctx_conf - min_conf};
}

// Per (task, n): requires both tracks to have been scored on the paired set.
inline std::map<std::pair<TaskKind, int>, PairedDelta> paired_deltas(const BenchmarkScores& scores) {
  std::map<std::pair<TaskKind, int>, PairedDelta> out;
  auto acc = [&](TaskKind t, int n, Track tr, Scheme s) -> std::optional<Rational> {
    auto it = scores.cells.find(CellKey{t, n, tr, s});
    if (it == scores.cells.end()) return std::nullopt;
    return it->second.tally.accuracy();
  };
  for (const auto& [key, cell] : scores.cells) {
    const auto [task, n, track, scheme] = key;
    PairedDelta d;
    for (Scheme s : {Scheme::kSwap, Scheme::kConfusion}) {
      auto m = acc(task, n, Track::kMinimal, s);
      auto c = acc(task, n, Track::kContextual, s);
      if (m && c) (s == Scheme::kSwap ? d.swap : d.confusion) = *c - *m;
    }
    if (d.swap || d.confusion) out[{task, n}] = d;
  }
  return out;
}

// Random-chance simulation ------------------------------------------------------

struct ChanceEstimate {
  std::int64_t correct = 0;
  std::int64_t trials = 0;
  double accuracy() const { return trials ? static_cast<double>(correct) / trials : 0.0; }
};

inline constexpr std::int64_t kChanceChunk = 10000;

// Each trial draws one uniform score per candidate (positive + all closed-form
// negatives) and is scored with the argmax rule. Trials are split into
// fixed-size chunks with their own streams, so the result does not depend on
// the worker count.
inline ChanceEstimate simulate_random_chance(TaskKind task, int n, Scheme scheme,
                                             std::int64_t trials, std::uint64_t seed,
                                             int workers = 1) {
  if (trials < 1) throw Error(ErrorCode::kInvalidArgument, "trials must be >= 1");
  const std::uint64_t candidates = negative_count(task, n, scheme) + 1;
  const std::int64_t chunks = (trials + kChanceChunk - 1) / kChanceChunk;
  std::vector<std::int64_t> correct(static_cast<std::size_t>(chunks), 0);
  parallel_for(static_cast<std::size_t>(chunks), workers, [&](std::size_t c) {
    Rng rng = Rng::stream(seed, c);
    const std::int64_t begin = static_cast<std::int64_t>(c) * kChanceChunk;
    const std::int64_t end = std::min(trials, begin + kChanceChunk);
    std::int64_t hits = 0;
    for (std::int64_t t = begin; t < end; ++t) {
      const double positive = rng.unit();
      bool beaten = false;
      for (std::uint64_t k = 1; k < candidates && !beaten; ++k) beaten = rng.unit() >= positive;
      if (!beaten) ++hits;
    }
    correct[c] = hits;
  });
  ChanceEstimate est;
  est.trials = trials;
  for (auto h : correct) est.correct += h;
  return est;
}

// Live scoring through the embedding capability -----------------------------------

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) {
    throw Error(ErrorCode::kProtocolViolation, "embedding dimensions differ");
  }
  long double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<long double>(a[i]) * b[i];
    na += static_cast<long double>(a[i]) * a[i];
    nb += static_cast<long double>(b[i]) * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return static_cast<double>(dot / (std::sqrt(na) * std::sqrt(nb)));
}

// Scores each caption by cosine similarity to the image embedding.
inline std::vector<double> embedding_scores(backend::Backend& b, const backend::ImageRef& image,
                                            const std::vector<std::string>& captions) {
  const auto req = backend::embed_request(captions, &image);
  const auto res = b.call(req);
  backend::validate_result(req.capability, res.result);
  if (!res.result.contains("image_vector") || res.result.at("vectors").size() != captions.size()) {
    throw Error(ErrorCode::kProtocolViolation, "embed result must cover the image and every caption");
  }
  const auto img = res.result.at("image_vector").get<std::vector<double>>();
  std::vector<double> out;
  for (const auto& v : res.result.at("vectors")) out.push_back(cosine(v.get<std::vector<double>>(), img));
  return out;
}

}  // namespace autocomp
