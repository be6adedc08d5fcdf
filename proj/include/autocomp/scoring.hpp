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

#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "autocomp/blind.hpp"
#include "autocomp/dataset.hpp"
#include "autocomp/evaluator.hpp"
#include "autocomp/report.hpp"

// Evaluation over a curated manifest: argmax scoring from score files or live
// embeddings, and the caption-only (blind) multiple-choice check.

namespace autocomp {

inline std::string trial_id(const ManifestRecord& r, Scheme s) {
  return r.concept_id() + ":" + std::string(to_string(r.track)) + ":" + std::string(to_string(s));
}

inline TrialTag trial_tag(const ManifestRecord& r, Scheme s) {
  TrialTag tag{r.cpt.task(), r.cpt.n(), r.track, s, std::nullopt, r.cpt};
  if (r.cpt.task() == TaskKind::kPositionBinding && !r.cpt.relations().empty()) {
    tag.relation = r.cpt.relations().front().name;
  }
  return tag;
}

struct ScoredTrial {
  std::string concept_id;
  TaggedOutcome tagged;
};

// Records that carry trials: validated, with negative sets.
inline std::vector<const ManifestRecord*> scorable_records(const std::vector<ManifestRecord>& records) {
  std::vector<const ManifestRecord*> out;
  std::set<std::pair<std::string, Track>> seen;
  for (const auto& r : records) {
    if (r.status != RecordStatus::kValidated || r.negatives.empty()) continue;
    if (seen.insert({r.concept_id(), r.track}).second) out.push_back(&r);
  }
  return out;
}

struct LiveScoring {
  std::vector<ScoredTrial> trials;
  std::vector<std::string> failures;
};

// Cosine scores from the Embed capability, one request per (record, scheme).
inline LiveScoring score_live(const std::vector<ManifestRecord>& records, backend::Backend& b,
                              int workers = 1) {
  struct Job {
    const ManifestRecord* r;
    Scheme scheme;
  };
  std::vector<Job> jobs;
  for (const auto* r : scorable_records(records)) {
    for (const auto& [scheme, set] : r->negatives) jobs.push_back({r, scheme});
  }
  std::vector<std::optional<ScoredTrial>> slots(jobs.size());
  std::vector<std::string> errors(jobs.size());
  parallel_for(jobs.size(), workers, [&](std::size_t i) {
    const auto& [r, scheme] = jobs[i];
    const NegativeSet& set = r->negatives.at(scheme);
    ScoreMatrix m;
    m.trial_id = trial_id(*r, scheme);
    std::vector<std::string> texts{r->caption->text};
    m.arrangements.push_back(identity_arrangement(r->cpt));
    for (const auto& v : set.variants) {
      texts.push_back(v.text);
      m.arrangements.push_back(v.arrangement);
    }
    if (texts.size() < 2) return;
    try {
      m.scores = embedding_scores(b, *r->image, texts);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kInvalidArgument || e.code() == ErrorCode::kInvariantViolation) throw;
      errors[i] = m.trial_id + ": " + e.what();
      return;
    }
    slots[i] = ScoredTrial{r->concept_id(), {trial_tag(*r, scheme), score_trial(m)}};
  });
  LiveScoring out;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (slots[i]) out.trials.push_back(std::move(*slots[i]));
    if (!errors[i].empty()) out.failures.push_back(errors[i]);
  }
  return out;
}

// Score file: JSONL with trial_id ("<concept_id>:<track>:<scheme>") and
// scores. Without "candidates" the scores follow storage order (positive,
// then the negative set's variants); with it, each entry names "positive" or
// "<scheme>:<variant index>".
inline std::vector<ScoredTrial> score_file(const std::vector<ManifestRecord>& records,
                                           const std::filesystem::path& path) {
  std::map<std::string, std::pair<const ManifestRecord*, Scheme>> by_trial;
  for (const auto* r : scorable_records(records)) {
    for (const auto& [scheme, set] : r->negatives) by_trial[trial_id(*r, scheme)] = {r, scheme};
  }
  std::vector<ScoredTrial> out;
  std::istringstream lines(read_file(path));
  std::size_t line_no = 0;
  for (std::string line; std::getline(lines, line);) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto bad = [&](const std::string& what) {
      throw Error(ErrorCode::kInvalidArgument,
                  path.string() + ":" + std::to_string(line_no) + ": " + what);
    };
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) bad("not a JSON object");
    if (!j.contains("trial_id") || !j.contains("scores")) bad("needs trial_id and scores");
    auto it = by_trial.find(j.at("trial_id").get<std::string>());
    if (it == by_trial.end()) bad("unknown trial " + j.at("trial_id").dump());
    const auto& [r, scheme] = it->second;
    const NegativeSet& set = r->negatives.at(scheme);
    ScoreMatrix m;
    m.trial_id = it->first;
    const auto scores = j.at("scores").get<std::vector<double>>();
    if (!j.contains("candidates")) {
      if (scores.size() != set.variants.size() + 1) bad("score count does not match the candidates");
      m.scores = scores;
      m.arrangements.push_back(identity_arrangement(r->cpt));
      for (const auto& v : set.variants) m.arrangements.push_back(v.arrangement);
    } else {
      const auto ids = j.at("candidates").get<std::vector<std::string>>();
      if (ids.size() != scores.size()) bad("candidates and scores differ in length");
      const std::string prefix = std::string(to_string(scheme)) + ":";
      std::optional<double> positive;
      for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] == "positive") {
          if (positive) bad("positive listed twice");
          positive = scores[i];
        }
      }
      if (!positive) bad("candidates must include the positive");
      m.scores.push_back(*positive);
      m.arrangements.push_back(identity_arrangement(r->cpt));
      for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] == "positive") continue;
        if (!ids[i].starts_with(prefix)) bad("candidate '" + ids[i] + "' is not from this scheme");
        std::size_t k = 0;
        try {
          k = std::stoul(ids[i].substr(prefix.size()));
        } catch (const std::exception&) {
          bad("candidate '" + ids[i] + "' has no index");
        }
        if (k >= set.variants.size()) bad("candidate '" + ids[i] + "' out of range");
        m.scores.push_back(scores[i]);
        m.arrangements.push_back(set.variants[k].arrangement);
      }
    }
    out.push_back({r->concept_id(), {trial_tag(*r, scheme), score_trial(m)}});
  }
  return out;
}

struct EvalResult {
  BenchmarkScores scores;
  BenchmarkScores paired;  // restricted to concepts validated in both tracks
  std::size_t trials = 0;
};

inline EvalResult evaluate(const std::vector<ManifestRecord>& records,
                           const std::vector<ScoredTrial>& trials) {
  std::set<std::pair<TaskKind, int>> cells;
  std::set<Track> tracks;
  for (const auto* r : scorable_records(records)) {
    cells.insert({r->cpt.task(), r->cpt.n()});
    tracks.insert(r->track);
  }
  std::vector<CellKey> requested;
  for (const auto& [task, n] : cells) {
    for (Track t : tracks) {
      for (Scheme s : {Scheme::kSwap, Scheme::kConfusion}) requested.push_back({task, n, t, s});
    }
  }
  const auto paired_ids = curate_benchmarks(records).paired_ids;
  std::vector<TaggedOutcome> all, paired;
  for (const auto& t : trials) {
    all.push_back(t.tagged);
    if (paired_ids.count(t.concept_id)) paired.push_back(t.tagged);
  }
  return EvalResult{aggregate(all, requested), aggregate(paired), trials.size()};
}

// Blind multiple-choice check ---------------------------------------------------

struct BlindOptions {
  Scheme scheme = Scheme::kConfusion;
  std::size_t subsample = 49;
  std::uint64_t seed = 0;
  int workers = 1;
  backend::TextGenParams sampling;
};

struct BlindCell {
  Tally tally;
  std::int64_t unparsed = 0;
  std::int64_t failed = 0;
  Rational chance_sum{0};  // sum over prompts of 1/k

  std::optional<Rational> chance() const {
    if (tally.total == 0) return std::nullopt;
    return chance_sum * Rational(100, tally.total);
  }
};

using BlindResults = std::map<CellKey, BlindCell>;

inline BlindResults blind_eval(const std::vector<ManifestRecord>& records, backend::Backend& llm,
                               const BlindOptions& options = {}) {
  std::vector<const ManifestRecord*> todo;
  for (const auto* r : scorable_records(records)) {
    auto it = r->negatives.find(options.scheme);
    if (it != r->negatives.end() && !it->second.variants.empty()) todo.push_back(r);
  }
  struct Result {
    bool ok = false, correct = false, parsed = false;
    std::size_t k = 0;
  };
  std::vector<Result> results(todo.size());
  parallel_for(todo.size(), options.workers, [&](std::size_t i) {
    const ManifestRecord& r = *todo[i];
    std::vector<std::string> negs;
    for (const auto& v : r.negatives.at(options.scheme).variants) negs.push_back(v.text);
    const std::size_t sub = std::min(options.subsample, negs.size());
    const std::uint64_t seed = options.seed ^ hash64(trial_id(r, options.scheme));
    const BlindPrompt p = build_blind_prompt(r.caption->text, negs, seed, sub);
    try {
      const auto req = backend::text_request("", p.text, 1, seed, options.sampling);
      const auto res = llm.call(req);
      backend::validate_result(req.capability, res.result);
      const std::string answer = res.result.at("text").get<std::string>();
      const int k = static_cast<int>(p.choices.size());
      results[i] = Result{true, blind_correct(p, answer), parse_choice(answer, k).has_value(),
                          p.choices.size()};
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kInvalidArgument) throw;
    }
  });
  BlindResults out;
  for (std::size_t i = 0; i < todo.size(); ++i) {
    const ManifestRecord& r = *todo[i];
    BlindCell& cell = out[CellKey{r.cpt.task(), r.cpt.n(), r.track, options.scheme}];
    if (!results[i].ok) {
      ++cell.failed;
      continue;
    }
    ++cell.tally.total;
    if (results[i].correct) ++cell.tally.correct;
    if (!results[i].parsed) ++cell.unparsed;
    cell.chance_sum = cell.chance_sum + Rational(1, static_cast<std::int64_t>(results[i].k));
  }
  return out;
}

inline json to_json(const BlindResults& results) {
  json cells = json::array();
  for (const auto& [key, cell] : results) {
    json c = cell_key_json(key);
    c["tally"] = to_json(cell.tally);
    c["unparsed"] = cell.unparsed;
    c["failed"] = cell.failed;
    c["chance"] = cell.chance() ? json(cell.chance()->to_fixed(1)) : json("n/a");
    cells.push_back(c);
  }
  return json{{"cells", cells}};
}

inline std::string blind_table(const BlindResults& results) {
  std::vector<std::vector<std::string>> rows{
      {"task", "n", "track", "scheme", "accuracy", "chance", "count", "unparsed", "failed"}};
  for (const auto& [key, cell] : results) {
    const auto& [task, n, track, scheme] = key;
    rows.push_back({std::string(to_string(task)), std::to_string(n), std::string(to_string(track)),
                    std::string(to_string(scheme)), detail::pct(cell.tally.accuracy()),
                    detail::pct(cell.chance()), std::to_string(cell.tally.total),
                    std::to_string(cell.unparsed), std::to_string(cell.failed)});
  }
  return detail::render_table(rows);
}

}  // namespace autocomp
