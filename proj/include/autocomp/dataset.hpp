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

#include <algorithm>
#include <filesystem>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "autocomp/backend/protocol.hpp"
#include "autocomp/caption.hpp"
#include "autocomp/io.hpp"
#include "autocomp/negatives.hpp"
#include "autocomp/rational.hpp"
#include "autocomp/validation.hpp"

namespace autocomp {

inline constexpr std::string_view kManifestSchema = "autocomp/1";

enum class RecordStatus { kPending, kCaptioned, kDiscarded, kSynthesized, kErrored, kValidated, kRejected };

inline std::string_view to_string(RecordStatus s) {
  switch (s) {
    case RecordStatus::kPending: return "pending";
    case RecordStatus::kCaptioned: return "captioned";
    case RecordStatus::kDiscarded: return "discarded";
    case RecordStatus::kSynthesized: return "synthesized";
    case RecordStatus::kErrored: return "errored";
    case RecordStatus::kValidated: return "validated";
    case RecordStatus::kRejected: return "rejected";
  }
  return "pending";
}

inline RecordStatus record_status_from_string(std::string_view s) {
  for (auto st : {RecordStatus::kPending, RecordStatus::kCaptioned, RecordStatus::kDiscarded,
                  RecordStatus::kSynthesized, RecordStatus::kErrored, RecordStatus::kValidated,
                  RecordStatus::kRejected}) {
    if (to_string(st) == s) return st;
  }
  throw Error(ErrorCode::kInvariantViolation, "unknown record status '" + std::string(s) + "'");
}

// One lifecycle record per (concept, track). Fields only ever get added in
// pipeline order: caption, image, validation, negatives.
struct ManifestRecord {
  explicit ManifestRecord(Concept c, Track t = Track::kMinimal) : cpt(std::move(c)), track(t) {}

  Concept cpt;
  Track track = Track::kMinimal;
  RecordStatus status = RecordStatus::kPending;
  std::optional<CaptionRecord> caption;
  std::optional<backend::ImageRef> image;
  std::optional<ValidationReport> validation;
  std::map<Scheme, NegativeSet> negatives;
  std::map<std::string, std::string> timestamps;
  std::string note;  // discard reason or last error

  const std::string& concept_id() const { return cpt.id(); }
};

// Throws InvariantViolation when a later field is present without an earlier one.
inline void check_lifecycle(const ManifestRecord& r) {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kInvariantViolation, r.concept_id() + ": " + what);
  };
  if (r.caption && r.caption->concept_id != r.concept_id()) fail("caption for another concept");
  if (r.caption && r.caption->track != r.track) fail("caption track differs from record track");
  if (r.image && !r.caption) fail("image without caption");
  if (r.validation && !r.image) fail("validation without image");
  if (!r.negatives.empty() &&
      (!r.validation || r.validation->status != ValidationStatus::kValidated)) {
    fail("negatives without a validated image");
  }
  switch (r.status) {
    case RecordStatus::kPending:
      if (r.caption) fail("pending record has a caption");
      break;
    case RecordStatus::kCaptioned:
      if (!r.caption || r.image) fail("captioned status does not match fields");
      break;
    case RecordStatus::kSynthesized:
      if (!r.image || r.validation) fail("synthesized status does not match fields");
      break;
    case RecordStatus::kValidated:
    case RecordStatus::kRejected: {
      if (!r.validation) fail("validation status without report");
      const auto want = r.status == RecordStatus::kValidated ? ValidationStatus::kValidated
                                                             : ValidationStatus::kRejected;
      if (r.validation->status != want) fail("status disagrees with validation report");
      break;
    }
    case RecordStatus::kDiscarded:
    case RecordStatus::kErrored:
      break;
  }
  if (r.track == Track::kMinimal && r.caption &&
      !r.caption->text.ends_with(kWhiteBackgroundSuffix)) {
    fail("minimal caption lacks the white-background suffix");
  }
}

inline json to_json(const ManifestRecord& r) {
  check_lifecycle(r);
  json j;
  j["schema"] = kManifestSchema;
  j["concept"] = to_json(r.cpt);
  j["concept_id"] = r.concept_id();
  j["track"] = to_string(r.track);
  j["status"] = to_string(r.status);
  if (r.caption) j["caption"] = to_json(*r.caption);
  if (r.image) j["image"] = backend::to_json(*r.image);
  if (r.validation) j["validation"] = to_json(*r.validation);
  if (!r.negatives.empty()) {
    json negs = json::object();
    for (const auto& [scheme, set] : r.negatives) {
      json v = json::array();
      for (const auto& var : set.variants) {
        v.push_back(json{{"objects", var.arrangement.objects},
                         {"attributes", var.arrangement.attributes},
                         {"text", var.text}});
      }
      negs[std::string(to_string(scheme))] =
          json{{"includes_binding_equivalents", set.includes_binding_equivalents}, {"variants", v}};
    }
    j["negatives"] = negs;
  }
  if (!r.timestamps.empty()) j["timestamps"] = r.timestamps;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline ManifestRecord manifest_record_from_json(const json& j) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvariantViolation, what); };
  if (!j.is_object()) fail("manifest record must be an object");
  if (j.value("schema", std::string()) != kManifestSchema) fail("unsupported manifest schema");
  if (!j.contains("concept")) fail("manifest record has no concept");
  try {
    ManifestRecord r(concept_from_json(j.at("concept")));
    if (j.value("concept_id", std::string()) != r.concept_id()) {
      fail("concept does not re-hash to concept_id " + j.value("concept_id", std::string()));
    }
    r.track = track_from_string(j.at("track").get<std::string>());
    r.status = record_status_from_string(j.at("status").get<std::string>());
    if (j.contains("caption")) r.caption = caption_from_json(j.at("caption"), r.concept_id());
    if (j.contains("image")) r.image = backend::image_ref_from_json(j.at("image"));
    if (j.contains("validation")) {
      r.validation = validation_report_from_json(j.at("validation"), r.concept_id(), r.track);
    }
    if (j.contains("negatives")) {
      for (const auto& [name, body] : j.at("negatives").items()) {
        NegativeSet set;
        set.concept_id = r.concept_id();
        set.track = r.track;
        set.scheme = scheme_from_string(name);
        set.includes_binding_equivalents = body.value("includes_binding_equivalents", true);
        for (const auto& v : body.at("variants")) {
          set.variants.push_back(
              {Arrangement{v.at("objects").get<std::vector<int>>(),
                           v.at("attributes").get<std::vector<int>>(), set.scheme},
               v.at("text").get<std::string>()});
        }
        r.negatives.emplace(set.scheme, std::move(set));
      }
    }
    if (j.contains("timestamps")) {
      r.timestamps = j.at("timestamps").get<std::map<std::string, std::string>>();
    }
    r.note = j.value("note", std::string());
    check_lifecycle(r);
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvariantViolation,
                std::string("malformed manifest record: ") + e.what());
  }
}

inline std::string serialize_manifest(const std::vector<ManifestRecord>& records) {
  std::string out;
  for (const auto& r : records) out += to_json(r).dump() + "\n";
  return out;
}

inline std::vector<ManifestRecord> parse_manifest(std::string_view text) {
  std::vector<ManifestRecord> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const std::string line = trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorCode::kInvariantViolation,
                  "manifest line " + std::to_string(line_no) + " is not JSON");
    }
    out.push_back(manifest_record_from_json(j));
  }
  return out;
}

// The whole file is rewritten through a temporary and renamed into place, so
// an interrupted run leaves the previous complete manifest behind.
inline void write_manifest(const std::filesystem::path& path,
                           const std::vector<ManifestRecord>& records) {
  write_file_atomic(path, serialize_manifest(records));
}

inline std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file(path));
}

// Curation ---------------------------------------------------------------------

struct BenchmarkSets {
  std::set<std::string> minimal_ids;
  std::set<std::string> contextual_ids;
  std::set<std::string> paired_ids;
  std::vector<std::string> warnings;
};

// Validated records only; a concept validated twice within a track keeps its
// first record and produces a warning.
inline BenchmarkSets curate_benchmarks(const std::vector<ManifestRecord>& records) {
  BenchmarkSets sets;
  for (const auto& r : records) {
    if (r.status != RecordStatus::kValidated) continue;
    auto& ids = r.track == Track::kMinimal ? sets.minimal_ids : sets.contextual_ids;
    if (!ids.insert(r.concept_id()).second) {
      sets.warnings.push_back("duplicate " + std::string(to_string(r.track)) + " record for " +
                              r.concept_id() + " ignored");
    }
  }
  std::set_intersection(sets.minimal_ids.begin(), sets.minimal_ids.end(),
                        sets.contextual_ids.begin(), sets.contextual_ids.end(),
                        std::inserter(sets.paired_ids, sets.paired_ids.end()));
  return sets;
}

inline BenchmarkSets curate_benchmarks(const std::vector<ManifestRecord>& minimal,
                                       const std::vector<ManifestRecord>& contextual) {
  std::vector<ManifestRecord> all;
  for (const auto& r : minimal) {
    if (r.track == Track::kMinimal) all.push_back(r);
  }
  for (const auto& r : contextual) {
    if (r.track == Track::kContextual) all.push_back(r);
  }
  return curate_benchmarks(all);
}

inline json to_json(const BenchmarkSets& s) {
  return json{{"minimal", s.minimal_ids},
              {"contextual", s.contextual_ids},
              {"paired", s.paired_ids},
              {"warnings", s.warnings}};
}

// Survival statistics ----------------------------------------------------------

struct SurvivalCell {
  TaskKind task = TaskKind::kColorBinding;
  int n = 1;
  Track track = Track::kMinimal;
  std::int64_t generated = 0;  // validated + rejected; errored samples are excluded
  std::int64_t passed_object = 0;
  std::optional<std::int64_t> passed_background;  // minimal only
  std::int64_t passed_attribute = 0;
  std::int64_t errored = 0;

  // Percentage of generated samples, or nullopt when nothing was generated.
  std::optional<Rational> rate(std::int64_t count) const {
    if (generated == 0) return std::nullopt;
    return Rational(count * 100, generated);
  }

  void check_monotone() const {
    const std::int64_t bg = passed_background.value_or(passed_object);
    if (!(generated >= passed_object && passed_object >= bg && bg >= passed_attribute &&
          passed_attribute >= 0)) {
      throw Error(ErrorCode::kInvariantViolation, "survival counts are not monotone");
    }
  }
};

using SurvivalKey = std::tuple<TaskKind, int, Track>;
using SurvivalStats = std::map<SurvivalKey, SurvivalCell>;

inline SurvivalStats survival_stats(const std::vector<ManifestRecord>& records) {
  SurvivalStats stats;
  for (const auto& r : records) {
    if (!r.validation) continue;
    SurvivalKey key{r.cpt.task(), r.cpt.n(), r.track};
    auto [it, inserted] = stats.try_emplace(key);
    SurvivalCell& cell = it->second;
    if (inserted) {
      cell.task = r.cpt.task();
      cell.n = r.cpt.n();
      cell.track = r.track;
      if (r.track == Track::kMinimal) cell.passed_background = 0;
    }
    const ValidationReport& v = *r.validation;
    if (v.status == ValidationStatus::kErrored) {
      ++cell.errored;
      continue;
    }
    ++cell.generated;
    if (v.passed(Stage::kObjectCheck)) ++cell.passed_object;
    if (cell.passed_background && v.passed(Stage::kBackgroundCheck)) ++*cell.passed_background;
    if (v.status == ValidationStatus::kValidated) ++cell.passed_attribute;
  }
  for (const auto& [key, cell] : stats) cell.check_monotone();
  return stats;
}

inline std::string format_rate(const std::optional<Rational>& r) {
  return r ? r->to_fixed(1) : "n/a";
}

inline json to_json(const SurvivalCell& c) {
  auto rate = [&](std::int64_t k) -> json {
    auto r = c.rate(k);
    return r ? json(format_rate(r)) : json("n/a");
  };
  json j{{"task", to_string(c.task)},
         {"n", c.n},
         {"track", to_string(c.track)},
         {"generated", c.generated},
         {"passed_object", c.passed_object},
         {"passed_attribute", c.passed_attribute},
         {"errored", c.errored},
         {"object_rate", rate(c.passed_object)},
         {"attribute_rate", rate(c.passed_attribute)}};
  if (c.passed_background) {
    j["passed_background"] = *c.passed_background;
    j["background_rate"] = rate(*c.passed_background);
  } else {
    j["passed_background"] = nullptr;
    j["background_rate"] = "n/a";
  }
  return j;
}

inline json to_json(const SurvivalStats& s) {
  json out = json::array();
  for (const auto& [key, cell] : s) out.push_back(to_json(cell));
  return out;
}

// Benchmark export: manifest.jsonl (paired records), negatives.jsonl,
// stats.json and the referenced images copied under images/.
inline void export_benchmark(const std::filesystem::path& run_dir,
                             const std::vector<ManifestRecord>& records,
                             const std::filesystem::path& dest) {
  const BenchmarkSets sets = curate_benchmarks(records);
  std::vector<ManifestRecord> kept;
  std::set<std::pair<std::string, Track>> seen;
  std::string negatives;
  for (const auto& r : records) {
    if (r.status != RecordStatus::kValidated || !sets.paired_ids.count(r.concept_id())) continue;
    if (!seen.insert({r.concept_id(), r.track}).second) continue;
    kept.push_back(r);
    for (const auto& [scheme, set] : r.negatives) negatives += to_json(set).dump() + "\n";
    if (r.image) {
      const auto src = std::filesystem::path(r.image->path).is_relative()
                           ? run_dir / r.image->path
                           : std::filesystem::path(r.image->path);
      write_file_atomic(dest / r.image->path, read_file(src));
    }
  }
  write_manifest(dest / "manifest.jsonl", kept);
  write_file_atomic(dest / "negatives.jsonl", negatives);
  json stats{{"survival", to_json(survival_stats(records))}, {"sets", to_json(sets)}};
  write_file_atomic(dest / "stats.json", stats.dump(2) + "\n");
}

}  // namespace autocomp
