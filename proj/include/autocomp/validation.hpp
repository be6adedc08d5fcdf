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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "autocomp/backend/protocol.hpp"
#include "autocomp/caption.hpp"
#include "autocomp/raster.hpp"

namespace autocomp {

enum class Stage { kObjectCheck, kBackgroundCheck, kAttributeCheck };

inline std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::kObjectCheck: return "object";
    case Stage::kBackgroundCheck: return "background";
    case Stage::kAttributeCheck: return "attribute";
  }
  return "object";
}

inline Stage stage_from_string(std::string_view s) {
  for (Stage st : {Stage::kObjectCheck, Stage::kBackgroundCheck, Stage::kAttributeCheck}) {
    if (to_string(st) == s) return st;
  }
  throw Error(ErrorCode::kInvariantViolation, "unknown stage '" + std::string(s) + "'");
}

struct StageOutcome {
  Stage stage = Stage::kObjectCheck;
  bool passed = false;
  json detail = json::object();
  std::string reason;
};

enum class ValidationStatus { kValidated, kRejected, kErrored };

inline std::string_view to_string(ValidationStatus s) {
  switch (s) {
    case ValidationStatus::kValidated: return "validated";
    case ValidationStatus::kRejected: return "rejected";
    case ValidationStatus::kErrored: return "errored";
  }
  return "errored";
}

inline ValidationStatus validation_status_from_string(std::string_view s) {
  for (auto st : {ValidationStatus::kValidated, ValidationStatus::kRejected,
                  ValidationStatus::kErrored}) {
    if (to_string(st) == s) return st;
  }
  throw Error(ErrorCode::kInvariantViolation, "unknown validation status '" + std::string(s) + "'");
}

struct ValidationReport {
  std::string image_id;
  std::string concept_id;
  Track track = Track::kMinimal;
  std::vector<StageOutcome> outcomes;
  ValidationStatus status = ValidationStatus::kErrored;
  std::string error;  // set when Errored

  std::optional<Stage> rejected_stage() const {
    if (status != ValidationStatus::kRejected || outcomes.empty()) return std::nullopt;
    return outcomes.back().stage;
  }
  bool passed(Stage s) const {
    for (const auto& o : outcomes) {
      if (o.stage == s) return o.passed;
    }
    return false;
  }
};

// Object presence and cardinality ------------------------------------------

// Minimal images must show nothing but the concept's objects; contextual
// scenes may contain other detected labels.
inline StageOutcome check_objects(const std::vector<backend::Detection>& detections,
                                  const Concept& cpt, Track track) {
  std::map<std::string, std::string> canonical;
  std::map<std::string, int> expected;
  for (const auto& o : cpt.objects()) {
    canonical[o.name] = o.name;
    canonical[o.plural] = o.name;
    expected[o.name] = o.expected_count;
  }
  std::map<std::string, int> counts;
  std::vector<std::string> extra;
  for (const auto& d : detections) {
    const std::string label = normalize_phrase(d.label);
    auto it = canonical.find(label);
    if (it == canonical.end()) {
      extra.push_back(label);
      continue;
    }
    ++counts[it->second];
  }
  StageOutcome out;
  out.stage = Stage::kObjectCheck;
  out.passed = true;
  for (const auto& [name, want] : expected) {
    if (counts[name] != want) {
      out.passed = false;
      out.reason = "expected " + std::to_string(want) + " '" + name + "', detected " +
                   std::to_string(counts[name]);
      break;
    }
  }
  if (out.passed && track == Track::kMinimal && !extra.empty()) {
    out.passed = false;
    out.reason = "unexpected object '" + extra.front() + "' in a minimal image";
  }
  out.detail = json{{"counts", counts}, {"expected", expected}, {"extra", extra}};
  return out;
}

// Background whiteness -------------------------------------------------------

struct BackgroundParams {
  int luma_threshold = 190;
  // Minimum white fraction as an exact ratio (0.70).
  std::int64_t min_fraction_num = 7;
  std::int64_t min_fraction_den = 10;
};

// Rec.601 luma rounded to the nearest integer.
inline int luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return (299 * r + 587 * g + 114 * b + 500) / 1000;
}

// An excluded region: a mask raster (nonzero = object), else a normalized box.
struct ObjectRegion {
  std::array<double, 4> bbox{};
  std::optional<Raster> mask;
};

inline bool region_covers(const ObjectRegion& region, int x, int y, int w, int h) {
  if (region.mask) {
    const Raster& m = *region.mask;
    const int mx = static_cast<int>(static_cast<std::int64_t>(x) * m.width / w);
    const int my = static_cast<int>(static_cast<std::int64_t>(y) * m.height / h);
    const std::uint8_t* p = m.at(mx, my);
    return p[0] != 0 || p[1] != 0 || p[2] != 0;
  }
  const double cx = (x + 0.5) / w;
  const double cy = (y + 0.5) / h;
  return cx >= region.bbox[0] && cx < region.bbox[2] && cy >= region.bbox[1] &&
         cy < region.bbox[3];
}

inline StageOutcome check_background(const Raster& image, const std::vector<ObjectRegion>& regions,
                                     const BackgroundParams& params = {}) {
  if (image.empty()) throw Error(ErrorCode::kInvalidArgument, "empty raster");
  std::int64_t remaining = 0;
  std::int64_t white = 0;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      bool masked = false;
      for (const auto& r : regions) {
        if (region_covers(r, x, y, image.width, image.height)) {
          masked = true;
          break;
        }
      }
      if (masked) continue;
      ++remaining;
      const std::uint8_t* p = image.at(x, y);
      if (luma(p[0], p[1], p[2]) >= params.luma_threshold) ++white;
    }
  }
  StageOutcome out;
  out.stage = Stage::kBackgroundCheck;
  if (remaining == 0) {
    out.passed = false;
    out.reason = "AllPixelsMasked";
    out.detail = json{{"white_pixels", 0}, {"background_pixels", 0}, {"fraction", nullptr}};
    return out;
  }
  out.passed = white * params.min_fraction_den >= remaining * params.min_fraction_num;
  const double fraction = static_cast<double>(white) / static_cast<double>(remaining);
  out.detail = json{{"white_pixels", white}, {"background_pixels", remaining}, {"fraction", fraction}};
  if (!out.passed) out.reason = "white fraction " + std::to_string(fraction) + " below threshold";
  return out;
}

// Attribute questions ----------------------------------------------------------

struct VqaQuery {
  std::string question;
  std::vector<std::string> allowed_answers;
  std::string expected;
};

inline std::vector<VqaQuery> build_attribute_questions(const Concept& cpt, const Vocabulary& vocab) {
  std::vector<VqaQuery> out;
  if (cpt.task() == TaskKind::kColorBinding) {
    std::vector<std::string> colors;
    for (const auto& c : vocab.colors()) colors.push_back(c.name);
    for (int i = 0; i < cpt.n(); ++i) {
      const ObjectEntry& o = cpt.objects()[i];
      const char* verb = o.inherently_plural() ? "are" : "is";
      out.push_back({std::string("What color ") + verb + " the " + o.surface() + "?", colors,
                     cpt.colors()[i]});
    }
    return out;
  }
  std::vector<std::string> relations;
  for (const auto& r : vocab.relations()) relations.push_back(r.name);
  for (int i = 0; i + 1 < cpt.n(); ++i) {
    const ObjectEntry& a = cpt.objects()[i];
    const char* verb = a.inherently_plural() ? "are" : "is";
    out.push_back({std::string("Where ") + verb + " the " + a.surface() + " relative to the " +
                       cpt.objects()[i + 1].surface() + "?",
                   relations, cpt.relations()[i].name});
  }
  return out;
}

inline std::string normalize_answer(std::string_view answer) {
  std::string s = to_lower(trim(answer));
  while (!s.empty() && is_ascii_punct(s.back())) s.pop_back();
  while (!s.empty() && is_ascii_punct(s.front())) s.erase(s.begin());
  return normalize_phrase(s);
}

inline StageOutcome check_attributes(const std::vector<std::string>& answers,
                                     const std::vector<VqaQuery>& queries) {
  if (answers.size() != queries.size()) {
    throw Error(ErrorCode::kInvalidArgument, "one answer per query is required");
  }
  StageOutcome out;
  out.stage = Stage::kAttributeCheck;
  out.passed = true;
  json items = json::array();
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const std::string a = normalize_answer(answers[i]);
    const auto& q = queries[i];
    const bool in_vocab =
        std::find(q.allowed_answers.begin(), q.allowed_answers.end(), a) != q.allowed_answers.end();
    const bool correct = in_vocab && a == q.expected;
    items.push_back(json{{"question", q.question},
                         {"answer", a},
                         {"expected", q.expected},
                         {"correct", correct}});
    if (!correct && out.passed) {
      out.passed = false;
      out.reason = in_vocab ? "wrong answer to '" + q.question + "'"
                            : "AnswerOutOfVocabulary: '" + a + "'";
    }
  }
  out.detail = json{{"answers", items}};
  return out;
}

// Full stack -------------------------------------------------------------------

struct ValidationOptions {
  backend::DetectParams detect;
  BackgroundParams background;
};

// Runs Object -> Background (minimal only) -> Attribute, stopping at the
// first failed stage. Backend and image-access failures mark the sample
// Errored instead of rejecting it.
inline ValidationReport validate_sample(const std::string& image_id, const backend::ImageRef& image,
                                        const std::filesystem::path& base_dir, const Concept& cpt,
                                        Track track, const Vocabulary& vocab,
                                        backend::Backend& backends,
                                        const ValidationOptions& options = {}) {
  ValidationReport report;
  report.image_id = image_id;
  report.concept_id = cpt.id();
  report.track = track;
  auto finish = [&](StageOutcome o) {
    const bool ok = o.passed;
    report.outcomes.push_back(std::move(o));
    if (!ok) report.status = ValidationStatus::kRejected;
    return ok;
  };
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() ? base_dir / path : path;
  };
  try {
    std::vector<std::string> labels;
    for (const auto& o : cpt.objects()) labels.push_back(o.name);
    const auto detections =
        backend::detections_of(backends.call(backend::detect_request(image, labels, options.detect)));
    if (!finish(check_objects(detections, cpt, track))) return report;

    if (track == Track::kMinimal) {
      const std::string bytes = read_file(resolve(image.path));
      if (sha256_hex(bytes) != image.sha256) {
        throw Error(ErrorCode::kIoFailure, "image bytes do not match " + image.sha256);
      }
      const Raster raster = decode_png(bytes);
      std::vector<ObjectRegion> regions;
      for (const auto& d : detections) {
        ObjectRegion r{d.bbox, std::nullopt};
        if (d.mask_path) r.mask = read_png(resolve(*d.mask_path));
        regions.push_back(std::move(r));
      }
      if (!finish(check_background(raster, regions, options.background))) return report;
    }

    const auto queries = build_attribute_questions(cpt, vocab);
    std::vector<std::string> answers;
    for (const auto& q : queries) {
      const auto req = backend::vqa_request(image, q.question, q.allowed_answers);
      const auto res = backends.call(req);
      backend::validate_result(req.capability, res.result);
      answers.push_back(res.result.at("answer").get<std::string>());
    }
    if (!finish(check_attributes(answers, queries))) return report;
    report.status = ValidationStatus::kValidated;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kBackendUnavailable && e.code() != ErrorCode::kProtocolViolation &&
        e.code() != ErrorCode::kMockMiss && e.code() != ErrorCode::kIoFailure) {
      throw;
    }
    report.status = ValidationStatus::kErrored;
    report.error = e.what();
  }
  return report;
}

inline json to_json(const StageOutcome& o) {
  json j{{"stage", to_string(o.stage)}, {"passed", o.passed}, {"detail", o.detail}};
  if (!o.reason.empty()) j["reason"] = o.reason;
  return j;
}

inline StageOutcome stage_outcome_from_json(const json& j) {
  StageOutcome o;
  o.stage = stage_from_string(j.at("stage").get<std::string>());
  o.passed = j.at("passed").get<bool>();
  o.detail = j.value("detail", json::object());
  o.reason = j.value("reason", std::string());
  return o;
}

inline json to_json(const ValidationReport& r) {
  json outcomes = json::array();
  for (const auto& o : r.outcomes) outcomes.push_back(to_json(o));
  json j{{"image_id", r.image_id},
         {"status", to_string(r.status)},
         {"outcomes", outcomes}};
  if (auto s = r.rejected_stage()) j["rejected_stage"] = to_string(*s);
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

inline ValidationReport validation_report_from_json(const json& j, const std::string& concept_id,
                                                    Track track) {
  ValidationReport r;
  r.image_id = j.at("image_id").get<std::string>();
  r.concept_id = concept_id;
  r.track = track;
  r.status = validation_status_from_string(j.at("status").get<std::string>());
  for (const auto& o : j.at("outcomes")) r.outcomes.push_back(stage_outcome_from_json(o));
  r.error = j.value("error", std::string());
  return r;
}

}  // namespace autocomp
