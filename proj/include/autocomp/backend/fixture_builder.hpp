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

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "autocomp/backend/mock.hpp"
#include "autocomp/blind.hpp"
#include "autocomp/contextual.hpp"
#include "autocomp/negatives.hpp"
#include "autocomp/validation.hpp"

// Builds keyed mock scripts that answer every request a pipeline run over a
// given concept list will make. Faults are picked per concept by hash, so a
// script is a pure function of its inputs.

namespace autocomp::backend {

// Per-mille rates.
struct FixtureFaults {
  int discard = 0;      // contextual rewrites never pass the check
  int object = 0;       // one detection goes missing
  int background = 0;   // minimal image drawn on grey
  int attribute = 0;    // first VQA answer is wrong
  int unavailable = 0;  // image generation fails with BackendUnavailable
};

struct FixtureOptions {
  std::vector<Track> tracks{Track::kMinimal, Track::kContextual};
  int retries = 3;
  MatchOptions match;
  bool include_binding_equivalents = true;
  bool embed = true;
  double embed_skill = 0.25;  // similarity bonus of the positive caption
  std::string blind_answer = "1";
  std::string model_id = "mock";
  FixtureFaults faults;
};

namespace detail {

inline bool fault(const std::string& id, std::string_view kind, int per_mille) {
  return per_mille > 0 && static_cast<int>(hash64(id + ":" + std::string(kind)) % 1000) < per_mille;
}

inline std::array<std::uint8_t, 3> color_rgb(const std::string& name) {
  static const std::map<std::string, std::array<std::uint8_t, 3>> table{
      {"red", {200, 30, 30}},     {"blue", {30, 60, 200}},     {"green", {30, 150, 50}},
      {"yellow", {230, 210, 40}}, {"orange", {240, 140, 20}},  {"purple", {120, 40, 160}},
      {"pink", {240, 130, 170}},  {"brown", {120, 70, 30}},    {"black", {10, 10, 10}},
      {"gray", {128, 128, 128}},  {"grey", {128, 128, 128}},   {"olive", {110, 120, 30}},
      {"teal", {20, 128, 128}},   {"navy", {20, 30, 110}},     {"maroon", {110, 20, 30}},
      {"white", {245, 245, 245}}, {"gold", {210, 170, 40}},    {"silver", {170, 170, 180}},
  };
  if (auto it = table.find(name); it != table.end()) return it->second;
  const std::uint64_t h = hash64(name);
  return {static_cast<std::uint8_t>(h & 0x7f), static_cast<std::uint8_t>((h >> 8) & 0x7f),
          static_cast<std::uint8_t>((h >> 16) & 0x7f)};
}

inline json rgb_json(const std::array<std::uint8_t, 3>& c) { return json::array({c[0], c[1], c[2]}); }

// One box per object instance, left to right in the middle band.
inline std::vector<std::pair<std::string, std::array<double, 4>>> layout(const Concept& cpt) {
  std::vector<std::pair<std::string, std::array<double, 4>>> boxes;
  int instances = 0;
  for (const auto& o : cpt.objects()) instances += o.expected_count;
  const double slot = 0.9 / instances;
  int k = 0;
  for (const auto& o : cpt.objects()) {
    for (int i = 0; i < o.expected_count; ++i, ++k) {
      const double x0 = 0.05 + k * slot + slot * 0.2;
      boxes.push_back({o.name, {x0, 0.35, x0 + slot * 0.6, 0.6}});
    }
  }
  return boxes;
}

inline FieldMatcher contains(std::string field, std::string needle) {
  return FieldMatcher{std::move(field), std::move(needle), std::nullopt};
}

inline FieldMatcher equals(std::string field, json value) {
  return FieldMatcher{std::move(field), std::nullopt, std::move(value)};
}

// Scene sentence built around the template bindings, so it passes the check.
inline std::string scene_caption(const Concept& cpt) {
  std::string core = render_minimal_text(binding_target(cpt));
  core.resize(core.size() - kWhiteBackgroundSuffix.size());
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 4> frames{{
      {"In a sunlit workshop, ", " sit on a wooden bench."},
      {"On a busy street corner, ", " catch the evening light."},
      {"Inside a quiet kitchen, ", " wait beside the window."},
      {"At the edge of a park, ", " stand in the shade."},
  }};
  const auto& [pre, post] = frames[hash64(cpt.id()) % frames.size()];
  return std::string(pre) + core + std::string(post);
}

inline std::string image_path_key(const Concept& cpt, Track track) {
  return std::string(to_string(track)) + "/" + cpt.id();
}

}  // namespace detail

inline MockScript build_mock_script(const std::vector<Concept>& concepts, const Vocabulary& vocab,
                                    const FixtureOptions& options = {}) {
  MockScript script;
  script.mode = ScriptMode::kKeyed;
  script.model_id = options.model_id;
  auto add = [&](Fixture f) {
    f.model_id = options.model_id;
    script.fixtures.push_back(std::move(f));
  };
  const bool contextual =
      std::find(options.tracks.begin(), options.tracks.end(), Track::kContextual) != options.tracks.end();

  for (const auto& cpt : concepts) {
    const std::string& id = cpt.id();
    const bool discard = contextual && detail::fault(id, "discard", options.faults.discard);

    std::map<Track, CaptionRecord> captions;
    for (Track track : options.tracks) {
      if (track == Track::kMinimal) {
        captions.emplace(track, render_minimal(cpt, options.match));
        continue;
      }
      for (int attempt = 1; attempt <= options.retries; ++attempt) {
        Fixture f;
        f.capability = Capability::kTextGen;
        f.match = {detail::equals("user", build_contextual_prompt(cpt, attempt).user_text),
                   detail::equals("attempt", attempt)};
        if (discard) {
          f.result = json{{"text", "A quiet room with some furniture in it."}};
        } else {
          std::string text = detail::scene_caption(cpt);
          MatchResult m = check_semantic_preservation(text, cpt, options.match);
          if (!m.passed) {
            throw Error(ErrorCode::kInvariantViolation, "scene caption fails its check: " + text);
          }
          if (attempt == 1) {
            captions.emplace(track, make_caption_record(id, track, text, std::move(m), 1,
                                                        options.model_id));
          }
          f.result = json{{"text", text}};
        }
        add(std::move(f));
      }
    }
    if (discard) continue;

    for (Track track : options.tracks) {
      const std::string key = detail::image_path_key(cpt, track);
      const auto boxes = detail::layout(cpt);

      Fixture img;
      img.capability = Capability::kImageGen;
      img.match = {detail::equals("concept_id", id), detail::equals("track", to_string(track))};
      if (detail::fault(key, "unavailable", options.faults.unavailable)) {
        img.error = ErrorCode::kBackendUnavailable;
        img.error_message = "scripted outage";
      } else {
        std::array<std::uint8_t, 3> bg{255, 255, 255};
        if (track == Track::kContextual) bg = {222, 205, 170};
        if (track == Track::kMinimal && detail::fault(key, "background", options.faults.background)) {
          bg = {150, 150, 150};
        }
        json rects = json::array();
        std::size_t k = 0;
        for (std::size_t i = 0; i < cpt.objects().size(); ++i) {
          const std::string color =
              cpt.task() == TaskKind::kColorBinding ? cpt.colors()[i] : "gray";
          for (int c = 0; c < cpt.objects()[i].expected_count; ++c, ++k) {
            const auto& b = boxes[k].second;
            rects.push_back({{"box", json::array({b[0], b[1], b[2], b[3]})},
                             {"color", detail::rgb_json(detail::color_rgb(color))}});
          }
        }
        img.synthesize = json{{"width", 64}, {"height", 64}, {"background", detail::rgb_json(bg)},
                              {"rects", rects}};
      }
      add(std::move(img));

      Fixture det;
      det.capability = Capability::kDetect;
      det.match = {detail::contains("image.path", key)};
      json detections = json::array();
      for (const auto& [label, b] : boxes) {
        detections.push_back(to_json(Detection{label, 0.9, b, std::nullopt}));
      }
      if (detail::fault(key, "object", options.faults.object)) detections.erase(detections.size() - 1);
      det.result = json{{"detections", detections}};
      add(std::move(det));

      const bool wrong = detail::fault(key, "attribute", options.faults.attribute);
      const auto queries = build_attribute_questions(cpt, vocab);
      for (std::size_t q = 0; q < queries.size(); ++q) {
        Fixture vqa;
        vqa.capability = Capability::kVqa;
        vqa.match = {detail::contains("image.path", key), detail::equals("question", queries[q].question)};
        std::string answer = queries[q].expected;
        if (wrong && q == 0) {
          for (const auto& a : queries[q].allowed_answers) {
            if (a != answer) {
              answer = a;
              break;
            }
          }
        }
        vqa.result = json{{"answer", answer}};
        add(std::move(vqa));
      }

      if (!options.embed || cpt.n() < 2) continue;
      const CaptionRecord& positive = captions.at(track);
      for (Scheme scheme : {Scheme::kSwap, Scheme::kConfusion}) {
        const NegativeSet set =
            make_negative_set(positive, cpt, scheme, options.include_binding_equivalents);
        std::vector<std::string> texts{positive.text};
        for (const auto& v : set.variants) texts.push_back(v.text);
        json vectors = json::array();
        for (std::size_t i = 0; i < texts.size(); ++i) {
          const double u = static_cast<double>(hash64(key + "|" + texts[i]) % 1000000) / 1e6;
          const double s = std::min(1.0, (i == 0 ? options.embed_skill : 0.0) + u * 0.75);
          vectors.push_back(json::array({s, std::sqrt(std::max(0.0, 1.0 - s * s))}));
        }
        Fixture emb;
        emb.capability = Capability::kEmbed;
        emb.match = {detail::contains("image.path", key), detail::equals("texts", texts)};
        emb.result = json{{"vectors", vectors}, {"image_vector", json::array({1.0, 0.0})}};
        add(std::move(emb));
      }
    }
  }

  Fixture blind;
  blind.capability = Capability::kTextGen;
  blind.match = {detail::contains("user", std::string(kBlindAnswerFormat))};
  blind.result = json{{"text", options.blind_answer}};
  add(std::move(blind));
  return script;
}

}  // namespace autocomp::backend
