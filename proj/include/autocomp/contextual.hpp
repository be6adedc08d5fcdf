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

#include <map>
#include <string>
#include <variant>

#include "autocomp/backend/protocol.hpp"
#include "autocomp/caption.hpp"
#include "autocomp/prompts.hpp"

namespace autocomp {

struct PromptPair {
  std::string system_text;
  std::string user_text;
  int attempt = 1;
};

// "'a green chair' and 'a yellow lamp'" for color concepts, one quoted chain
// link per relation for position concepts.
inline std::string obj_colors_text(const Concept& cpt) {
  const BindingTarget t = binding_target(cpt);
  std::vector<std::string> phrases;
  if (t.task == TaskKind::kColorBinding) {
    for (int i = 0; i < t.n(); ++i) {
      phrases.push_back(detail::article_phrase(t.objects[i], t.colors[i]) + " " +
                        t.objects[i].surface());
    }
  } else if (t.n() == 1) {
    phrases.push_back(detail::article_phrase(t.objects[0], t.objects[0].surface()));
  } else {
    for (int i = 0; i + 1 < t.n(); ++i) {
      phrases.push_back(detail::article_phrase(t.objects[i], t.objects[i].surface()) + " " +
                        t.relations[i].name + " " +
                        detail::article_phrase(t.objects[i + 1], t.objects[i + 1].surface()));
    }
  }
  for (auto& p : phrases) p = "'" + p + "'";
  return join(phrases, " and ");
}

inline std::string fill_template(std::string_view tmpl, const Concept& cpt) {
  const std::map<std::string, std::string> values{
      {"{num_obj}", std::to_string(cpt.n())},
      {"{obj_plural}", cpt.n() == 1 ? "object" : "objects"},
      {"{obj_colors_text}", obj_colors_text(cpt)}};
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    bool replaced = false;
    if (tmpl[i] == '{') {
      for (const auto& [key, value] : values) {
        if (tmpl.substr(i, key.size()) == key) {
          out += value;
          i += key.size();
          replaced = true;
          break;
        }
      }
    }
    if (!replaced) out += tmpl[i++];
  }
  return out;
}

inline PromptPair build_contextual_prompt(const Concept& cpt, int attempt) {
  if (attempt < 1) throw Error(ErrorCode::kInvalidArgument, "attempt must be >= 1");
  const bool color = cpt.task() == TaskKind::kColorBinding;
  const std::string_view user = color ? (attempt == 1 ? prompts::kColorUser
                                                      : prompts::kColorUserInsistent)
                                      : (attempt == 1 ? prompts::kPositionUser
                                                      : prompts::kPositionUserInsistent);
  return PromptPair{std::string(color ? prompts::kColorSystem : prompts::kPositionSystem),
                    fill_template(user, cpt), attempt};
}

struct ContextualOptions {
  int retries = 3;
  MatchOptions match;
  backend::TextGenParams sampling;
  std::uint64_t seed = 0;
};

struct Discarded {
  std::string concept_id;
  int attempts = 0;
  std::string last_text;
  std::string reason;
};

using ContextualOutcome = std::variant<CaptionRecord, Discarded>;

// Model output cleanup: surrounding whitespace and one pair of wrapping
// quotes are dropped; the sentence itself is kept as written.
inline std::string clean_generation(std::string_view raw) {
  std::string s = trim(raw);
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\''))) {
    s = trim(std::string_view(s).substr(1, s.size() - 2));
  }
  return s;
}

// Asks the text backend for a caption until one passes the semantic check.
// Transport failures propagate; pattern failures use up retries.
inline ContextualOutcome generate_contextual(const Concept& cpt, backend::Backend& llm,
                                             const ContextualOptions& options = {}) {
  if (options.retries < 1) throw Error(ErrorCode::kInvalidArgument, "retries must be >= 1");
  Discarded discarded{cpt.id(), 0, "", ""};
  const std::uint64_t seed = options.seed ^ hash64(cpt.id());
  for (int attempt = 1; attempt <= options.retries; ++attempt) {
    const PromptPair prompt = build_contextual_prompt(cpt, attempt);
    const auto request =
        backend::text_request(prompt.system_text, prompt.user_text, attempt, seed, options.sampling);
    const auto response = llm.call(request);
    backend::validate_result(request.capability, response.result);
    std::string text = clean_generation(response.result.at("text").get<std::string>());
    MatchResult match = check_semantic_preservation(text, cpt, options.match);
    discarded.attempts = attempt;
    if (match.passed) {
      return make_caption_record(cpt.id(), Track::kContextual, std::move(text), std::move(match),
                                 attempt,
                                 response.model_id.empty() ? "unknown" : response.model_id);
    }
    discarded.last_text = std::move(text);
    discarded.reason = std::string(to_string(match.failure)) + ": " + match.failure_detail;
  }
  return discarded;
}

}  // namespace autocomp
