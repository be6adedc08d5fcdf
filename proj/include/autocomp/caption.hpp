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
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "autocomp/arrangement.hpp"
#include "autocomp/text.hpp"

namespace autocomp {

enum class Track { kMinimal, kContextual };

inline std::string_view to_string(Track t) {
  return t == Track::kMinimal ? "minimal" : "contextual";
}

inline Track track_from_string(std::string_view s) {
  if (s == "minimal") return Track::kMinimal;
  if (s == "contextual") return Track::kContextual;
  throw Error(ErrorCode::kInvalidArgument, "unknown track '" + std::string(s) + "'");
}

inline constexpr std::string_view kWhiteBackgroundSuffix = " on a white background";
inline constexpr std::string_view kMinimalGeneratorId = "template/minimal-1";

// Half-open range of token indices.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const Span&) const = default;
};

struct NounPhrase {
  std::optional<Span> article;
  std::optional<Span> modifier;
  Span noun;
  bool operator==(const NounPhrase&) const = default;
};

// Token spans of one accepted binding. Color binding fills `subject` and
// `attribute` (the color sits between the modifier and the noun); position
// binding fills `subject`, `relation` and `second`. The single-object
// position case only fills `subject`.
struct BindingMatch {
  std::size_t binding_index = 0;
  NounPhrase subject;
  std::optional<Span> attribute;
  std::optional<Span> relation;
  std::optional<NounPhrase> second;
  bool operator==(const BindingMatch&) const = default;
};

enum class MatchFailure { kNone, kEmptyText, kMissingBinding, kAmbiguousBinding };

inline std::string_view to_string(MatchFailure f) {
  switch (f) {
    case MatchFailure::kNone: return "none";
    case MatchFailure::kEmptyText: return "empty_text";
    case MatchFailure::kMissingBinding: return "missing_binding";
    case MatchFailure::kAmbiguousBinding: return "ambiguous_binding";
  }
  return "none";
}

struct MatchResult {
  bool passed = false;
  std::vector<BindingMatch> bindings;
  MatchFailure failure = MatchFailure::kNone;
  std::string failure_detail;
};

struct MatchOptions {
  // Filler tokens allowed between a subject object and its relation (0..2).
  int relation_gap = 0;
  // When set, tokens of every vocabulary object and color are barred from the
  // modifier slot, not only those of the target cpt.
  const Vocabulary* vocabulary = nullptr;
};

inline int required_binding_count(TaskKind task, int n) {
  if (task == TaskKind::kColorBinding) return n;
  return n >= 2 ? n - 1 : 1;
}

namespace detail {

class BindingMatcher {
 public:
  BindingMatcher(const std::vector<Token>& tokens, const BindingTarget& target,
                 const MatchOptions& options)
      : target_(target), options_(options) {
    for (const auto& t : tokens) words_.push_back(t.text);
    if (options.vocabulary) reserved_ = options.vocabulary->content_tokens();
    for (const auto& o : target.objects) {
      for (auto& w : split_words(o.name)) reserved_.insert(w);
      for (auto& w : split_words(o.plural)) reserved_.insert(w);
    }
    for (const auto& c : target.colors) reserved_.insert(c);
  }

  MatchResult run() const {
    MatchResult result;
    const int count = required_binding_count(target_.task, target_.n());
    std::map<std::string, std::vector<int>> groups;
    for (int i = 0; i < count; ++i) groups[binding_key(i)].push_back(i);
    for (const auto& [key, members] : groups) {
      auto anchors = find_anchors(members.front());
      if (anchors.size() != members.size()) {
        result.passed = false;
        result.failure = anchors.size() < members.size() ? MatchFailure::kMissingBinding
                                                         : MatchFailure::kAmbiguousBinding;
        result.failure_detail = describe(members.front()) + ": expected " +
                                std::to_string(members.size()) + " match(es), found " +
                                std::to_string(anchors.size());
        result.bindings.clear();
        return result;
      }
      for (std::size_t k = 0; k < members.size(); ++k) {
        anchors[k].binding_index = static_cast<std::size_t>(members[k]);
        result.bindings.push_back(anchors[k]);
      }
    }
    std::sort(result.bindings.begin(), result.bindings.end(),
              [](const auto& a, const auto& b) { return a.binding_index < b.binding_index; });
    result.passed = true;
    return result;
  }

 private:
  std::string binding_key(int i) const {
    if (target_.task == TaskKind::kColorBinding) {
      return target_.colors[i] + "\x1f" + target_.objects[i].name;
    }
    if (target_.n() < 2) return target_.objects[0].name;
    return target_.objects[i].name + "\x1f" + target_.relations[i].name + "\x1f" +
           target_.objects[i + 1].name;
  }

  std::string describe(int i) const {
    if (target_.task == TaskKind::kColorBinding) {
      return "'" + target_.colors[i] + " " + target_.objects[i].surface() + "'";
    }
    if (target_.n() < 2) return "'" + target_.objects[0].surface() + "'";
    return "'" + target_.objects[i].surface() + " " + target_.relations[i].name + " " +
           target_.objects[i + 1].surface() + "'";
  }

  bool words_at(std::size_t pos, const std::vector<std::string>& seq) const {
    if (pos + seq.size() > words_.size()) return false;
    for (std::size_t k = 0; k < seq.size(); ++k) {
      if (words_[pos + k] != seq[k]) return false;
    }
    return true;
  }

  // Length of the object mention starting at `pos`, trying the longer form
  // first; inherently-plural entries also accept their plural.
  std::optional<std::size_t> object_at(std::size_t pos, const ObjectEntry& o) const {
    std::vector<std::vector<std::string>> forms{split_words(o.name)};
    if (o.inherently_plural()) forms.push_back(split_words(o.plural));
    std::sort(forms.begin(), forms.end(),
              [](const auto& a, const auto& b) { return a.size() > b.size(); });
    for (const auto& f : forms) {
      if (words_at(pos, f)) return f.size();
    }
    return std::nullopt;
  }

  bool is_modifier(std::size_t pos) const {
    return !is_article(words_[pos]) && reserved_.count(words_[pos]) == 0;
  }

  // Article and optional modifier immediately before the phrase head at `head`.
  std::optional<NounPhrase> leading(std::size_t head, bool plural) const {
    NounPhrase np;
    if (head >= 1 && is_article(words_[head - 1])) {
      np.article = Span{head - 1, head};
      return np;
    }
    if (head >= 2 && is_article(words_[head - 2]) && is_modifier(head - 1)) {
      np.article = Span{head - 2, head - 1};
      np.modifier = Span{head - 1, head};
      return np;
    }
    if (plural) return np;
    return std::nullopt;
  }

  // Noun phrase for `o` starting at `pos`: Article [Word] object.
  std::optional<NounPhrase> trailing(std::size_t pos, const ObjectEntry& o) const {
    if (pos < words_.size() && is_article(words_[pos])) {
      if (auto len = object_at(pos + 1, o)) {
        return NounPhrase{Span{pos, pos + 1}, std::nullopt, Span{pos + 1, pos + 1 + *len}};
      }
      if (pos + 1 < words_.size() && is_modifier(pos + 1)) {
        if (auto len = object_at(pos + 2, o)) {
          return NounPhrase{Span{pos, pos + 1}, Span{pos + 1, pos + 2},
                            Span{pos + 2, pos + 2 + *len}};
        }
      }
    }
    if (o.inherently_plural()) {
      if (auto len = object_at(pos, o)) {
        return NounPhrase{std::nullopt, std::nullopt, Span{pos, pos + *len}};
      }
    }
    return std::nullopt;
  }

  std::vector<BindingMatch> find_anchors(int i) const {
    std::vector<BindingMatch> out;
    const std::size_t n = words_.size();
    if (target_.task == TaskKind::kColorBinding) {
      const ObjectEntry& o = target_.objects[i];
      for (std::size_t q = 0; q < n; ++q) {
        if (words_[q] != target_.colors[i]) continue;
        auto len = object_at(q + 1, o);
        if (!len) continue;
        auto np = leading(q, o.inherently_plural());
        if (!np) continue;
        BindingMatch m;
        m.subject = *np;
        m.subject.noun = Span{q + 1, q + 1 + *len};
        m.attribute = Span{q, q + 1};
        out.push_back(m);
      }
      return out;
    }
    const ObjectEntry& first = target_.objects[i];
    for (std::size_t p = 0; p < n; ++p) {
      auto len = object_at(p, first);
      if (!len) continue;
      auto np = leading(p, first.inherently_plural());
      if (!np) continue;
      np->noun = Span{p, p + *len};
      if (target_.n() < 2) {
        BindingMatch m;
        m.subject = *np;
        out.push_back(m);
        continue;
      }
      const auto relation = split_words(target_.relations[i].name);
      const int gap_limit = std::clamp(options_.relation_gap, 0, 2);
      for (int gap = 0; gap <= gap_limit; ++gap) {
        const std::size_t r = p + *len + static_cast<std::size_t>(gap);
        if (!words_at(r, relation)) continue;
        auto second = trailing(r + relation.size(), target_.objects[i + 1]);
        if (!second) continue;
        BindingMatch m;
        m.subject = *np;
        m.relation = Span{r, r + relation.size()};
        m.second = *second;
        out.push_back(m);
        break;
      }
    }
    return out;
  }

  const BindingTarget& target_;
  const MatchOptions& options_;
  std::vector<std::string> words_;
  std::set<std::string> reserved_;
};

}  // namespace detail

// Strict pattern check that every required binding of `target` occurs in
// `text` exactly as often as the target requires it.
inline MatchResult check_semantic_preservation(std::string_view text,
                                               const BindingTarget& target,
                                               const MatchOptions& options = {}) {
  const auto tokens = tokenize(text);
  if (tokens.empty()) {
    MatchResult r;
    r.failure = MatchFailure::kEmptyText;
    r.failure_detail = "caption is empty";
    return r;
  }
  return detail::BindingMatcher(tokens, target, options).run();
}

inline MatchResult check_semantic_preservation(std::string_view text, const Concept& cpt,
                                               const MatchOptions& options = {}) {
  return check_semantic_preservation(text, binding_target(cpt), options);
}

inline MatchResult check_semantic_preservation(std::string_view text, const Concept& cpt,
                                               const Arrangement& arrangement,
                                               const MatchOptions& options = {}) {
  return check_semantic_preservation(text, apply_arrangement(cpt, arrangement), options);
}

struct CaptionRecord {
  std::string concept_id;
  Track track = Track::kMinimal;
  std::string text;
  std::vector<Token> tokens;
  MatchResult match;
  int attempts = 1;
  std::string generator_id;
};

namespace detail {

inline std::string article_phrase(const ObjectEntry& o, std::string_view head) {
  if (o.inherently_plural()) return std::string(head);
  return std::string(indefinite_article(head)) + " " + std::string(head);
}

}  // namespace detail

// Template caption for a concept or arrangement, without any check.
inline std::string render_minimal_text(const BindingTarget& t) {
  std::string body;
  if (t.task == TaskKind::kColorBinding) {
    std::vector<std::string> items;
    for (int i = 0; i < t.n(); ++i) {
      items.push_back(detail::article_phrase(t.objects[i], t.colors[i]) + " " +
                      t.objects[i].surface());
    }
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i > 0) body += (i + 1 == items.size()) ? " and " : ", ";
      body += items[i];
    }
  } else {
    for (int i = 0; i < t.n(); ++i) {
      if (i > 0) body += " " + t.relations[i - 1].name + " ";
      body += detail::article_phrase(t.objects[i], t.objects[i].surface());
    }
  }
  return body + std::string(kWhiteBackgroundSuffix);
}

inline CaptionRecord make_caption_record(const std::string& concept_id, Track track,
                                         std::string text, MatchResult match, int attempts,
                                         std::string generator_id) {
  CaptionRecord rec;
  rec.concept_id = concept_id;
  rec.track = track;
  rec.tokens = tokenize(text);
  rec.text = std::move(text);
  rec.match = std::move(match);
  rec.attempts = attempts;
  rec.generator_id = std::move(generator_id);
  return rec;
}

inline CaptionRecord render_minimal(const Concept& cpt, const MatchOptions& options = {}) {
  std::string text = render_minimal_text(binding_target(cpt));
  MatchResult match = check_semantic_preservation(text, cpt, options);
  if (!match.passed) {
    throw Error(ErrorCode::kInvariantViolation,
                "minimal caption '" + text + "' fails its own check: " + match.failure_detail);
  }
  return make_caption_record(cpt.id(), Track::kMinimal, std::move(text), std::move(match),
                             1, std::string(kMinimalGeneratorId));
}

namespace detail {

struct TextEdit {
  std::size_t begin;  // byte offsets into the original text
  std::size_t end;
  std::string replacement;
};

inline std::string match_case(std::string replacement, std::string_view original) {
  if (!replacement.empty() && !original.empty() &&
      std::isupper(static_cast<unsigned char>(original.front()))) {
    replacement[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(replacement[0])));
  }
  return replacement;
}

class SpanRewriter {
 public:
  SpanRewriter(const CaptionRecord& record) : record_(record) {}

  void replace(Span span, const std::string& replacement, bool capitalize = false) {
    const auto [b, e] = bytes(span);
    std::string_view original(record_.text.data() + b, e - b);
    std::string rep = match_case(replacement, original);
    if (capitalize) rep = match_case(rep, "X");
    edits_.push_back({b, e, std::move(rep)});
  }

  // Rewrites a noun phrase so its article agrees with the new head word and
  // the new object's grammatical number. `head` is the first word after the
  // article; `head_changed` is false when that word is unchanged.
  void fix_article(const NounPhrase& np, const ObjectEntry& new_object,
                   std::string_view new_head, bool head_changed, Span first_replaced,
                   bool& capitalize_first) {
    capitalize_first = false;
    if (np.article) {
      const auto [b, e] = bytes(*np.article);
      std::string_view article(record_.text.data() + b, e - b);
      const std::string lower = to_lower(article);
      if (lower == "the") return;
      if (new_object.inherently_plural()) {
        const std::size_t next = np.modifier ? record_.tokens[np.modifier->begin].begin
                                             : record_.tokens[first_replaced.begin].begin;
        edits_.push_back({b, next, ""});
        capitalize_first = std::isupper(static_cast<unsigned char>(article.front())) &&
                           !np.modifier;
        return;
      }
      if (np.modifier || !head_changed) return;
      std::string fixed(indefinite_article(new_head));
      if (fixed != lower) edits_.push_back({b, e, match_case(fixed, article)});
      return;
    }
    if (!new_object.inherently_plural()) {
      const std::size_t at = record_.tokens[first_replaced.begin].begin;
      std::string_view head_original(record_.text.data() + at, 1);
      edits_.push_back({at, at, match_case(std::string(indefinite_article(new_head)) + " ",
                                           head_original)});
    }
  }

  std::string apply() {
    std::sort(edits_.begin(), edits_.end(), [](const auto& a, const auto& b) {
      return a.begin != b.begin ? a.begin < b.begin : a.end < b.end;
    });
    std::string out;
    std::size_t cursor = 0;
    for (const auto& e : edits_) {
      if (e.begin < cursor) {
        throw Error(ErrorCode::kSpanMismatch, "overlapping spans in caption record");
      }
      out.append(record_.text, cursor, e.begin - cursor);
      out += e.replacement;
      cursor = e.end;
    }
    out.append(record_.text, cursor, std::string::npos);
    return out;
  }

  std::pair<std::size_t, std::size_t> bytes(Span span) const {
    if (span.begin >= span.end || span.end > record_.tokens.size()) {
      throw Error(ErrorCode::kSpanMismatch, "span out of range for caption record");
    }
    return {record_.tokens[span.begin].begin, record_.tokens[span.end - 1].end};
  }

  std::string words(Span span) const {
    std::vector<std::string> out;
    for (std::size_t i = span.begin; i < span.end; ++i) out.push_back(record_.tokens[i].text);
    return join(out, " ");
  }

 private:
  const CaptionRecord& record_;
  std::vector<TextEdit> edits_;
};

}  // namespace detail

// Writes the surface elements of `target` into a verified caption by
// replacing only the bound attribute, object and relation tokens (plus
// article agreement fix-ups). All other bytes are left untouched.
inline std::string substitute_target(const CaptionRecord& record, const BindingTarget& target) {
  if (!record.match.passed) {
    throw Error(ErrorCode::kSpanMismatch, "caption record has no accepted match");
  }
  const int expected = required_binding_count(target.task, target.n());
  if (static_cast<int>(record.match.bindings.size()) != expected) {
    throw Error(ErrorCode::kSpanMismatch, "caption record binding count does not match arity");
  }
  for (int i = 0; i < expected; ++i) {
    if (record.match.bindings[i].binding_index != static_cast<std::size_t>(i)) {
      throw Error(ErrorCode::kSpanMismatch, "caption record bindings are not in order");
    }
  }

  detail::SpanRewriter rw(record);
  if (target.task == TaskKind::kColorBinding) {
    for (int i = 0; i < expected; ++i) {
      const BindingMatch& b = record.match.bindings[i];
      if (!b.attribute) throw Error(ErrorCode::kSpanMismatch, "color binding lacks attribute");
      const ObjectEntry& obj = target.objects[i];
      const std::string& color = target.colors[i];
      bool cap = false;
      rw.fix_article(b.subject, obj, color, rw.words(*b.attribute) != color, *b.attribute, cap);
      rw.replace(*b.attribute, color, cap);
      rw.replace(b.subject.noun, obj.surface());
    }
    return rw.apply();
  }

  // Position binding: each noun phrase occurrence belongs to one object slot;
  // the middle objects of a chain are shared by adjacent bindings.
  std::map<std::size_t, std::pair<NounPhrase, int>> phrases;
  auto claim = [&](const NounPhrase& np, int slot) {
    auto [it, inserted] = phrases.emplace(np.noun.begin, std::make_pair(np, slot));
    if (!inserted && (it->second.second != slot || !(it->second.first == np))) {
      throw Error(ErrorCode::kSpanMismatch, "noun phrase claimed by two object slots");
    }
  };
  for (int i = 0; i < expected; ++i) {
    const BindingMatch& b = record.match.bindings[i];
    claim(b.subject, i);
    if (target.n() >= 2) {
      if (!b.relation || !b.second) {
        throw Error(ErrorCode::kSpanMismatch, "position binding lacks relation spans");
      }
      claim(*b.second, i + 1);
      rw.replace(*b.relation, target.relations[i].name);
    }
  }
  for (const auto& [start, entry] : phrases) {
    const auto& [np, slot] = entry;
    const ObjectEntry& obj = target.objects[slot];
    bool cap = false;
    rw.fix_article(np, obj, obj.surface(), rw.words(np.noun) != obj.surface(), np.noun, cap);
    rw.replace(np.noun, obj.surface(), cap);
  }
  return rw.apply();
}

inline std::string substitute_spans(const CaptionRecord& record, const Concept& cpt,
                                    const Arrangement& arrangement) {
  if (record.concept_id != cpt.id()) {
    throw Error(ErrorCode::kSpanMismatch, "caption record belongs to another concept");
  }
  return substitute_target(record, apply_arrangement(cpt, arrangement));
}

// JSON forms -----------------------------------------------------------------

inline json to_json(const Span& s) { return json::array({s.begin, s.end}); }

inline json optional_span(const std::optional<Span>& s) {
  return s ? to_json(*s) : json(nullptr);
}

inline Span span_from_json(const json& j) {
  return Span{j.at(0).get<std::size_t>(), j.at(1).get<std::size_t>()};
}

inline std::optional<Span> optional_span_from_json(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return span_from_json(j.at(key));
}

inline json to_json(const NounPhrase& np) {
  return json{{"article", optional_span(np.article)},
              {"modifier", optional_span(np.modifier)},
              {"object", to_json(np.noun)}};
}

inline NounPhrase noun_phrase_from_json(const json& j) {
  return NounPhrase{optional_span_from_json(j, "article"),
                    optional_span_from_json(j, "modifier"), span_from_json(j.at("object"))};
}

inline json to_json(const BindingMatch& b) {
  json j = to_json(b.subject);
  j["binding_index"] = b.binding_index;
  j["attribute"] = optional_span(b.attribute);
  j["relation"] = optional_span(b.relation);
  j["second"] = b.second ? to_json(*b.second) : json(nullptr);
  return j;
}

inline BindingMatch binding_match_from_json(const json& j) {
  BindingMatch b;
  b.binding_index = j.at("binding_index").get<std::size_t>();
  b.subject = noun_phrase_from_json(j);
  b.attribute = optional_span_from_json(j, "attribute");
  b.relation = optional_span_from_json(j, "relation");
  if (j.contains("second") && !j.at("second").is_null()) {
    b.second = noun_phrase_from_json(j.at("second"));
  }
  return b;
}

inline json to_json(const CaptionRecord& r) {
  json j;
  j["track"] = to_string(r.track);
  j["text"] = r.text;
  json tokens = json::array();
  for (const auto& t : r.tokens) tokens.push_back(t.text);
  j["tokens"] = tokens;
  json bindings = json::array();
  for (const auto& b : r.match.bindings) bindings.push_back(to_json(b));
  j["bindings"] = bindings;
  j["attempts"] = r.attempts;
  j["generator_id"] = r.generator_id;
  return j;
}

inline CaptionRecord caption_from_json(const json& j, const std::string& concept_id) {
  CaptionRecord r;
  r.concept_id = concept_id;
  r.track = track_from_string(j.at("track").get<std::string>());
  r.text = j.at("text").get<std::string>();
  r.tokens = tokenize(r.text);
  if (j.contains("tokens")) {
    auto stored = j.at("tokens").get<std::vector<std::string>>();
    std::vector<std::string> actual;
    for (const auto& t : r.tokens) actual.push_back(t.text);
    if (stored != actual) {
      throw Error(ErrorCode::kInvariantViolation, "caption tokens do not match caption text");
    }
  }
  for (const auto& b : j.at("bindings")) r.match.bindings.push_back(binding_match_from_json(b));
  r.match.passed = true;
  r.attempts = j.value("attempts", 1);
  r.generator_id = j.value("generator_id", std::string());
  return r;
}

}  // namespace autocomp
