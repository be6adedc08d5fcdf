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
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "autocomp/error.hpp"
#include "autocomp/hash.hpp"
#include "autocomp/text.hpp"

namespace autocomp {

using json = nlohmann::json;

enum class GrammaticalNumber { kSingular, kInherentlyPlural };

struct ObjectEntry {
  std::string name;    // singular noun, 1..4 tokens
  std::string plural;  // plural surface form
  GrammaticalNumber number = GrammaticalNumber::kSingular;
  int expected_count = 1;  // instances one mention denotes in an image

  bool inherently_plural() const {
    return number == GrammaticalNumber::kInherentlyPlural;
  }
  // Form used in captions: inherently-plural nouns are written in the plural.
  const std::string& surface() const { return inherently_plural() ? plural : name; }

  bool operator==(const ObjectEntry&) const = default;
};

struct ColorEntry {
  std::string name;
  bool operator==(const ColorEntry&) const = default;
};

struct RelationEntry {
  std::string name;
  std::string inverse;
  bool operator==(const RelationEntry&) const = default;
};

inline json to_json(const ObjectEntry& o) {
  return json{{"name", o.name},
              {"plural", o.plural},
              {"number", o.inherently_plural() ? "plural" : "singular"},
              {"expected_count", o.expected_count}};
}

inline json to_json(const RelationEntry& r) {
  return json{{"name", r.name}, {"inverse", r.inverse}};
}

namespace detail {

inline void require_words(const std::string& name, std::size_t max_tokens,
                          const char* what) {
  auto words = split_words(name);
  if (words.empty()) {
    throw Error(ErrorCode::kMalformedVocabulary, std::string(what) + " name is empty");
  }
  if (words.size() > max_tokens) {
    throw Error(ErrorCode::kMalformedVocabulary,
                std::string(what) + " '" + name + "' has too many tokens");
  }
}

inline std::string string_field(const json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_string()) {
    throw Error(ErrorCode::kMalformedVocabulary,
                std::string(what) + " entry needs a string '" + key + "'");
  }
  return normalize_phrase(j.at(key).get<std::string>());
}

}  // namespace detail

// Parses one object entry; `number` defaults to singular and `plural` to
// name + "s".
inline ObjectEntry object_from_json(const json& j) {
  ObjectEntry o;
  o.name = detail::string_field(j, "name", "object");
  detail::require_words(o.name, 4, "object");
  o.plural = j.contains("plural") ? detail::string_field(j, "plural", "object")
                                  : o.name + "s";
  detail::require_words(o.plural, 4, "object plural");
  std::string number = j.value("number", std::string("singular"));
  if (number == "singular") {
    o.number = GrammaticalNumber::kSingular;
  } else if (number == "plural" || number == "inherently-plural") {
    o.number = GrammaticalNumber::kInherentlyPlural;
  } else {
    throw Error(ErrorCode::kMalformedVocabulary,
                "object '" + o.name + "' has unknown number '" + number + "'");
  }
  o.expected_count = j.value("expected_count", o.inherently_plural() ? 2 : 1);
  if (o.inherently_plural() ? o.expected_count < 2 : o.expected_count != 1) {
    throw Error(ErrorCode::kMalformedVocabulary,
                "object '" + o.name + "' has inconsistent expected_count");
  }
  return o;
}

inline RelationEntry relation_from_json(const json& j) {
  RelationEntry r;
  r.name = detail::string_field(j, "name", "relation");
  detail::require_words(r.name, 4, "relation");
  if (!j.contains("inverse") || !j.at("inverse").is_string()) {
    throw Error(ErrorCode::kMalformedRelationInverse,
                "relation '" + r.name + "' declares no inverse");
  }
  r.inverse = normalize_phrase(j.at("inverse").get<std::string>());
  return r;
}

class Vocabulary {
 public:
  Vocabulary(std::vector<ObjectEntry> objects, std::vector<ColorEntry> colors,
             std::vector<RelationEntry> relations)
      : objects_(std::move(objects)),
        colors_(std::move(colors)),
        relations_(std::move(relations)) {
    validate();
    version_ = sha256_hex(canonical().dump());
  }

  const std::vector<ObjectEntry>& objects() const { return objects_; }
  const std::vector<ColorEntry>& colors() const { return colors_; }
  const std::vector<RelationEntry>& relations() const { return relations_; }
  const std::string& version() const { return version_; }

  const ObjectEntry* find_object(std::string_view name) const {
    for (const auto& o : objects_) {
      if (o.name == name) return &o;
    }
    return nullptr;
  }
  const RelationEntry* find_relation(std::string_view name) const {
    for (const auto& r : relations_) {
      if (r.name == name) return &r;
    }
    return nullptr;
  }
  bool has_color(std::string_view name) const {
    for (const auto& c : colors_) {
      if (c.name == name) return true;
    }
    return false;
  }

  // Every token occurring in an object (either number) or color name.
  std::set<std::string> content_tokens() const {
    std::set<std::string> out;
    for (const auto& o : objects_) {
      for (auto& w : split_words(o.name)) out.insert(w);
      for (auto& w : split_words(o.plural)) out.insert(w);
    }
    for (const auto& c : colors_) out.insert(c.name);
    return out;
  }

  // Content without the version field, in declaration order.
  json canonical() const {
    json doc;
    doc["objects"] = json::array();
    for (const auto& o : objects_) doc["objects"].push_back(to_json(o));
    doc["colors"] = json::array();
    for (const auto& c : colors_) doc["colors"].push_back(c.name);
    doc["relations"] = json::array();
    for (const auto& r : relations_) doc["relations"].push_back(to_json(r));
    return doc;
  }

  json to_document() const {
    json doc = canonical();
    doc["version"] = version_;
    return doc;
  }

 private:
  void validate() const {
    if (objects_.empty() && colors_.empty() && relations_.empty()) {
      throw Error(ErrorCode::kEmptyVocabulary, "vocabulary has no entries");
    }
    if (objects_.empty()) {
      throw Error(ErrorCode::kEmptyVocabulary, "vocabulary has no objects");
    }
    std::set<std::string> seen;
    for (const auto& o : objects_) {
      if (!seen.insert(o.name).second) {
        throw Error(ErrorCode::kDuplicateEntry, "duplicate object '" + o.name + "'");
      }
      for (auto& w : split_words(o.name)) {
        if (is_article(w)) {
          throw Error(ErrorCode::kMalformedVocabulary,
                      "object '" + o.name + "' contains an article");
        }
      }
    }
    seen.clear();
    for (const auto& c : colors_) {
      if (split_words(c.name).size() != 1) {
        throw Error(ErrorCode::kMalformedVocabulary,
                    "color '" + c.name + "' must be a single token");
      }
      if (is_article(c.name)) {
        throw Error(ErrorCode::kMalformedVocabulary, "color '" + c.name + "' is an article");
      }
      if (!seen.insert(c.name).second) {
        throw Error(ErrorCode::kDuplicateEntry, "duplicate color '" + c.name + "'");
      }
    }
    seen.clear();
    std::unordered_map<std::string, std::string> inverse_of;
    for (const auto& r : relations_) {
      if (is_article(r.name)) {
        throw Error(ErrorCode::kMalformedVocabulary,
                    "relation '" + r.name + "' is an article");
      }
      if (!seen.insert(r.name).second) {
        throw Error(ErrorCode::kDuplicateEntry, "duplicate relation '" + r.name + "'");
      }
      inverse_of[r.name] = r.inverse;
    }
    for (const auto& r : relations_) {
      auto it = inverse_of.find(r.inverse);
      if (it == inverse_of.end()) {
        throw Error(ErrorCode::kMalformedRelationInverse,
                    "inverse '" + r.inverse + "' of '" + r.name + "' is not declared");
      }
      if (it->second != r.name) {
        throw Error(ErrorCode::kMalformedRelationInverse,
                    "inverse of '" + r.inverse + "' is '" + it->second + "', not '" +
                        r.name + "'");
      }
    }
  }

  std::vector<ObjectEntry> objects_;
  std::vector<ColorEntry> colors_;
  std::vector<RelationEntry> relations_;
  std::string version_;
};

// Builds a vocabulary from its JSON document. A `version` field in the
// document is ignored and recomputed from content.
inline Vocabulary load_vocabulary(const json& doc) {
  if (!doc.is_object()) {
    throw Error(ErrorCode::kMalformedVocabulary, "vocabulary document must be an object");
  }
  std::vector<ObjectEntry> objects;
  std::vector<ColorEntry> colors;
  std::vector<RelationEntry> relations;
  auto array_at = [&](const char* key) -> const json& {
    static const json kEmpty = json::array();
    if (!doc.contains(key)) return kEmpty;
    if (!doc.at(key).is_array()) {
      throw Error(ErrorCode::kMalformedVocabulary, std::string(key) + " must be an array");
    }
    return doc.at(key);
  };
  for (const auto& j : array_at("objects")) objects.push_back(object_from_json(j));
  for (const auto& j : array_at("colors")) {
    std::string name = j.is_string() ? normalize_phrase(j.get<std::string>())
                                     : detail::string_field(j, "name", "color");
    colors.push_back({name});
  }
  for (const auto& j : array_at("relations")) relations.push_back(relation_from_json(j));
  return Vocabulary(std::move(objects), std::move(colors), std::move(relations));
}

inline Vocabulary load_vocabulary_text(std::string_view text) {
  json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    throw Error(ErrorCode::kMalformedVocabulary, "vocabulary document is not valid JSON");
  }
  return load_vocabulary(doc);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Vocabulary load_vocabulary_file(const std::filesystem::path& path) {
  return load_vocabulary_text(read_file(path));
}

}  // namespace autocomp
