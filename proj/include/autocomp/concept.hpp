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

#include <cstdint>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "autocomp/error.hpp"
#include "autocomp/hash.hpp"
#include "autocomp/vocabulary.hpp"

namespace autocomp {

enum class TaskKind { kColorBinding, kPositionBinding };

inline std::string_view to_string(TaskKind task) {
  return task == TaskKind::kColorBinding ? "color" : "position";
}

inline TaskKind task_from_string(std::string_view s) {
  if (s == "color" || s == "ColorBinding") return TaskKind::kColorBinding;
  if (s == "position" || s == "PositionBinding") return TaskKind::kPositionBinding;
  throw Error(ErrorCode::kInvalidArgument, "unknown task '" + std::string(s) + "'");
}

// Attribute arity: N colors for color binding, N-1 chained relations for
// position binding.
inline int attribute_arity(TaskKind task, int n) {
  return task == TaskKind::kColorBinding ? n : n - 1;
}

// Ground-truth scene definition: ordered objects plus task attributes.
// Immutable once built; the identifier is computed at construction.
class Concept {
 public:
  static Concept make(TaskKind task, std::vector<ObjectEntry> objects,
                      std::vector<std::string> colors,
                      std::vector<RelationEntry> relations) {
    Concept c;
    c.task_ = task;
    c.objects_ = std::move(objects);
    c.colors_ = std::move(colors);
    c.relations_ = std::move(relations);
    for (auto& o : c.objects_) {
      o.name = normalize_phrase(o.name);
      o.plural = normalize_phrase(o.plural);
    }
    for (auto& a : c.colors_) a = normalize_phrase(a);
    for (auto& r : c.relations_) {
      r.name = normalize_phrase(r.name);
      r.inverse = normalize_phrase(r.inverse);
    }
    c.validate();
    c.id_ = compute_id(c);
    return c;
  }

  TaskKind task() const { return task_; }
  int n() const { return static_cast<int>(objects_.size()); }
  const std::vector<ObjectEntry>& objects() const { return objects_; }
  const std::vector<std::string>& colors() const { return colors_; }
  const std::vector<RelationEntry>& relations() const { return relations_; }
  const std::string& id() const { return id_; }

  bool operator==(const Concept& other) const {
    return task_ == other.task_ && objects_ == other.objects_ &&
           colors_ == other.colors_ && relations_ == other.relations_;
  }

 private:
  Concept() = default;

  void validate() const {
    if (objects_.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "concept needs at least one object");
    }
    const int n = static_cast<int>(objects_.size());
    const std::size_t attrs = task_ == TaskKind::kColorBinding ? colors_.size()
                                                                : relations_.size();
    if (static_cast<int>(attrs) != attribute_arity(task_, n) ||
        (task_ == TaskKind::kColorBinding && !relations_.empty()) ||
        (task_ == TaskKind::kPositionBinding && !colors_.empty())) {
      throw Error(ErrorCode::kInvalidArgument, "concept attribute arity does not match task");
    }
    auto distinct = [](auto begin, auto end, auto key) {
      std::set<std::string> seen;
      for (auto it = begin; it != end; ++it) {
        if (!seen.insert(key(*it)).second) return false;
      }
      return true;
    };
    if (!distinct(objects_.begin(), objects_.end(), [](auto& o) { return o.name; }) ||
        !distinct(colors_.begin(), colors_.end(), [](auto& a) { return a; }) ||
        !distinct(relations_.begin(), relations_.end(), [](auto& r) { return r.name; })) {
      throw Error(ErrorCode::kInvalidArgument, "concept elements must be pairwise distinct");
    }
  }

  static std::string compute_id(const Concept& c) {
    std::string preimage = "autocomp-concept/1\x1e";
    preimage += to_string(c.task_);
    preimage += '\x1e';
    for (const auto& o : c.objects_) preimage += o.name + '\x1f';
    preimage += '\x1e';
    for (const auto& a : c.colors_) preimage += a + '\x1f';
    for (const auto& r : c.relations_) preimage += r.name + '\x1f';
    return sha256_hex(preimage).substr(0, 16);
  }

  TaskKind task_ = TaskKind::kColorBinding;
  std::vector<ObjectEntry> objects_;
  std::vector<std::string> colors_;
  std::vector<RelationEntry> relations_;
  std::string id_;
};

inline const std::string& concept_id(const Concept& c) { return c.id(); }

inline json to_json(const Concept& c) {
  json j;
  j["task"] = to_string(c.task());
  j["n"] = c.n();
  j["objects"] = json::array();
  for (const auto& o : c.objects()) j["objects"].push_back(to_json(o));
  j["colors"] = c.colors();
  j["relations"] = json::array();
  for (const auto& r : c.relations()) j["relations"].push_back(to_json(r));
  return j;
}

inline Concept concept_from_json(const json& j) {
  try {
    std::vector<ObjectEntry> objects;
    for (const auto& o : j.at("objects")) objects.push_back(object_from_json(o));
    std::vector<std::string> colors = j.value("colors", std::vector<std::string>{});
    std::vector<RelationEntry> relations;
    for (const auto& r : j.value("relations", json::array())) {
      relations.push_back(relation_from_json(r));
    }
    Concept c = Concept::make(task_from_string(j.at("task").get<std::string>()),
                              std::move(objects), std::move(colors), std::move(relations));
    if (j.contains("n") && j.at("n").get<int>() != c.n()) {
      throw Error(ErrorCode::kInvariantViolation, "concept n does not match objects");
    }
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvariantViolation, std::string("malformed concept: ") + e.what());
  }
}

// Builds a concept from vocabulary names.
inline Concept make_concept(const Vocabulary& vocab, TaskKind task,
                            const std::vector<std::string>& object_names,
                            const std::vector<std::string>& attributes) {
  std::vector<ObjectEntry> objects;
  for (const auto& name : object_names) {
    const ObjectEntry* o = vocab.find_object(normalize_phrase(name));
    if (!o) throw Error(ErrorCode::kInvalidArgument, "unknown object '" + name + "'");
    objects.push_back(*o);
  }
  std::vector<std::string> colors;
  std::vector<RelationEntry> relations;
  for (const auto& a : attributes) {
    std::string norm = normalize_phrase(a);
    if (task == TaskKind::kColorBinding) {
      if (!vocab.has_color(norm)) throw Error(ErrorCode::kInvalidArgument, "unknown color '" + a + "'");
      colors.push_back(norm);
    } else {
      const RelationEntry* r = vocab.find_relation(norm);
      if (!r) throw Error(ErrorCode::kInvalidArgument, "unknown relation '" + a + "'");
      relations.push_back(*r);
    }
  }
  return Concept::make(task, std::move(objects), std::move(colors), std::move(relations));
}

namespace detail {

// k-permutations of m items, saturating at UINT64_MAX.
inline std::uint64_t falling_factorial(std::uint64_t m, std::uint64_t k) {
  std::uint64_t out = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    const std::uint64_t f = m - i;
    if (f != 0 && out > std::numeric_limits<std::uint64_t>::max() / f) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    out *= f;
  }
  return out;
}

inline std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return a * b;
}

// Draws k distinct indices from [0, m) in draw order (partial Fisher-Yates).
inline std::vector<std::size_t> draw_distinct(Rng& rng, std::size_t m, std::size_t k) {
  std::vector<std::size_t> pool(m);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + rng.below(m - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

// Decodes a rank in [0, P(m,k)) into the k-permutation with that rank.
inline std::vector<std::size_t> unrank_permutation(std::uint64_t rank, std::size_t m,
                                                   std::size_t k) {
  std::vector<std::size_t> pool(m);
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < k; ++i) {
    std::uint64_t rest = falling_factorial(m - i - 1, k - i - 1);
    std::size_t pick = static_cast<std::size_t>(rank / rest);
    rank %= rest;
    out.push_back(pool[pick]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return out;
}

}  // namespace detail

// Number of distinct concepts (ordered objects, ordered attributes) the
// vocabulary admits for (task, n); saturates at UINT64_MAX.
inline std::uint64_t concept_space_size(const Vocabulary& vocab, TaskKind task, int n) {
  const std::size_t k = static_cast<std::size_t>(attribute_arity(task, n));
  const std::size_t attrs = task == TaskKind::kColorBinding ? vocab.colors().size()
                                                            : vocab.relations().size();
  if (vocab.objects().size() < static_cast<std::size_t>(n) || attrs < k) return 0;
  return detail::saturating_mul(detail::falling_factorial(vocab.objects().size(), n),
                                detail::falling_factorial(attrs, k));
}

// Draws `count` pairwise-distinct concepts. The result is a pure function of
// (vocab.version, task, n, count, seed).
inline std::vector<Concept> sample_concepts(const Vocabulary& vocab, TaskKind task, int n,
                                            std::size_t count, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "n must be >= 1");
  const std::size_t k = static_cast<std::size_t>(attribute_arity(task, n));
  const std::size_t attr_pool = task == TaskKind::kColorBinding ? vocab.colors().size()
                                                                : vocab.relations().size();
  if (vocab.objects().size() < static_cast<std::size_t>(n) || attr_pool < k) {
    throw Error(ErrorCode::kInsufficientVocabulary,
                "vocabulary cannot supply " + std::to_string(n) + " distinct objects and " +
                    std::to_string(k) + " distinct attributes");
  }
  const std::uint64_t space = concept_space_size(vocab, task, n);
  if (count > space) {
    throw Error(ErrorCode::kDuplicateExhaustion,
                "only " + std::to_string(space) + " distinct concepts exist, " +
                    std::to_string(count) + " requested");
  }

  Rng rng = Rng::stream(seed, hash64(vocab.version() + "|" + std::string(to_string(task)) +
                                     "|" + std::to_string(n)));
  auto build = [&](const std::vector<std::size_t>& obj_idx,
                   const std::vector<std::size_t>& attr_idx) {
    std::vector<ObjectEntry> objects;
    for (auto i : obj_idx) objects.push_back(vocab.objects()[i]);
    std::vector<std::string> colors;
    std::vector<RelationEntry> relations;
    for (auto i : attr_idx) {
      if (task == TaskKind::kColorBinding) {
        colors.push_back(vocab.colors()[i].name);
      } else {
        relations.push_back(vocab.relations()[i]);
      }
    }
    return Concept::make(task, std::move(objects), std::move(colors), std::move(relations));
  };

  std::vector<Concept> out;
  out.reserve(count);
  const std::uint64_t attr_space = detail::falling_factorial(attr_pool, k);
  if (space <= 4 * static_cast<std::uint64_t>(count) && space <= 5'000'000) {
    // Dense request: shuffle the ranks of the whole space and take a prefix.
    std::vector<std::uint64_t> ranks(space);
    std::iota(ranks.begin(), ranks.end(), 0);
    for (std::size_t i = 0; i < count; ++i) {
      std::size_t j = i + rng.below(space - i);
      std::swap(ranks[i], ranks[j]);
      out.push_back(build(
          detail::unrank_permutation(ranks[i] / attr_space, vocab.objects().size(), n),
          detail::unrank_permutation(ranks[i] % attr_space, attr_pool, k)));
    }
    return out;
  }
  std::unordered_set<std::string> seen;
  while (out.size() < count) {
    auto obj_idx = detail::draw_distinct(rng, vocab.objects().size(), n);
    auto attr_idx = detail::draw_distinct(rng, attr_pool, k);
    Concept c = build(obj_idx, attr_idx);
    if (seen.insert(c.id()).second) out.push_back(std::move(c));
  }
  return out;
}

}  // namespace autocomp
