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
#include <array>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "autocomp/caption.hpp"
#include "autocomp/rational.hpp"

namespace autocomp {

inline std::uint64_t ipow(std::uint64_t base, int exp) {
  std::uint64_t out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

inline std::uint64_t factorial(int n) {
  std::uint64_t out = 1;
  for (int i = 2; i <= n; ++i) out *= static_cast<std::uint64_t>(i);
  return out;
}

inline void require_arity(int n) {
  if (n < 2) {
    throw Error(ErrorCode::kArityTooSmall, "hard negatives need N >= 2, got " + std::to_string(n));
  }
}

// Closed-form number of hard negatives per concept.
inline std::uint64_t negative_count(TaskKind task, int n, Scheme scheme) {
  require_arity(n);
  if (scheme == Scheme::kSwap) return factorial(n) - 1;
  if (scheme != Scheme::kConfusion) {
    throw Error(ErrorCode::kInvalidArgument, "negative_count needs swap or confusion");
  }
  if (task == TaskKind::kColorBinding) return ipow(n, 2 * n) - 1;
  return ipow(n, n) * ipow(n - 1, n - 1) - 1;
}

// Probability that a uniform guess over positive + negatives is correct.
inline Rational chance_baseline(TaskKind task, int n, Scheme scheme) {
  return Rational(1, static_cast<std::int64_t>(negative_count(task, n, scheme) + 1));
}

inline bool is_identity(const Arrangement& a) {
  for (std::size_t i = 0; i < a.objects.size(); ++i) {
    if (a.objects[i] != static_cast<int>(i)) return false;
  }
  for (std::size_t i = 0; i < a.attributes.size(); ++i) {
    if (a.attributes[i] != static_cast<int>(i)) return false;
  }
  return true;
}

// Multiset of (object, attribute) pairs for color binding or
// (object, relation, object) triples for position binding.
inline std::vector<std::array<int, 3>> binding_multiset(TaskKind task, const Arrangement& a) {
  std::vector<std::array<int, 3>> out;
  if (task == TaskKind::kColorBinding) {
    for (std::size_t i = 0; i < a.objects.size(); ++i) {
      out.push_back({a.objects[i], a.attributes[i], -1});
    }
  } else {
    for (std::size_t i = 0; i < a.attributes.size(); ++i) {
      out.push_back({a.objects[i], a.attributes[i], a.objects[i + 1]});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// True when `a` states the same bindings as the positive, only reordered.
inline bool is_binding_equivalent(const Concept& c, const Arrangement& a) {
  return binding_multiset(c.task(), a) == binding_multiset(c.task(), identity_arrangement(c));
}

inline std::vector<Arrangement> swap_arrangements(const Concept& c) {
  require_arity(c.n());
  std::vector<int> perm(c.n());
  std::iota(perm.begin(), perm.end(), 0);
  const Arrangement identity = identity_arrangement(c);
  std::vector<Arrangement> out;
  while (std::next_permutation(perm.begin(), perm.end())) {
    Arrangement a = identity;
    a.scheme = Scheme::kSwap;
    if (c.task() == TaskKind::kColorBinding) {
      a.attributes = perm;
    } else {
      a.objects = perm;
    }
    out.push_back(std::move(a));
  }
  return out;
}

namespace detail {

// Advances a base-`radix` odometer; false once it wraps to all zeros.
inline bool next_tuple(std::vector<int>& digits, int radix) {
  for (std::size_t i = digits.size(); i-- > 0;) {
    if (++digits[i] < radix) return true;
    digits[i] = 0;
  }
  return false;
}

}  // namespace detail

// Every with-replacement assignment of the concept's own objects and
// attributes except the positive. With `include_binding_equivalents` false,
// reorderings that state the positive's bindings are dropped as well.
inline std::vector<Arrangement> confusion_arrangements(const Concept& c,
                                                       bool include_binding_equivalents = true) {
  require_arity(c.n());
  const int n = c.n();
  const int arity = attribute_arity(c.task(), n);
  const int attr_pool = c.task() == TaskKind::kColorBinding ? n : n - 1;
  std::vector<Arrangement> out;
  out.reserve(negative_count(c.task(), n, Scheme::kConfusion));
  std::vector<int> objects(n, 0);
  do {
    std::vector<int> attrs(arity, 0);
    do {
      Arrangement a{objects, attrs, Scheme::kConfusion};
      if (is_identity(a)) continue;
      if (!include_binding_equivalents && is_binding_equivalent(c, a)) continue;
      out.push_back(std::move(a));
    } while (detail::next_tuple(attrs, attr_pool));
  } while (detail::next_tuple(objects, n));
  return out;
}

enum class ErrorCategory { kSwappedColors, kSameColorDiffObj, kSameColorSameObj, kSameObjDiffColors };

inline constexpr std::array<ErrorCategory, 4> kErrorCategories = {
    ErrorCategory::kSwappedColors, ErrorCategory::kSameColorDiffObj,
    ErrorCategory::kSameColorSameObj, ErrorCategory::kSameObjDiffColors};

inline std::string_view to_string(ErrorCategory e) {
  switch (e) {
    case ErrorCategory::kSwappedColors: return "swapped_colors";
    case ErrorCategory::kSameColorDiffObj: return "same_color_diff_obj";
    case ErrorCategory::kSameColorSameObj: return "same_color_same_obj";
    case ErrorCategory::kSameObjDiffColors: return "same_obj_diff_colors";
  }
  return "swapped_colors";
}

// Buckets a color-binding distractor by which elements it repeats.
inline ErrorCategory classify_error(const Arrangement& a, const Concept& c) {
  if (c.task() != TaskKind::kColorBinding) {
    throw Error(ErrorCode::kNotApplicable, "error taxonomy is defined for color binding only");
  }
  check_arrangement_shape(c, a);
  if (is_identity(a)) {
    throw Error(ErrorCode::kNotApplicable, "the positive arrangement is not an error");
  }
  auto has_repeat = [](std::vector<int> v) {
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end()) != v.end();
  };
  const bool repeated_objects = has_repeat(a.objects);
  const bool repeated_colors = has_repeat(a.attributes);
  if (repeated_objects && repeated_colors) return ErrorCategory::kSameColorSameObj;
  if (repeated_colors) return ErrorCategory::kSameColorDiffObj;
  if (repeated_objects) return ErrorCategory::kSameObjDiffColors;
  return ErrorCategory::kSwappedColors;
}

struct NegativeVariant {
  Arrangement arrangement;
  std::string text;
};

struct NegativeSet {
  std::string concept_id;
  Track track = Track::kMinimal;
  Scheme scheme = Scheme::kSwap;
  bool includes_binding_equivalents = true;
  std::vector<NegativeVariant> variants;
};

// Caption for `arrangement`: the template re-render for minimal records,
// span substitution into the verified caption for contextual ones.
inline std::string render_negative(const CaptionRecord& record, const Concept& c,
                                   const Arrangement& arrangement) {
  if (record.concept_id != c.id()) {
    throw Error(ErrorCode::kSpanMismatch, "caption record belongs to another concept");
  }
  if (record.track == Track::kMinimal) {
    return render_minimal_text(apply_arrangement(c, arrangement));
  }
  return substitute_spans(record, c, arrangement);
}

inline NegativeSet make_negative_set(const CaptionRecord& record, const Concept& c,
                                     Scheme scheme, bool include_binding_equivalents = true) {
  NegativeSet set;
  set.concept_id = c.id();
  set.track = record.track;
  set.scheme = scheme;
  set.includes_binding_equivalents = include_binding_equivalents;
  std::vector<Arrangement> arrangements =
      scheme == Scheme::kSwap ? swap_arrangements(c)
                              : confusion_arrangements(c, include_binding_equivalents);
  if (scheme == Scheme::kSwap && !include_binding_equivalents) {
    std::erase_if(arrangements, [&](const auto& a) { return is_binding_equivalent(c, a); });
  }
  std::set<std::string> seen{record.text};
  for (auto& a : arrangements) {
    std::string text = render_negative(record, c, a);
    if (!seen.insert(text).second) continue;
    set.variants.push_back({std::move(a), std::move(text)});
  }
  return set;
}

enum class SingleObjectVariation { kVaryColor, kVaryObject };

// Single-object sanity negatives: the one color (or object) replaced by
// every other vocabulary entry.
inline std::vector<std::string> single_object_negatives(const CaptionRecord& record,
                                                        const Concept& c, const Vocabulary& vocab,
                                                        SingleObjectVariation variation) {
  if (c.task() != TaskKind::kColorBinding || c.n() != 1) {
    throw Error(ErrorCode::kNotApplicable, "single-object negatives need a color concept with N=1");
  }
  std::vector<std::string> out;
  BindingTarget base = binding_target(c);
  auto render = [&](const BindingTarget& t) {
    return record.track == Track::kMinimal ? render_minimal_text(t) : substitute_target(record, t);
  };
  if (variation == SingleObjectVariation::kVaryColor) {
    for (const auto& color : vocab.colors()) {
      if (color.name == c.colors()[0]) continue;
      BindingTarget t = base;
      t.colors[0] = color.name;
      out.push_back(render(t));
    }
  } else {
    for (const auto& o : vocab.objects()) {
      if (o.name == c.objects()[0].name) continue;
      BindingTarget t = base;
      t.objects[0] = o;
      out.push_back(render(t));
    }
  }
  return out;
}

inline json to_json(const NegativeSet& s) {
  json variants = json::array();
  for (const auto& v : s.variants) {
    variants.push_back(json{{"objects", v.arrangement.objects},
                            {"attributes", v.arrangement.attributes},
                            {"text", v.text}});
  }
  return json{{"concept_id", s.concept_id},
              {"track", to_string(s.track)},
              {"scheme", to_string(s.scheme)},
              {"includes_binding_equivalents", s.includes_binding_equivalents},
              {"variants", variants}};
}

inline NegativeSet negative_set_from_json(const json& j) {
  NegativeSet s;
  s.concept_id = j.at("concept_id").get<std::string>();
  s.track = track_from_string(j.at("track").get<std::string>());
  s.scheme = scheme_from_string(j.at("scheme").get<std::string>());
  s.includes_binding_equivalents = j.value("includes_binding_equivalents", true);
  for (const auto& v : j.at("variants")) {
    Arrangement a{v.at("objects").get<std::vector<int>>(),
                  v.at("attributes").get<std::vector<int>>(), s.scheme};
    s.variants.push_back({std::move(a), v.at("text").get<std::string>()});
  }
  return s;
}

}  // namespace autocomp
