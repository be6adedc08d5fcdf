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

#include <string>
#include <vector>

#include "autocomp/concept.hpp"

namespace autocomp {

enum class Scheme { kPositive, kSwap, kConfusion };

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::kPositive: return "positive";
    case Scheme::kSwap: return "swap";
    case Scheme::kConfusion: return "confusion";
  }
  return "positive";
}

inline Scheme scheme_from_string(std::string_view s) {
  if (s == "positive") return Scheme::kPositive;
  if (s == "swap") return Scheme::kSwap;
  if (s == "confusion") return Scheme::kConfusion;
  throw Error(ErrorCode::kInvalidArgument, "unknown scheme '" + std::string(s) + "'");
}

// One assignment of a concept's own elements to the caption slots. Indices
// point into the concept's objects and its colors (color binding) or
// relations (position binding); repeats are allowed for confusion.
struct Arrangement {
  std::vector<int> objects;
  std::vector<int> attributes;
  Scheme scheme = Scheme::kPositive;

  bool operator==(const Arrangement& o) const {
    return objects == o.objects && attributes == o.attributes;
  }
  bool operator<(const Arrangement& o) const {
    return objects != o.objects ? objects < o.objects : attributes < o.attributes;
  }
};

inline Arrangement identity_arrangement(const Concept& c) {
  Arrangement a;
  for (int i = 0; i < c.n(); ++i) a.objects.push_back(i);
  for (int i = 0; i < attribute_arity(c.task(), c.n()); ++i) a.attributes.push_back(i);
  return a;
}

inline json to_json(const Arrangement& a) {
  return json{{"objects", a.objects}, {"attributes", a.attributes},
              {"scheme", to_string(a.scheme)}};
}

inline Arrangement arrangement_from_json(const json& j) {
  Arrangement a;
  a.objects = j.at("objects").get<std::vector<int>>();
  a.attributes = j.at("attributes").get<std::vector<int>>();
  a.scheme = scheme_from_string(j.value("scheme", std::string("positive")));
  return a;
}

// Surface elements a caption must bind: a concept, or a concept seen through
// an arrangement (where elements may repeat).
struct BindingTarget {
  TaskKind task = TaskKind::kColorBinding;
  std::vector<ObjectEntry> objects;
  std::vector<std::string> colors;
  std::vector<RelationEntry> relations;

  int n() const { return static_cast<int>(objects.size()); }
};

inline BindingTarget binding_target(const Concept& c) {
  return {c.task(), c.objects(), c.colors(), c.relations()};
}

inline void check_arrangement_shape(const Concept& c, const Arrangement& a) {
  const int arity = attribute_arity(c.task(), c.n());
  const int attr_pool = c.task() == TaskKind::kColorBinding
                            ? static_cast<int>(c.colors().size())
                            : static_cast<int>(c.relations().size());
  bool ok = static_cast<int>(a.objects.size()) == c.n() &&
            static_cast<int>(a.attributes.size()) == arity;
  for (int i : a.objects) ok = ok && i >= 0 && i < c.n();
  for (int i : a.attributes) ok = ok && i >= 0 && i < attr_pool;
  if (!ok) {
    throw Error(ErrorCode::kSpanMismatch, "arrangement does not fit concept " + c.id());
  }
}

inline BindingTarget apply_arrangement(const Concept& c, const Arrangement& a) {
  check_arrangement_shape(c, a);
  BindingTarget t;
  t.task = c.task();
  for (int i : a.objects) t.objects.push_back(c.objects()[i]);
  for (int i : a.attributes) {
    if (c.task() == TaskKind::kColorBinding) {
      t.colors.push_back(c.colors()[i]);
    } else {
      t.relations.push_back(c.relations()[i]);
    }
  }
  return t;
}

}  // namespace autocomp
