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

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "autocomp/negatives.hpp"
#include "test_support.hpp"

namespace autocomp {
namespace {

// Independent enumerator: nested index loops over every with-replacement
// tuple, counted without any odometer or permutation helper.
struct Enumerated {
  std::uint64_t permutations = 0;  // non-identity permutations of the swapped side
  std::uint64_t products = 0;      // non-identity with-replacement tuples
};

void for_each_tuple(int len, int radix, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> t(len, 0);
  std::uint64_t total = 1;
  for (int i = 0; i < len; ++i) total *= static_cast<std::uint64_t>(radix);
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t rest = code;
    for (int i = len - 1; i >= 0; --i) {
      t[i] = static_cast<int>(rest % static_cast<std::uint64_t>(radix));
      rest /= static_cast<std::uint64_t>(radix);
    }
    f(t);
  }
}

bool all_distinct(const std::vector<int>& v) {
  return std::set<int>(v.begin(), v.end()).size() == v.size();
}

bool identity(const std::vector<int>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != static_cast<int>(i)) return false;
  }
  return true;
}

Enumerated enumerate(TaskKind task, int n) {
  Enumerated e;
  const int arity = task == TaskKind::kColorBinding ? n : n - 1;
  const int pool = task == TaskKind::kColorBinding ? n : n - 1;
  const int swap_len = n;
  for_each_tuple(swap_len, n, [&](const std::vector<int>& t) {
    if (all_distinct(t) && !identity(t)) ++e.permutations;
  });
  for_each_tuple(n, n, [&](const std::vector<int>& objs) {
    for_each_tuple(arity, pool, [&](const std::vector<int>& attrs) {
      if (!(identity(objs) && identity(attrs))) ++e.products;
    });
  });
  return e;
}

Concept concept_for(TaskKind task, int n) {
  static const Vocabulary v = testing::shapes_vocabulary();
  std::vector<std::string> objs{"cube", "sphere", "cone", "chair"};
  objs.resize(n);
  if (task == TaskKind::kColorBinding) {
    std::vector<std::string> cols{"red", "blue", "green", "yellow"};
    cols.resize(n);
    return make_concept(v, task, objs, cols);
  }
  std::vector<std::string> rels{"over", "to the left of", "under"};
  rels.resize(n - 1);
  return make_concept(v, task, objs, rels);
}

TEST(NegativeCountTest, ClosedFormsMatchEnumeration) {
  for (TaskKind task : {TaskKind::kColorBinding, TaskKind::kPositionBinding}) {
    for (int n = 2; n <= 4; ++n) {
      const Enumerated e = enumerate(task, n);
      const Concept c = concept_for(task, n);
      EXPECT_EQ(negative_count(task, n, Scheme::kSwap), e.permutations);
      EXPECT_EQ(negative_count(task, n, Scheme::kConfusion), e.products);
      EXPECT_EQ(swap_arrangements(c).size(), e.permutations);
      EXPECT_EQ(confusion_arrangements(c).size(), e.products);
    }
  }
  EXPECT_EQ(negative_count(TaskKind::kColorBinding, 2, Scheme::kConfusion), 15u);
  EXPECT_EQ(negative_count(TaskKind::kPositionBinding, 3, Scheme::kConfusion), 107u);
  EXPECT_EQ(negative_count(TaskKind::kColorBinding, 3, Scheme::kSwap), 5u);
}

TEST(NegativeCountTest, ArityTooSmall) {
  const Concept c = concept_for(TaskKind::kColorBinding, 1);
  for (auto f : {+[](const Concept& x) { swap_arrangements(x); },
                 +[](const Concept& x) { confusion_arrangements(x); }}) {
    try {
      f(c);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kArityTooSmall);
    }
  }
  EXPECT_THROW(chance_baseline(TaskKind::kColorBinding, 1, Scheme::kSwap), Error);
}

TEST(NegativeCountTest, ChanceBaselineIsExactReciprocal) {
  for (TaskKind task : {TaskKind::kColorBinding, TaskKind::kPositionBinding}) {
    for (int n = 2; n <= 4; ++n) {
      for (Scheme s : {Scheme::kSwap, Scheme::kConfusion}) {
        const Rational p = chance_baseline(task, n, s);
        const auto total = static_cast<std::int64_t>(negative_count(task, n, s) + 1);
        EXPECT_EQ(p * Rational(total, 1), Rational(1, 1));
      }
    }
  }
  EXPECT_EQ(chance_baseline(TaskKind::kColorBinding, 2, Scheme::kSwap).to_fixed(3), "0.500");
  EXPECT_EQ(chance_baseline(TaskKind::kColorBinding, 3, Scheme::kConfusion), Rational(1, 729));
  EXPECT_EQ(chance_baseline(TaskKind::kPositionBinding, 3, Scheme::kConfusion), Rational(1, 108));
}

TEST(NegativeSetTest, NoDuplicatesAndNoPositive) {
  for (TaskKind task : {TaskKind::kColorBinding, TaskKind::kPositionBinding}) {
    for (int n = 2; n <= 3; ++n) {
      const Concept c = concept_for(task, n);
      for (const auto& list : {swap_arrangements(c), confusion_arrangements(c)}) {
        std::set<Arrangement> seen(list.begin(), list.end());
        EXPECT_EQ(seen.size(), list.size());
        EXPECT_EQ(seen.count(identity_arrangement(c)), 0u);
      }
      for (Scheme s : {Scheme::kSwap, Scheme::kConfusion}) {
        auto set = make_negative_set(render_minimal(c), c, s);
        EXPECT_EQ(set.variants.size(), negative_count(task, n, s));
      }
    }
  }
}

TEST(NegativeSetTest, SwapExamples) {
  const Concept c = concept_for(TaskKind::kColorBinding, 2);
  auto swaps = swap_arrangements(c);
  ASSERT_EQ(swaps.size(), 1u);
  EXPECT_EQ(swaps[0].attributes, (std::vector<int>{1, 0}));
  auto rec = render_minimal(c);
  EXPECT_EQ(render_negative(rec, c, swaps[0]),
            "a blue cube and a red sphere on a white background");
  Arrangement rr{{0, 1}, {0, 0}, Scheme::kConfusion};
  EXPECT_EQ(render_negative(rec, c, rr), "a red cube and a red sphere on a white background");
}

TEST(NegativeSetTest, PositionSwapReversesObjects) {
  json doc = testing::toy_vocabulary_doc({"chair", "table"}, {"red"}, false);
  doc["relations"] = json::parse(R"([
      {"name": "on top of", "inverse": "beneath"},
      {"name": "beneath", "inverse": "on top of"}])");
  Vocabulary v = load_vocabulary(doc);
  Concept c = make_concept(v, TaskKind::kPositionBinding, {"chair", "table"}, {"on top of"});
  auto swaps = swap_arrangements(c);
  ASSERT_EQ(swaps.size(), 1u);
  EXPECT_EQ(render_negative(render_minimal(c), c, swaps[0]),
            "a table on top of a chair on a white background");
}

TEST(NegativeSetTest, BindingEquivalentsFlag) {
  const Concept c = concept_for(TaskKind::kColorBinding, 2);
  // Brute-force: compare sorted (object, color) pair lists over all 16 tuples.
  std::size_t equivalent = 0;
  for_each_tuple(2, 2, [&](const std::vector<int>& o) {
    for_each_tuple(2, 2, [&](const std::vector<int>& a) {
      if (identity(o) && identity(a)) return;
      std::multiset<std::pair<int, int>> pairs{{o[0], a[0]}, {o[1], a[1]}};
      if (pairs == std::multiset<std::pair<int, int>>{{0, 0}, {1, 1}}) ++equivalent;
    });
  });
  EXPECT_EQ(equivalent, 1u);
  EXPECT_EQ(confusion_arrangements(c, false).size(), 15u - equivalent);
  auto strict = make_negative_set(render_minimal(c), c, Scheme::kConfusion, false);
  EXPECT_EQ(strict.variants.size(), 14u);
  EXPECT_FALSE(strict.includes_binding_equivalents);
}

TEST(TaxonomyTest, Examples) {
  const Concept c = concept_for(TaskKind::kColorBinding, 2);
  EXPECT_EQ(classify_error({{0, 1}, {1, 0}, Scheme::kSwap}, c), ErrorCategory::kSwappedColors);
  EXPECT_EQ(classify_error({{0, 1}, {0, 0}, Scheme::kConfusion}, c),
            ErrorCategory::kSameColorDiffObj);
  EXPECT_EQ(classify_error({{0, 0}, {0, 0}, Scheme::kConfusion}, c),
            ErrorCategory::kSameColorSameObj);
  EXPECT_EQ(classify_error({{0, 0}, {0, 1}, Scheme::kConfusion}, c),
            ErrorCategory::kSameObjDiffColors);
  try {
    classify_error(identity_arrangement(c), c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotApplicable);
  }
  const Concept p = concept_for(TaskKind::kPositionBinding, 2);
  EXPECT_THROW(classify_error({{1, 0}, {0}, Scheme::kSwap}, p), Error);
}

TEST(TaxonomyTest, PartitionBucketSizes) {
  // Oracle for N=2: count tuples by whether each side contains a repeat.
  std::map<ErrorCategory, std::size_t> oracle;
  for_each_tuple(2, 2, [&](const std::vector<int>& o) {
    for_each_tuple(2, 2, [&](const std::vector<int>& a) {
      if (identity(o) && identity(a)) return;
      const bool ro = o[0] == o[1];
      const bool ra = a[0] == a[1];
      ErrorCategory cat = ro && ra  ? ErrorCategory::kSameColorSameObj
                          : ra      ? ErrorCategory::kSameColorDiffObj
                          : ro      ? ErrorCategory::kSameObjDiffColors
                                    : ErrorCategory::kSwappedColors;
      ++oracle[cat];
    });
  });
  EXPECT_EQ(oracle[ErrorCategory::kSwappedColors], 3u);
  EXPECT_EQ(oracle[ErrorCategory::kSameColorDiffObj], 4u);
  EXPECT_EQ(oracle[ErrorCategory::kSameColorSameObj], 4u);
  EXPECT_EQ(oracle[ErrorCategory::kSameObjDiffColors], 4u);

  for (int n = 2; n <= 3; ++n) {
    const Concept c = concept_for(TaskKind::kColorBinding, n);
    std::map<ErrorCategory, std::size_t> buckets;
    const auto all = confusion_arrangements(c);
    for (const auto& a : all) ++buckets[classify_error(a, c)];
    std::size_t total = 0;
    for (auto [cat, k] : buckets) total += k;
    EXPECT_EQ(total, all.size());
    if (n == 2) {
      EXPECT_EQ(buckets, oracle);
    } else {
      EXPECT_EQ(total, 728u);
    }
  }
}

class RoundTripTest : public ::testing::TestWithParam<std::tuple<TaskKind, int, Track>> {};

TEST_P(RoundTripTest, NegativesPassOwnCheckAndSeparate) {
  const auto [task, n, track] = GetParam();
  const Concept c = concept_for(task, n);
  CaptionRecord rec = render_minimal(c);
  if (track == Track::kContextual) {
    const std::string text =
        task == TaskKind::kColorBinding
            ? (n == 2 ? "On a desk, a shiny red cube leans against the blue sphere today."
                      : "A red cube, a blue sphere and a small green cone sit together.")
            : (n == 2 ? "Indoors, a cube over a sphere rests quietly."
                      : "A cube over a sphere to the left of a cone, lit from above.");
    MatchResult m = check_semantic_preservation(text, c);
    ASSERT_TRUE(m.passed) << text << " " << m.failure_detail;
    rec = make_caption_record(c.id(), Track::kContextual, text, m, 1, "test");
  }
  for (Scheme s : {Scheme::kSwap, Scheme::kConfusion}) {
    const auto set = make_negative_set(rec, c, s);
    EXPECT_EQ(set.variants.size(), negative_count(task, n, s));
    for (const auto& v : set.variants) {
      ASSERT_TRUE(check_semantic_preservation(v.text, c, v.arrangement).passed) << v.text;
      const bool against_positive = check_semantic_preservation(v.text, c).passed;
      EXPECT_EQ(against_positive, is_binding_equivalent(c, v.arrangement)) << v.text;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(
    Exhaustive, RoundTripTest,
    ::testing::Combine(::testing::Values(TaskKind::kColorBinding, TaskKind::kPositionBinding),
                       ::testing::Values(2, 3),
                       ::testing::Values(Track::kMinimal, Track::kContextual)));

TEST(SingleObjectTest, VaryColorAndObject) {
  Vocabulary v = testing::shapes_vocabulary();
  Concept c = make_concept(v, TaskKind::kColorBinding, {"cube"}, {"red"});
  auto rec = render_minimal(c);
  auto colors = single_object_negatives(rec, c, v, SingleObjectVariation::kVaryColor);
  EXPECT_EQ(colors.size(), v.colors().size() - 1);
  EXPECT_EQ(colors.front(), "a blue cube on a white background");
  auto objects = single_object_negatives(rec, c, v, SingleObjectVariation::kVaryObject);
  EXPECT_EQ(objects.size(), v.objects().size() - 1);
  EXPECT_NE(std::find(objects.begin(), objects.end(), "red gloves on a white background"),
            objects.end());
  Concept two = make_concept(v, TaskKind::kColorBinding, {"cube", "cone"}, {"red", "blue"});
  EXPECT_THROW(single_object_negatives(render_minimal(two), two, v,
                                       SingleObjectVariation::kVaryColor),
               Error);
}

TEST(NegativeSetTest, JsonRoundTrip) {
  const Concept c = concept_for(TaskKind::kPositionBinding, 3);
  auto set = make_negative_set(render_minimal(c), c, Scheme::kConfusion);
  json j = to_json(set);
  auto back = negative_set_from_json(j);
  EXPECT_EQ(to_json(back).dump(), j.dump());
  ASSERT_EQ(back.variants.size(), 107u);
  EXPECT_EQ(back.variants[5].arrangement, set.variants[5].arrangement);
}

}  // namespace
}  // namespace autocomp
