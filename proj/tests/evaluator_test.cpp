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

#include <cmath>

#include <gtest/gtest.h>

#include "autocomp/blind.hpp"
#include "autocomp/diversity.hpp"
#include "autocomp/evaluator.hpp"
#include "test_support.hpp"

namespace autocomp {
namespace {

TEST(ScoreTrialTest, Examples) {
  auto a = score_trial({"t", {0.9, 0.1}, {}});
  EXPECT_TRUE(a.correct);
  EXPECT_FALSE(a.tie);
  auto tie = score_trial({"t", {0.5, 0.5}, {}});
  EXPECT_TRUE(tie.tie);
  EXPECT_FALSE(tie.correct);
  auto wrong = score_trial({"t", {0.2, 0.7, 0.1}, {}});
  EXPECT_EQ(wrong.chosen_index, 1u);
  EXPECT_FALSE(wrong.correct);
  EXPECT_THROW(score_trial({"t", {0.2}, {}}), Error);
  EXPECT_THROW(score_trial({"t", {0.2, NAN}, {}}), Error);
  // A tie below the maximum does not matter.
  EXPECT_TRUE(score_trial({"t", {0.9, 0.1, 0.1}, {}}).correct);
}

TEST(ScoreTrialTest, ArgmaxInvariantUnderMonotoneTransforms) {
  Rng rng(5);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t k = 2 + rng.below(10);
    std::vector<double> s(k);
    for (auto& v : s) v = static_cast<double>(rng.below(20)) / 20.0;  // ties are common
    const auto base = score_trial({"t", s, {}});
    const double scale = 0.5 + rng.unit() * 3;
    const double shift = rng.unit() * 10 - 5;
    std::vector<double> affine(k), cubed(k), expo(k);
    for (std::size_t i = 0; i < k; ++i) {
      affine[i] = scale * s[i] + shift;
      cubed[i] = s[i] * s[i] * s[i];
      expo[i] = std::exp(s[i]);
    }
    for (const auto& t : {affine, cubed, expo}) {
      const auto o = score_trial({"t", t, {}});
      ASSERT_EQ(o.correct, base.correct);
      ASSERT_EQ(o.chosen_index, base.chosen_index);
      ASSERT_EQ(o.tie, base.tie);
    }
  }
}

class AggregateTest : public ::testing::Test {
 protected:
  Vocabulary vocab = testing::shapes_vocabulary();
  Concept cube_sphere = make_concept(vocab, TaskKind::kColorBinding, {"cube", "sphere"},
                                     {"red", "blue"});
  TaggedOutcome color_conf(bool correct, std::optional<Arrangement> chosen = {}) {
    TrialTag tag{TaskKind::kColorBinding, 2, Track::kMinimal, Scheme::kConfusion, {}, cube_sphere};
    TrialOutcome o{correct, correct ? 0u : 1u, false, chosen};
    return {tag, o};
  }
};

TEST_F(AggregateTest, MicroAverage) {
  std::vector<TaggedOutcome> outs{color_conf(true), color_conf(true), color_conf(true),
                                  color_conf(false, Arrangement{{0, 1}, {0, 0}, Scheme::kConfusion})};
  auto s = aggregate(outs);
  const auto& cell = s.cells.at({TaskKind::kColorBinding, 2, Track::kMinimal, Scheme::kConfusion});
  EXPECT_EQ(cell.tally.accuracy()->to_fixed(1), "75.0");
  EXPECT_EQ(cell.errors.at(ErrorCategory::kSameColorDiffObj), 1);
}

TEST_F(AggregateTest, ErrorHistogramPartitionsIncorrectTrials) {
  std::vector<TaggedOutcome> outs;
  for (const auto& a : confusion_arrangements(cube_sphere)) outs.push_back(color_conf(false, a));
  outs.push_back(color_conf(true));
  auto s = aggregate(outs);
  const auto& cell = s.cells.begin()->second;
  std::int64_t sum = 0;
  for (auto [cat, k] : cell.errors) sum += k;
  EXPECT_EQ(sum + cell.unclassified_errors, cell.tally.total - cell.tally.correct);
  EXPECT_EQ(sum, 15);
  EXPECT_EQ(cell.errors.at(ErrorCategory::kSwappedColors), 3);
}

TEST_F(AggregateTest, PerRelationAndEmptyCells) {
  std::vector<TaggedOutcome> outs;
  auto pos = [&](const std::string& rel, bool ok) {
    return TaggedOutcome{{TaskKind::kPositionBinding, 2, Track::kMinimal, Scheme::kSwap, rel, {}},
                         {ok, ok ? 0u : 1u, false, {}}};
  };
  outs.push_back(pos("under", true));
  outs.push_back(pos("under", false));
  outs.push_back(pos("to the left of", true));
  const CellKey missing{TaskKind::kColorBinding, 3, Track::kContextual, Scheme::kSwap};
  auto s = aggregate(outs, {missing});
  const auto& cell = s.cells.at({TaskKind::kPositionBinding, 2, Track::kMinimal, Scheme::kSwap});
  EXPECT_EQ(cell.per_relation.at("under").accuracy()->to_fixed(1), "50.0");
  EXPECT_EQ(cell.per_relation.at("to the left of").accuracy()->to_fixed(1), "100.0");
  ASSERT_EQ(s.empty_cells.size(), 1u);
  EXPECT_EQ(s.empty_cells[0], missing);
  EXPECT_FALSE(s.cells.count(missing));
}

TEST(PairedDeltaTest, PublishedRowValues) {
  auto d = paired_delta(Rational::from_decimal("61.1"), Rational::from_decimal("74.6"),
                        Rational::from_decimal("51.0"), Rational::from_decimal("42.1"));
  EXPECT_EQ(*d.swap, Rational::from_decimal("13.5"));
  EXPECT_EQ(d.swap->to_fixed(1, true), "+13.5");
  EXPECT_EQ(*d.confusion, Rational::from_decimal("-8.9"));
  EXPECT_EQ(d.confusion->to_fixed(1, true), "-8.9");
  auto same = paired_delta(Rational(1, 3), Rational(1, 3), Rational(2), Rational(2));
  EXPECT_EQ(*same.swap, Rational(0));
}

TEST(PairedDeltaTest, FromScores) {
  BenchmarkScores s;
  s.cells[{TaskKind::kColorBinding, 2, Track::kMinimal, Scheme::kSwap}].tally = {1, 2};
  s.cells[{TaskKind::kColorBinding, 2, Track::kContextual, Scheme::kSwap}].tally = {3, 4};
  auto d = paired_deltas(s);
  ASSERT_TRUE(d.count({TaskKind::kColorBinding, 2}));
  EXPECT_EQ(*d.at({TaskKind::kColorBinding, 2}).swap, Rational(25));
  EXPECT_FALSE(d.at({TaskKind::kColorBinding, 2}).confusion.has_value());
}

TEST(ChanceTest, ConvergesWithinFourSigma) {
  const std::int64_t trials = 50000;
  for (TaskKind task : {TaskKind::kColorBinding, TaskKind::kPositionBinding}) {
    for (int n : {2, 3}) {
      for (Scheme s : {Scheme::kSwap, Scheme::kConfusion}) {
        const double p = chance_baseline(task, n, s).to_double();
        const auto est = simulate_random_chance(task, n, s, trials, 123, 4);
        const double sigma = std::sqrt(p * (1 - p) / trials);
        EXPECT_NEAR(est.accuracy(), p, 4 * sigma) << to_string(task) << n << to_string(s);
      }
    }
  }
}

TEST(ChanceTest, IndependentOfWorkerCount) {
  auto a = simulate_random_chance(TaskKind::kColorBinding, 2, Scheme::kConfusion, 35000, 9, 1);
  auto b = simulate_random_chance(TaskKind::kColorBinding, 2, Scheme::kConfusion, 35000, 9, 3);
  EXPECT_EQ(a.correct, b.correct);
  EXPECT_THROW(simulate_random_chance(TaskKind::kColorBinding, 2, Scheme::kSwap, 0, 1), Error);
}

std::vector<std::string> numbered(std::size_t k) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back("negative " + std::to_string(i));
  return out;
}

TEST(BlindTest, FiftyChoicesSeeded) {
  const auto negs = numbered(728);
  auto p = build_blind_prompt("positive", negs, 77, 49);
  EXPECT_EQ(p.choices.size(), 50u);
  EXPECT_EQ(p.choices[p.answer_label - 1], "positive");
  EXPECT_NE(p.text.find("50. "), std::string::npos);
  EXPECT_EQ(p.text.find("51. "), std::string::npos);
  std::set<int> distinct(p.sources.begin(), p.sources.end());
  EXPECT_EQ(distinct.size(), 50u);
  auto again = build_blind_prompt("positive", negs, 77, 49);
  EXPECT_EQ(again.text, p.text);
  EXPECT_NE(build_blind_prompt("positive", negs, 78, 49).text, p.text);
  EXPECT_THROW(build_blind_prompt("positive", numbered(3), 1, 4), Error);
  EXPECT_EQ(build_blind_prompt("positive", numbered(1), 1, 1).choices.size(), 2u);
}

TEST(BlindTest, SubsampleIsUniform) {
  const auto negs = numbered(100);
  std::vector<int> hits(100, 0);
  const int prompts = 4000;
  for (int s = 0; s < prompts; ++s) {
    for (int src : build_blind_prompt("p", negs, static_cast<std::uint64_t>(s), 10).sources) {
      if (src >= 0) ++hits[src];
    }
  }
  const double p = 0.1;
  const double sigma = std::sqrt(prompts * p * (1 - p));
  for (int h : hits) EXPECT_NEAR(h, prompts * p, 4.5 * sigma);
}

TEST(BlindTest, PositiveLabelIsUniform) {
  std::vector<int> at(5, 0);
  for (int s = 0; s < 5000; ++s) ++at[build_blind_prompt("p", numbered(4), s, 4).answer_label - 1];
  for (int a : at) EXPECT_NEAR(a, 1000, 4 * std::sqrt(5000 * 0.2 * 0.8));
}

TEST(BlindTest, ParseChoice) {
  EXPECT_EQ(parse_choice("The answer is 3.", 50), 3);
  EXPECT_EQ(parse_choice("three", 50), std::nullopt);
  EXPECT_EQ(parse_choice("0", 2), std::nullopt);
  EXPECT_EQ(parse_choice("51", 50), std::nullopt);
  EXPECT_EQ(parse_choice("Caption #2 is best, not 1", 5), 2);
  EXPECT_EQ(parse_choice("v2 or 4", 5), 4);
  EXPECT_EQ(parse_choice("99999999999999999999", 5), std::nullopt);
  EXPECT_THROW(parse_choice("1", 1), Error);
}

TEST(DiversityTest, DistinctNHandOracles) {
  EXPECT_DOUBLE_EQ(distinct_n({"a red cube", "a blue cube"}, 2), 1.0);
  auto c = distinct_n_counts({"a red cube", "a blue cube"}, 2);
  EXPECT_EQ(c.unique, 4u);
  EXPECT_EQ(c.total, 4u);
  EXPECT_DOUBLE_EQ(distinct_n({"a a a"}, 2), 0.5);
  EXPECT_DOUBLE_EQ(distinct_n({"A red cube.", "a RED cube"}, 1), 0.5);
  EXPECT_THROW(distinct_n({"a"}, 2), Error);
  EXPECT_THROW(distinct_n({"a b"}, 0), Error);
}

TEST(DiversityTest, DistinctNProperties) {
  Rng rng(3);
  const std::vector<std::string> words{"a", "red", "cube", "blue", "sphere", "on", "the"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> corpus;
    const auto size = 1 + rng.below(6);
    for (std::uint64_t i = 0; i < size; ++i) {
      std::string s;
      const auto len = 2 + rng.below(6);
      for (std::uint64_t w = 0; w < len; ++w) s += words[rng.below(words.size())] + " ";
      corpus.push_back(s);
    }
    const auto base = distinct_n_counts(corpus, 2);
    auto shuffled = corpus;
    std::reverse(shuffled.begin(), shuffled.end());
    EXPECT_EQ(distinct_n(shuffled, 2), base.ratio());
    auto doubled = corpus;
    doubled.insert(doubled.end(), corpus.begin(), corpus.end());
    const auto d = distinct_n_counts(doubled, 2);
    EXPECT_EQ(d.unique, base.unique);
    EXPECT_EQ(d.total, 2 * base.total);
  }
}

std::vector<std::vector<double>> constant_matrix(std::size_t n, double v) {
  std::vector<std::vector<double>> m(n, std::vector<double>(n, v));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

TEST(DiversityTest, SemanticDiversity) {
  for (std::size_t n : {2u, 3u, 10u, 100u, 300u}) {
    EXPECT_EQ(semantic_diversity(constant_matrix(n, 0.4)), 0.6) << n;
    EXPECT_EQ(semantic_diversity(constant_matrix(n, 1.0)), 0.0);
  }
  EXPECT_DOUBLE_EQ(semantic_diversity(constant_matrix(2, 0.32)), 0.68);
  auto asym = constant_matrix(3, 0.4);
  asym[0][1] = 0.5;
  EXPECT_THROW(semantic_diversity(asym), Error);
  EXPECT_THROW(semantic_diversity({{1.0}}), Error);
}

}  // namespace
}  // namespace autocomp
