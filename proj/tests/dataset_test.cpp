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

#include <gtest/gtest.h>

#include "autocomp/dataset.hpp"
#include "test_support.hpp"

namespace autocomp {
namespace {

using testing::TempDir;

class DatasetTest : public ::testing::Test {
 protected:
  Vocabulary vocab = testing::shapes_vocabulary();
  std::vector<Concept> concepts = sample_concepts(vocab, TaskKind::kColorBinding, 2, 6, 3);

  ManifestRecord captioned(const Concept& c, Track track) {
    ManifestRecord r(c, track);
    r.caption = render_minimal(c);
    if (track == Track::kContextual) r.caption->track = Track::kContextual;
    r.status = RecordStatus::kCaptioned;
    return r;
  }

  // Report that passes stages up to (not including) `fail_at`; nullopt = all pass.
  ManifestRecord validated(const Concept& c, Track track, std::optional<Stage> fail_at = {},
                           bool errored = false) {
    ManifestRecord r = captioned(c, track);
    r.image = backend::ImageRef{"images/" + std::string(to_string(track)) + "/" + c.id() + ".png",
                                "00"};
    ValidationReport v;
    v.image_id = c.id();
    v.concept_id = c.id();
    v.track = track;
    if (errored) {
      v.status = ValidationStatus::kErrored;
      v.error = "down";
      r.status = RecordStatus::kErrored;
    } else {
      std::vector<Stage> stages{Stage::kObjectCheck};
      if (track == Track::kMinimal) stages.push_back(Stage::kBackgroundCheck);
      stages.push_back(Stage::kAttributeCheck);
      v.status = ValidationStatus::kValidated;
      for (Stage s : stages) {
        const bool ok = !(fail_at && *fail_at == s);
        v.outcomes.push_back(StageOutcome{s, ok, json::object(), ok ? "" : "scripted"});
        if (!ok) {
          v.status = ValidationStatus::kRejected;
          break;
        }
      }
      r.status = v.status == ValidationStatus::kValidated ? RecordStatus::kValidated
                                                          : RecordStatus::kRejected;
    }
    r.validation = v;
    return r;
  }
};

TEST_F(DatasetTest, ThreeRecordsRoundTrip) {
  TempDir dir;
  std::vector<ManifestRecord> records{captioned(concepts[0], Track::kMinimal),
                                      validated(concepts[1], Track::kMinimal),
                                      validated(concepts[2], Track::kContextual, Stage::kObjectCheck)};
  records[1].negatives.emplace(Scheme::kSwap,
                               make_negative_set(*records[1].caption, concepts[1], Scheme::kSwap));
  records[1].timestamps["captions"] = "2026-01-01T00:00:00Z";
  write_manifest(dir / "m.jsonl", records);
  const std::string text = read_file(dir / "m.jsonl");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  auto back = read_manifest(dir / "m.jsonl");
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(serialize_manifest(back), text);
  EXPECT_EQ(back[1].negatives.at(Scheme::kSwap).variants.size(), 1u);
  EXPECT_EQ(back[2].validation->rejected_stage(), Stage::kObjectCheck);
  EXPECT_NE(text.find("\"schema\":\"autocomp/1\""), std::string::npos);
}

TEST_F(DatasetTest, MissingConceptOrBadIdRejected) {
  json j = to_json(captioned(concepts[0], Track::kMinimal));
  json no_concept = j;
  no_concept.erase("concept");
  try {
    manifest_record_from_json(no_concept);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvariantViolation);
  }
  json bad_id = j;
  bad_id["concept_id"] = "0000000000000000";
  EXPECT_THROW(manifest_record_from_json(bad_id), Error);
  json tampered = j;
  tampered["concept"]["colors"][0] = "green";
  EXPECT_THROW(manifest_record_from_json(tampered), Error);
  EXPECT_THROW(parse_manifest("{not json}\n"), Error);
}

TEST_F(DatasetTest, LifecycleEnforcedOnWrite) {
  ManifestRecord r(concepts[0]);
  r.image = backend::ImageRef{"x.png", "00"};
  r.status = RecordStatus::kSynthesized;
  try {
    to_json(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvariantViolation);
  }
  ManifestRecord v = validated(concepts[0], Track::kMinimal, Stage::kBackgroundCheck);
  v.negatives.emplace(Scheme::kSwap, NegativeSet{});
  EXPECT_THROW(to_json(v), Error);
}

TEST_F(DatasetTest, CuratePairsByIntersection) {
  std::vector<ManifestRecord> mins, ctxs;
  for (int i : {0, 1, 2}) mins.push_back(validated(concepts[i], Track::kMinimal));
  for (int i : {1, 2, 3}) ctxs.push_back(validated(concepts[i], Track::kContextual));
  auto sets = curate_benchmarks(mins, ctxs);
  EXPECT_EQ(sets.paired_ids, (std::set<std::string>{concepts[1].id(), concepts[2].id()}));
  EXPECT_TRUE(curate_benchmarks(mins, {}).paired_ids.empty());

  mins.push_back(validated(concepts[0], Track::kMinimal));
  mins.push_back(validated(concepts[4], Track::kMinimal, Stage::kAttributeCheck));
  auto dup = curate_benchmarks(mins, ctxs);
  EXPECT_EQ(dup.minimal_ids.size(), 3u);
  ASSERT_EQ(dup.warnings.size(), 1u);
  EXPECT_NE(dup.warnings[0].find(concepts[0].id()), std::string::npos);
}

TEST_F(DatasetTest, PairingPropertiesOnRandomSets) {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ManifestRecord> a, b;
    for (const auto& c : concepts) {
      if (rng.below(2)) a.push_back(validated(c, Track::kMinimal));
      if (rng.below(2)) b.push_back(validated(c, Track::kContextual));
    }
    auto ab = curate_benchmarks(a, b);
    std::vector<ManifestRecord> all = a;
    all.insert(all.begin(), b.begin(), b.end());
    auto mixed = curate_benchmarks(all);
    EXPECT_EQ(ab.paired_ids, mixed.paired_ids);
    EXPECT_LE(ab.paired_ids.size(), std::min(ab.minimal_ids.size(), ab.contextual_ids.size()));
    for (const auto& id : ab.paired_ids) {
      EXPECT_TRUE(ab.minimal_ids.count(id) && ab.contextual_ids.count(id));
    }
    auto again = curate_benchmarks(all);
    EXPECT_EQ(again.paired_ids, mixed.paired_ids);
  }
}

TEST_F(DatasetTest, SurvivalRates) {
  SurvivalCell c;
  c.generated = 100;
  c.passed_object = 40;
  c.passed_background = 35;
  c.passed_attribute = 20;
  EXPECT_EQ(format_rate(c.rate(c.passed_object)), "40.0");
  EXPECT_EQ(format_rate(c.rate(*c.passed_background)), "35.0");
  EXPECT_EQ(format_rate(c.rate(c.passed_attribute)), "20.0");
  EXPECT_NO_THROW(c.check_monotone());

  // Shape of a published row: 28.6 -> 24.9 -> 16.3 percent of 1000.
  SurvivalCell published{TaskKind::kColorBinding, 1, Track::kMinimal, 1000, 286, 249, 163, 0};
  EXPECT_NO_THROW(published.check_monotone());
  EXPECT_EQ(format_rate(published.rate(published.passed_object)), "28.6");
  SurvivalCell broken = published;
  broken.passed_attribute = 250;
  EXPECT_THROW(broken.check_monotone(), Error);

  SurvivalCell none;
  EXPECT_EQ(format_rate(none.rate(0)), "n/a");
}

TEST_F(DatasetTest, SurvivalFromRecords) {
  std::vector<ManifestRecord> records;
  records.push_back(validated(concepts[0], Track::kMinimal));
  records.push_back(validated(concepts[1], Track::kMinimal, Stage::kObjectCheck));
  records.push_back(validated(concepts[2], Track::kMinimal, Stage::kBackgroundCheck));
  records.push_back(validated(concepts[3], Track::kMinimal, Stage::kAttributeCheck));
  records.push_back(validated(concepts[4], Track::kMinimal, std::nullopt, true));
  records.push_back(captioned(concepts[5], Track::kMinimal));
  records.push_back(validated(concepts[0], Track::kContextual, std::nullopt, true));
  auto stats = survival_stats(records);
  const auto& m = stats.at({TaskKind::kColorBinding, 2, Track::kMinimal});
  EXPECT_EQ(m.generated, 4);
  EXPECT_EQ(m.passed_object, 3);
  EXPECT_EQ(*m.passed_background, 2);
  EXPECT_EQ(m.passed_attribute, 1);
  EXPECT_EQ(m.errored, 1);
  const auto& ctx = stats.at({TaskKind::kColorBinding, 2, Track::kContextual});
  EXPECT_EQ(ctx.generated, 0);
  EXPECT_EQ(ctx.errored, 1);
  EXPECT_FALSE(ctx.passed_background.has_value());
  EXPECT_EQ(to_json(ctx)["object_rate"], "n/a");
}

}  // namespace
}  // namespace autocomp
