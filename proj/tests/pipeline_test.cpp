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

#include "autocomp/report.hpp"
#include "autocomp/scoring.hpp"
#include "mock_run.hpp"

namespace autocomp {
namespace {

using testing::MockRun;
using testing::without_timestamps;

bool terminal(RecordStatus s) {
  return s == RecordStatus::kValidated || s == RecordStatus::kRejected || s == RecordStatus::kDiscarded;
}

TEST(PipelineTest, TwentyConceptsEndToEnd) {
  MockRun run;
  run.write_mock();
  const RunReport report = run.run();
  EXPECT_EQ(report.exit_code, kExitOk) << to_json(report).dump(2);
  const auto records = read_manifest(run.out() / "manifest.jsonl");
  ASSERT_EQ(records.size(), 40u);
  std::set<std::string> ids;
  for (const auto& r : records) {
    ids.insert(r.concept_id());
    EXPECT_EQ(r.status, RecordStatus::kValidated) << r.concept_id() << " " << r.note;
    EXPECT_EQ(r.negatives.size(), 2u);
    EXPECT_TRUE(std::filesystem::exists(run.out() / r.image->path));
  }
  EXPECT_EQ(ids.size(), 20u);
  EXPECT_EQ(report.sets.paired_ids.size(), 20u);
  EXPECT_TRUE(std::filesystem::exists(run.out() / "benchmark" / "manifest.jsonl"));
  EXPECT_TRUE(std::filesystem::exists(run.out() / "run_report.json"));
}

TEST(PipelineTest, RerunIsIdempotent) {
  MockRun run;
  run.write_mock();
  const RunReport first = run.run();
  ASSERT_EQ(first.exit_code, kExitOk);
  EXPECT_GT(first.remote_calls, 0u);
  const std::string manifest = run.manifest();

  const RunReport resumed = run.run();
  EXPECT_EQ(resumed.exit_code, kExitOk);
  EXPECT_EQ(resumed.remote_calls, 0u);
  EXPECT_EQ(run.manifest(), manifest);

  const RunReport fresh = run.run(false);
  EXPECT_EQ(fresh.exit_code, kExitOk);
  EXPECT_EQ(fresh.remote_calls, 0u);
  EXPECT_GT(fresh.cache_hits, 0u);
  EXPECT_EQ(without_timestamps(run.manifest()), without_timestamps(manifest));
}

TEST(PipelineTest, StagewiseRunMatchesSingleRun) {
  MockRun whole;
  whole.config["timestamps"] = false;
  whole.write_mock({100, 150, 150, 150, 0});
  ASSERT_EQ(whole.run().exit_code, kExitOk);

  MockRun staged;
  staged.config["timestamps"] = false;
  staged.write_mock({100, 150, 150, 150, 0});
  for (const char* stage : {"captions", "synth", "validate", "negatives", "curate"}) {
    staged.config["stages"] = json::array({stage});
    ASSERT_EQ(staged.run().exit_code, kExitOk) << stage;
  }
  EXPECT_EQ(staged.manifest(), whole.manifest());
}

TEST(PipelineTest, FaultsLandInTheRightStage) {
  MockRun run;
  run.config["tasks"] = json::array({{{"task", "color"}, {"n", 2}, {"count", 40}, {"seed", 5}}});
  run.write_mock({150, 150, 150, 150, 0});
  const RunReport report = run.run();
  ASSERT_EQ(report.exit_code, kExitOk);
  const auto records = read_manifest(run.out() / "manifest.jsonl");
  std::map<std::string, int> rejected_at;
  std::set<std::string> discarded_ctx, discarded_min;
  for (const auto& r : records) {
    EXPECT_TRUE(terminal(r.status));
    if (r.status == RecordStatus::kRejected) {
      ++rejected_at[std::string(to_string(*r.validation->rejected_stage()))];
      // nothing is recorded after the failing stage
      EXPECT_FALSE(r.validation->outcomes.back().passed);
    }
    if (r.status == RecordStatus::kDiscarded) {
      (r.track == Track::kMinimal ? discarded_min : discarded_ctx).insert(r.concept_id());
    }
  }
  EXPECT_GT(rejected_at["object"], 0);
  EXPECT_GT(rejected_at["background"], 0);
  EXPECT_GT(rejected_at["attribute"], 0);
  EXPECT_FALSE(discarded_ctx.empty());
  EXPECT_EQ(discarded_min, discarded_ctx);

  const auto sets = curate_benchmarks(records);
  std::set<std::string> expected;
  std::set_intersection(sets.minimal_ids.begin(), sets.minimal_ids.end(), sets.contextual_ids.begin(),
                        sets.contextual_ids.end(), std::inserter(expected, expected.end()));
  EXPECT_EQ(sets.paired_ids, expected);
  for (const auto& [key, cell] : report.survival) EXPECT_NO_THROW(cell.check_monotone());
  const auto& m = report.survival.at({TaskKind::kColorBinding, 2, Track::kMinimal});
  EXPECT_LT(m.passed_attribute, m.generated);
}

TEST(PipelineTest, ErroredRecordsAreRetried) {
  MockRun run;
  run.write_mock({0, 0, 0, 0, 300});
  const RunReport partial = run.run();
  EXPECT_EQ(partial.exit_code, kExitPartial);
  EXPECT_GT(partial.status_counts.at("errored"), 0);
  EXPECT_FALSE(partial.errors.empty());

  run.write_mock();
  const RunReport healed = run.run();
  EXPECT_EQ(healed.exit_code, kExitOk);
  EXPECT_EQ(healed.status_counts.count("errored"), 0u);
  EXPECT_GT(healed.remote_calls, 0u);
}

TEST(PipelineTest, ConfigErrorsExitTwo) {
  {
    MockRun run;
    run.write_mock();
    run.config["vocabulary"] = "missing.json";
    const RunReport r = run.run();
    EXPECT_EQ(r.exit_code, kExitConfig);
    EXPECT_FALSE(std::filesystem::exists(run.out()));
  }
  for (auto [key, value] : std::vector<std::pair<std::string, json>>{
           {"relation_gap", 3}, {"retries", 0}, {"workers", 0}, {"bogus", 1},
           {"thresholds", {{"white_fraction", 1.5}}}, {"tasks", json::array()}}) {
    MockRun run;
    run.write_mock();
    run.config[key] = value;
    EXPECT_THROW(run.load(), Error) << key;
  }
  MockRun run;
  run.config["backends"] = {{"mock", "nowhere.json"}};
  EXPECT_EQ(run.run().exit_code, kExitConfig);
}

TEST(PipelineTest, ThresholdOverridesParse) {
  MockRun run;
  run.config["thresholds"] = {{"luma", 200}, {"white_fraction", 0.65}, {"box", 0.5}};
  run.config["relation_gap"] = 2;
  const RunConfig c = run.load();
  EXPECT_EQ(c.validation.background.luma_threshold, 200);
  EXPECT_EQ(c.validation.background.min_fraction_num, 13);
  EXPECT_EQ(c.validation.background.min_fraction_den, 20);
  EXPECT_EQ(c.validation.detect.box_threshold, 0.5);
  EXPECT_EQ(c.relation_gap, 2);
  EXPECT_EQ(c.vocabulary, (run.dir / "vocab.json").lexically_normal());
}

TEST(PipelineTest, UnreachableBackendExitsThree) {
  MockRun run;
  run.config["backends"] = {{"url", "http://127.0.0.1:1"}};
  const RunReport r = run.run();
  EXPECT_EQ(r.exit_code, kExitUnreachable);
  EXPECT_FALSE(std::filesystem::exists(run.out() / "manifest.jsonl"));
}

TEST(PipelineTest, CacheDirFromEnvironment) {
  MockRun run;
  run.write_mock();
  const auto cache = run.dir / "shared-cache";
  ::setenv("AUTOCOMP_CACHE_DIR", cache.c_str(), 1);
  const RunReport r = run.run();
  ::unsetenv("AUTOCOMP_CACHE_DIR");
  EXPECT_EQ(r.exit_code, kExitOk);
  EXPECT_TRUE(std::filesystem::is_directory(cache / "image"));
  EXPECT_FALSE(std::filesystem::exists(run.out() / "cache"));
}

TEST(EvalTest, LiveScoringAndReports) {
  MockRun run;
  run.config["tasks"] = json::array({{{"task", "color"}, {"n", 2}, {"count", 6}, {"seed", 1}},
                                     {{"task", "position"}, {"n", 2}, {"count", 6}, {"seed", 2}}});
  run.write_mock({}, true);
  ASSERT_EQ(run.run().exit_code, kExitOk);
  Pipeline p(run.load());
  const auto records = read_manifest(run.out() / "manifest.jsonl");
  const auto live = score_live(records, p.backend(), 2);
  EXPECT_TRUE(live.failures.empty()) << live.failures.front();
  EXPECT_EQ(live.trials.size(), 12u * 2 * 2);
  const EvalResult result = evaluate(records, live.trials);
  EXPECT_EQ(result.scores.cells.size(), 8u);
  EXPECT_TRUE(result.scores.empty_cells.empty());
  const auto& pos = result.scores.cells.at({TaskKind::kPositionBinding, 2, Track::kMinimal, Scheme::kSwap});
  std::int64_t rel_total = 0;
  for (const auto& [name, t] : pos.per_relation) rel_total += t.total;
  EXPECT_EQ(rel_total, 6);

  ReportInput in{result.scores, result.paired, survival_stats(records), curate_benchmarks(records)};
  const std::string csv = emit_report(in, ReportFormat::kCsv);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "task,n,track,scheme,accuracy,count");
  const std::string table = emit_report(in, ReportFormat::kTable);
  EXPECT_NE(table.find("minimal swap/conf"), std::string::npos);
  EXPECT_NE(table.find("survival"), std::string::npos);
  EXPECT_EQ(emit_report(in, ReportFormat::kTable), table);
  const json j = json::parse(emit_report(in, ReportFormat::kJson));
  EXPECT_EQ(benchmark_scores_from_json(j.at("scores")).cells.size(), 8u);
  for (const auto& d : j.at("paired_deltas")) {
    const std::string s = d.at("delta_swap");
    EXPECT_TRUE(s[0] == '+' || s[0] == '-') << s;
  }

  // The same trials through a score file give the same cells.
  std::string lines;
  for (const auto* r : scorable_records(records)) {
    for (const auto& [scheme, set] : r->negatives) {
      std::vector<std::string> texts{r->caption->text};
      for (const auto& v : set.variants) texts.push_back(v.text);
      const auto scores = embedding_scores(p.backend(), *r->image, texts);
      lines += json{{"trial_id", trial_id(*r, scheme)}, {"scores", scores}}.dump() + "\n";
    }
  }
  write_file_atomic(run.dir / "scores.jsonl", lines);
  const EvalResult from_file = evaluate(records, score_file(records, run.dir / "scores.jsonl"));
  EXPECT_EQ(to_json(from_file.scores), to_json(result.scores));
}

TEST(EvalTest, ScoreFileCandidatesReorder) {
  MockRun run;
  run.config["tasks"] = json::array({{{"task", "color"}, {"n", 2}, {"count", 1}, {"seed", 1}}});
  run.config["tracks"] = json::array({"minimal"});
  run.write_mock();
  ASSERT_EQ(run.run().exit_code, kExitOk);
  const auto records = read_manifest(run.out() / "manifest.jsonl");
  const std::string id = trial_id(records[0], Scheme::kSwap);
  write_file_atomic(run.dir / "s.jsonl",
                    json{{"trial_id", id}, {"candidates", {"swap:0", "positive"}}, {"scores", {0.2, 0.9}}}.dump() +
                        "\n");
  auto trials = score_file(records, run.dir / "s.jsonl");
  ASSERT_EQ(trials.size(), 1u);
  EXPECT_TRUE(trials[0].tagged.outcome.correct);
  write_file_atomic(run.dir / "bad.jsonl", json{{"trial_id", id}, {"scores", {0.2}}}.dump() + "\n");
  EXPECT_THROW(score_file(records, run.dir / "bad.jsonl"), Error);
}

TEST(EvalTest, BlindEvalWithFixedResponder) {
  MockRun run;
  run.config["tasks"] = json::array({{{"task", "color"}, {"n", 3}, {"count", 3}, {"seed", 1}}});
  run.write_mock();
  ASSERT_EQ(run.run().exit_code, kExitOk);
  Pipeline p(run.load());
  const auto records = read_manifest(run.out() / "manifest.jsonl");
  BlindOptions o;
  o.seed = 3;
  const auto res = blind_eval(records, p.backend(), o);
  ASSERT_EQ(res.size(), 2u);
  std::int64_t correct = 0;
  for (const auto& [key, cell] : res) {
    EXPECT_EQ(cell.tally.total, 3);
    EXPECT_EQ(cell.unparsed, 0);
    EXPECT_EQ(cell.chance()->to_fixed(1), "2.0");
    correct += cell.tally.correct;
  }
  // Answering "1" is right exactly when the positive was placed first.
  std::int64_t expected = 0;
  for (const auto* r : scorable_records(records)) {
    std::vector<std::string> negs;
    for (const auto& v : r->negatives.at(Scheme::kConfusion).variants) negs.push_back(v.text);
    const auto prompt =
        build_blind_prompt(r->caption->text, negs, 3 ^ hash64(trial_id(*r, Scheme::kConfusion)), 49);
    if (prompt.answer_label == 1) ++expected;
  }
  EXPECT_EQ(correct, expected);
}

TEST(ReportTest, SurvivalAndDeltaRendering) {
  SurvivalStats stats;
  stats[{TaskKind::kColorBinding, 1, Track::kMinimal}] =
      SurvivalCell{TaskKind::kColorBinding, 1, Track::kMinimal, 1000, 286, 249, 163, 4};
  stats[{TaskKind::kColorBinding, 1, Track::kContextual}] =
      SurvivalCell{TaskKind::kColorBinding, 1, Track::kContextual, 0, 0, std::nullopt, 0, 2};
  const std::string table = survival_table(stats);
  EXPECT_NE(table.find("28.6"), std::string::npos);
  EXPECT_NE(table.find("24.9"), std::string::npos);
  EXPECT_NE(table.find("16.3"), std::string::npos);
  EXPECT_NE(table.find("n/a"), std::string::npos);
  const std::string csv = survival_csv(stats);
  EXPECT_NE(csv.find("color,1,minimal,1000,286,249,163,4,28.6,24.9,16.3"), std::string::npos);
  EXPECT_NE(csv.find("color,1,contextual,0,0,,0,2,n/a,,n/a"), std::string::npos);

  BenchmarkScores s;
  s.cells[{TaskKind::kColorBinding, 2, Track::kMinimal, Scheme::kSwap}].tally = {611, 1000};
  s.cells[{TaskKind::kColorBinding, 2, Track::kContextual, Scheme::kSwap}].tally = {746, 1000};
  s.cells[{TaskKind::kColorBinding, 2, Track::kMinimal, Scheme::kConfusion}].tally = {510, 1000};
  s.cells[{TaskKind::kColorBinding, 2, Track::kContextual, Scheme::kConfusion}].tally = {421, 1000};
  const std::string t = scores_table(s, nullptr);
  EXPECT_NE(t.find("61.1/51.0"), std::string::npos);
  EXPECT_NE(t.find("74.6/42.1"), std::string::npos);
  EXPECT_NE(t.find("+13.5/-8.9"), std::string::npos);
  EXPECT_EQ(scores_csv(s),
            "task,n,track,scheme,accuracy,count\n"
            "color,2,minimal,swap,61.1,1000\n"
            "color,2,minimal,confusion,51.0,1000\n"
            "color,2,contextual,swap,74.6,1000\n"
            "color,2,contextual,confusion,42.1,1000\n");
  EXPECT_THROW(emit_report({}, ReportFormat::kCsv), Error);
}

}  // namespace
}  // namespace autocomp
