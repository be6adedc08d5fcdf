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

#include <iostream>

#include <CLI11.hpp>

#include "autocomp.hpp"

namespace {

using namespace autocomp;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string mock;
  std::string out;
  bool fresh = false;
  std::vector<std::string> stages;
  std::string format = "table";
};

void add_common(CLI::App* cmd, Common& c, bool stage_flag = false) {
  cmd->add_option("--config", c.config, "run configuration (JSON)")->required();
  cmd->add_option("--seed", c.seed, "override the top-level seed");
  cmd->add_option("--workers", c.workers, "worker threads")->check(CLI::Range(1, 256));
  cmd->add_option("--mock", c.mock, "answer every capability from this mock script");
  cmd->add_option("--out", c.out, "output directory");
  auto* fresh = cmd->add_flag("--fresh", c.fresh, "discard the manifest and images before running");
  cmd->add_flag("--resume", "continue from the manifest (default)")->excludes(fresh);
  if (stage_flag) {
    cmd->add_option("--stage", c.stages, "stages to run (captions, synth, validate, negatives, curate)")
        ->delimiter(',');
  }
}

RunConfig load(const Common& c) {
  RunConfig cfg = load_run_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.workers) cfg.workers = *c.workers;
  if (!c.mock.empty()) {
    cfg.default_backend = Endpoint{std::filesystem::absolute(c.mock).lexically_normal(), std::nullopt, 600};
    cfg.routes.clear();
  }
  if (!c.out.empty()) cfg.output_dir = std::filesystem::absolute(c.out).lexically_normal();
  if (!c.stages.empty()) {
    cfg.stages.clear();
    for (const auto& s : c.stages) cfg.stages.insert(pipeline_stage_from_string(s));
  }
  cfg.resume = !c.fresh;
  return cfg;
}

std::vector<ManifestRecord> manifest_of(const RunConfig& cfg) {
  std::error_code ec;
  if (!std::filesystem::exists(cfg.manifest_path(), ec)) {
    throw Error(ErrorCode::kConfigError, "no manifest at " + cfg.manifest_path().string() + "; run the pipeline first");
  }
  return read_manifest(cfg.manifest_path());
}

int print_run(const RunReport& r) {
  std::cout << "exit " << r.exit_code << "\n";
  for (const auto& [status, n] : r.status_counts) std::cout << status << " " << n << "\n";
  std::cout << "backend calls " << r.remote_calls << ", cache hits " << r.cache_hits << "\n";
  if (!r.survival.empty()) std::cout << "\nsurvival (%)\n" << survival_table(r.survival);
  std::cout << "\npaired " << r.sets.paired_ids.size() << " (minimal " << r.sets.minimal_ids.size()
            << ", contextual " << r.sets.contextual_ids.size() << ")\n";
  for (const auto& w : r.sets.warnings) std::cerr << "warning: " << w << "\n";
  for (std::size_t i = 0; i < r.errors.size() && i < 20; ++i) std::cerr << "error: " << r.errors[i] << "\n";
  return r.exit_code;
}

int run_stages(const Common& c, std::optional<PipelineStage> only) {
  RunConfig cfg = load(c);
  if (only) cfg.stages = {*only};
  return print_run(run_pipeline(cfg));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concept-driven compositional benchmark generation and scoring"};
  app.require_subcommand(1);
  Common c;

  auto* run = app.add_subcommand("run", "run the selected pipeline stages in order");
  add_common(run, c, true);

  const std::vector<std::pair<std::string, PipelineStage>> stage_cmds{
      {"gen-captions", PipelineStage::kCaptions}, {"synth", PipelineStage::kSynth},
      {"validate", PipelineStage::kValidate},     {"negatives", PipelineStage::kNegatives},
      {"curate", PipelineStage::kCurate}};
  std::map<CLI::App*, PipelineStage> stage_of;
  for (const auto& [name, stage] : stage_cmds) {
    auto* cmd = app.add_subcommand(name, "run the " + std::string(to_string(stage)) + " stage");
    add_common(cmd, c);
    stage_of[cmd] = stage;
  }

  std::string scores_path;
  auto* eval = app.add_subcommand("eval", "score trials from a score file or live embeddings");
  add_common(eval, c);
  eval->add_option("--scores", scores_path, "JSONL score file; omit to score through the embed backend");
  eval->add_option("--format", c.format)->check(CLI::IsMember({"table", "csv", "json"}));

  std::string scheme = "confusion";
  std::size_t subsample = 49;
  auto* blind = app.add_subcommand("blind-eval", "caption-only multiple choice through the text backend");
  add_common(blind, c);
  blind->add_option("--scheme", scheme)->check(CLI::IsMember({"swap", "confusion"}));
  blind->add_option("--subsample", subsample, "negatives per prompt")->check(CLI::Range(1, 10000));
  blind->add_option("--format", c.format)->check(CLI::IsMember({"table", "json"}));

  auto* stats = app.add_subcommand("stats", "survival statistics of the manifest");
  add_common(stats, c);
  stats->add_option("--format", c.format)->check(CLI::IsMember({"table", "csv", "json"}));

  auto* report = app.add_subcommand("report", "render scores and survival statistics");
  add_common(report, c);
  report->add_option("--format", c.format)->check(CLI::IsMember({"table", "csv", "json"}));

  std::string script_out;
  std::vector<int> faults;
  bool no_embed = false;
  auto* make_mock = app.add_subcommand("make-mock", "write a keyed mock script for the configured concepts");
  add_common(make_mock, c);
  make_mock->add_option("-o,--output", script_out, "script path (default <out>/mock.json)");
  make_mock->add_option("--faults", faults,
                        "per-mille fault rates: discard,object,background,attribute,unavailable")
      ->delimiter(',')
      ->expected(5);
  make_mock->add_flag("--no-embed", no_embed, "leave out embedding fixtures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // usage errors count as configuration errors
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    CLI::App* cmd = app.get_subcommands().front();
    if (cmd == run) return run_stages(c, std::nullopt);
    if (auto it = stage_of.find(cmd); it != stage_of.end()) return run_stages(c, it->second);

    RunConfig cfg = load(c);
    const ReportFormat format = report_format_from_string(c.format);

    if (cmd == make_mock) {
      std::error_code ec;
      if (!std::filesystem::is_regular_file(cfg.vocabulary, ec)) {
        throw Error(ErrorCode::kConfigError, "vocabulary file not found: " + cfg.vocabulary.string());
      }
      const Vocabulary vocab = load_vocabulary_file(cfg.vocabulary);
      backend::FixtureFaults f;
      if (!faults.empty()) f = {faults[0], faults[1], faults[2], faults[3], faults[4]};
      const auto path = script_out.empty() ? cfg.output_dir / "mock.json" : std::filesystem::path(script_out);
      const auto script = mock_script_for_config(cfg, vocab, f, !no_embed);
      write_file_atomic(path, to_json(script).dump(1) + "\n");
      std::cout << "wrote " << script.fixtures.size() << " fixtures to " << path.string() << "\n";
      return kExitOk;
    }

    if (cmd == stats) {
      ReportInput in;
      const auto records = manifest_of(cfg);
      in.survival = survival_stats(records);
      in.sets = curate_benchmarks(records);
      std::cout << emit_report(in, format);
      return kExitOk;
    }

    if (cmd == report) {
      ReportInput in;
      const auto records = manifest_of(cfg);
      in.survival = survival_stats(records);
      in.sets = curate_benchmarks(records);
      const auto scores = cfg.output_dir / "scores.json";
      std::error_code ec;
      if (std::filesystem::exists(scores, ec)) {
        const json j = json::parse(read_file(scores));
        in.scores = benchmark_scores_from_json(j.at("scores"));
        in.paired_scores = benchmark_scores_from_json(j.at("paired"));
      }
      std::cout << emit_report(in, format);
      return kExitOk;
    }

    if (cmd == eval) {
      const auto records = manifest_of(cfg);
      std::vector<ScoredTrial> trials;
      std::vector<std::string> failures;
      if (!scores_path.empty()) {
        trials = score_file(records, scores_path);
      } else {
        Pipeline p(cfg);
        auto live = score_live(records, p.backend(), cfg.workers);
        trials = std::move(live.trials);
        failures = std::move(live.failures);
      }
      const EvalResult result = evaluate(records, trials);
      ReportInput in{result.scores, result.paired, std::nullopt, std::nullopt};
      write_file_atomic(cfg.output_dir / "scores.json",
                        json{{"scores", to_json(result.scores)},
                             {"paired", to_json(result.paired)},
                             {"paired_deltas", deltas_json(result.paired)},
                             {"trials", result.trials}}
                                .dump(2) +
                            "\n");
      write_file_atomic(cfg.output_dir / "scores.csv", scores_csv(result.scores));
      std::cout << emit_report(in, format);
      for (const auto& f : failures) std::cerr << "error: " << f << "\n";
      return failures.empty() ? kExitOk : kExitPartial;
    }

    if (cmd == blind) {
      const auto records = manifest_of(cfg);
      Pipeline p(cfg);
      BlindOptions o;
      o.scheme = scheme_from_string(scheme);
      o.subsample = subsample;
      o.seed = cfg.seed;
      o.workers = cfg.workers;
      o.sampling = cfg.sampling;
      const auto results = blind_eval(records, p.backend(), o);
      write_file_atomic(cfg.output_dir / "blind.json", to_json(results).dump(2) + "\n");
      std::cout << (format == ReportFormat::kJson ? to_json(results).dump(2) + "\n" : blind_table(results));
      bool failed = false;
      for (const auto& [key, cell] : results) failed = failed || cell.failed > 0;
      return failed ? kExitPartial : kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.code() == ErrorCode::kConfigError || e.code() == ErrorCode::kMalformedScript) return kExitConfig;
    if (e.code() == ErrorCode::kBackendUnavailable) return kExitUnreachable;
    return kExitPartial;
  }
  return kExitOk;
}
