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

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "autocomp/backend/cache.hpp"
#include "autocomp/backend/fixture_builder.hpp"
#include "autocomp/backend/http.hpp"
#include "autocomp/backend/mock.hpp"
#include "autocomp/contextual.hpp"
#include "autocomp/dataset.hpp"
#include "autocomp/parallel.hpp"

namespace autocomp {

enum class PipelineStage { kCaptions, kSynth, kValidate, kNegatives, kCurate };

inline constexpr std::array<PipelineStage, 5> kPipelineStages = {
    PipelineStage::kCaptions, PipelineStage::kSynth, PipelineStage::kValidate,
    PipelineStage::kNegatives, PipelineStage::kCurate};

inline std::string_view to_string(PipelineStage s) {
  switch (s) {
    case PipelineStage::kCaptions: return "captions";
    case PipelineStage::kSynth: return "synth";
    case PipelineStage::kValidate: return "validate";
    case PipelineStage::kNegatives: return "negatives";
    case PipelineStage::kCurate: return "curate";
  }
  return "captions";
}

inline PipelineStage pipeline_stage_from_string(std::string_view s) {
  for (PipelineStage p : kPipelineStages) {
    if (to_string(p) == s) return p;
  }
  throw Error(ErrorCode::kConfigError, "unknown stage '" + std::string(s) + "'");
}

// Exit statuses of a pipeline run.
inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitUnreachable = 3;

struct TaskSpec {
  TaskKind task = TaskKind::kColorBinding;
  int n = 2;
  std::size_t count = 1;
  std::optional<std::uint64_t> seed;
};

// Either a mock script or an HTTP server.
struct Endpoint {
  std::optional<std::filesystem::path> mock;
  std::optional<std::string> url;
  int timeout_seconds = 600;
};

struct RunConfig {
  std::filesystem::path vocabulary;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  std::vector<TaskSpec> tasks;
  std::vector<Track> tracks{Track::kMinimal, Track::kContextual};
  std::set<PipelineStage> stages{kPipelineStages.begin(), kPipelineStages.end()};
  Endpoint default_backend;
  std::map<backend::Capability, Endpoint> routes;
  int retries = 3;
  int relation_gap = 0;
  ValidationOptions validation;
  backend::TextGenParams sampling;
  backend::ImageGenParams image;
  int workers = 4;
  int inflight_per_capability = 4;
  bool include_binding_equivalents = true;
  bool timestamps = true;
  bool resume = true;

  std::filesystem::path manifest_path() const { return output_dir / "manifest.jsonl"; }
  std::uint64_t task_seed(std::size_t i) const { return tasks.at(i).seed.value_or(seed + i); }
};

namespace detail {

[[noreturn]] inline void config_error(const std::string& what) {
  throw Error(ErrorCode::kConfigError, what);
}

inline void allow_keys(const json& j, std::initializer_list<std::string_view> keys,
                       const std::string& where) {
  if (!j.is_object()) config_error(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      config_error("unknown key '" + k + "' in " + where);
    }
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(where + "." + key + " has the wrong type");
  }
}

inline std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return std::filesystem::absolute(path.is_relative() ? base / path : path).lexically_normal();
}

inline Endpoint endpoint_from_json(const json& j, const std::filesystem::path& base,
                                   const std::string& where) {
  allow_keys(j, {"mock", "url", "timeout_seconds"}, where);
  Endpoint e;
  if (j.contains("mock")) e.mock = resolve_path(base, get_or<std::string>(j, "mock", "", where));
  if (j.contains("url")) e.url = get_or<std::string>(j, "url", "", where);
  e.timeout_seconds = get_or(j, "timeout_seconds", 600, where);
  if (e.mock.has_value() == e.url.has_value()) config_error(where + " needs exactly one of mock, url");
  if (e.timeout_seconds < 1) config_error(where + ".timeout_seconds must be >= 1");
  return e;
}

inline void check_range(double v, double lo, double hi, const std::string& what) {
  if (!(v >= lo && v <= hi)) {
    config_error(what + " must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

}  // namespace detail

// Paths in the document are relative to `base` (the config file's directory).
inline RunConfig parse_run_config(const json& doc, const std::filesystem::path& base) {
  using namespace detail;
  allow_keys(doc, {"vocabulary", "output_dir", "seed", "tasks", "tracks", "stages", "backends",
                   "retries", "relation_gap", "thresholds", "sampling", "image", "workers",
                   "inflight_per_capability", "include_binding_equivalents", "timestamps"},
             "config");
  RunConfig c;
  if (!doc.contains("vocabulary")) config_error("config.vocabulary is required");
  c.vocabulary = resolve_path(base, get_or<std::string>(doc, "vocabulary", "", "config"));
  c.output_dir = resolve_path(base, get_or<std::string>(doc, "output_dir", "out", "config"));
  c.seed = get_or<std::uint64_t>(doc, "seed", 0, "config");

  if (!doc.contains("tasks") || !doc.at("tasks").is_array() || doc.at("tasks").empty()) {
    config_error("config.tasks must be a non-empty array");
  }
  for (const auto& t : doc.at("tasks")) {
    allow_keys(t, {"task", "n", "count", "seed"}, "tasks[]");
    TaskSpec spec;
    try {
      spec.task = task_from_string(get_or<std::string>(t, "task", "", "tasks[]"));
    } catch (const Error& e) {
      config_error(e.what());
    }
    spec.n = get_or(t, "n", 2, "tasks[]");
    const auto count = get_or<std::int64_t>(t, "count", 0, "tasks[]");
    if (spec.n < 1 || spec.n > 8) config_error("tasks[].n must be in [1, 8]");
    if (count < 1) config_error("tasks[].count must be >= 1");
    spec.count = static_cast<std::size_t>(count);
    if (t.contains("seed")) spec.seed = get_or<std::uint64_t>(t, "seed", 0, "tasks[]");
    c.tasks.push_back(spec);
  }
  if (doc.contains("tracks")) {
    c.tracks.clear();
    for (const auto& t : doc.at("tracks")) {
      try {
        c.tracks.push_back(track_from_string(t.get<std::string>()));
      } catch (const std::exception& e) {
        config_error(std::string("config.tracks: ") + e.what());
      }
    }
    std::sort(c.tracks.begin(), c.tracks.end());
    c.tracks.erase(std::unique(c.tracks.begin(), c.tracks.end()), c.tracks.end());
    if (c.tracks.empty()) config_error("config.tracks must not be empty");
  }
  if (doc.contains("stages")) {
    c.stages.clear();
    for (const auto& s : doc.at("stages")) c.stages.insert(pipeline_stage_from_string(s.get<std::string>()));
  }

  if (!doc.contains("backends")) config_error("config.backends is required");
  const json& b = doc.at("backends");
  if (b.contains("mock") || b.contains("url")) {
    c.default_backend = endpoint_from_json(b, base, "backends");
  } else {
    allow_keys(b, {"default", "text", "image", "detect", "vqa", "embed"}, "backends");
    if (b.contains("default")) c.default_backend = endpoint_from_json(b.at("default"), base, "backends.default");
    for (backend::Capability cap : backend::kCapabilities) {
      const std::string name(to_string(cap));
      if (b.contains(name)) c.routes[cap] = endpoint_from_json(b.at(name), base, "backends." + name);
    }
  }

  c.retries = get_or(doc, "retries", 3, "config");
  if (c.retries < 1 || c.retries > 20) config_error("config.retries must be in [1, 20]");
  c.relation_gap = get_or(doc, "relation_gap", 0, "config");
  if (c.relation_gap < 0 || c.relation_gap > 2) config_error("config.relation_gap must be in [0, 2]");

  if (doc.contains("thresholds")) {
    const json& t = doc.at("thresholds");
    allow_keys(t, {"luma", "white_fraction", "box", "text"}, "thresholds");
    auto& bg = c.validation.background;
    bg.luma_threshold = get_or(t, "luma", bg.luma_threshold, "thresholds");
    check_range(bg.luma_threshold, 0, 255, "thresholds.luma");
    if (t.contains("white_fraction")) {
      if (!t.at("white_fraction").is_number()) config_error("thresholds.white_fraction must be a number");
      const Rational f = Rational::from_decimal(t.at("white_fraction").dump());
      check_range(f.to_double(), 0, 1, "thresholds.white_fraction");
      bg.min_fraction_num = f.num();
      bg.min_fraction_den = f.den();
    }
    auto& d = c.validation.detect;
    d.box_threshold = get_or(t, "box", d.box_threshold, "thresholds");
    d.text_threshold = get_or(t, "text", d.text_threshold, "thresholds");
    check_range(d.box_threshold, 0, 1, "thresholds.box");
    check_range(d.text_threshold, 0, 1, "thresholds.text");
  }
  if (doc.contains("sampling")) {
    const json& s = doc.at("sampling");
    allow_keys(s, {"temperature", "top_p", "max_tokens"}, "sampling");
    c.sampling.temperature = get_or(s, "temperature", c.sampling.temperature, "sampling");
    c.sampling.top_p = get_or(s, "top_p", c.sampling.top_p, "sampling");
    c.sampling.max_tokens = get_or(s, "max_tokens", c.sampling.max_tokens, "sampling");
    check_range(c.sampling.temperature, 0, 2, "sampling.temperature");
    check_range(c.sampling.top_p, 0, 1, "sampling.top_p");
    if (c.sampling.max_tokens < 1) config_error("sampling.max_tokens must be >= 1");
  }
  if (doc.contains("image")) {
    const json& s = doc.at("image");
    allow_keys(s, {"width", "height", "steps", "guidance"}, "image");
    c.image.width = get_or(s, "width", c.image.width, "image");
    c.image.height = get_or(s, "height", c.image.height, "image");
    c.image.steps = get_or(s, "steps", c.image.steps, "image");
    c.image.guidance = get_or(s, "guidance", c.image.guidance, "image");
    if (c.image.width < 1 || c.image.height < 1 || c.image.steps < 1) {
      config_error("image sizes and steps must be >= 1");
    }
  }
  c.workers = get_or(doc, "workers", 4, "config");
  c.inflight_per_capability = get_or(doc, "inflight_per_capability", 4, "config");
  if (c.workers < 1 || c.workers > 256) config_error("config.workers must be in [1, 256]");
  if (c.inflight_per_capability < 1) config_error("config.inflight_per_capability must be >= 1");
  c.include_binding_equivalents = get_or(doc, "include_binding_equivalents", true, "config");
  c.timestamps = get_or(doc, "timestamps", true, "config");
  return c;
}

// Every referenced path must exist; called once overrides are applied.
inline void check_paths(const RunConfig& c) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(c.vocabulary, ec)) {
    detail::config_error("vocabulary file not found: " + c.vocabulary.string());
  }
  auto check = [&](const Endpoint& e, const std::string& what) {
    if (e.mock && !std::filesystem::is_regular_file(*e.mock, ec)) {
      detail::config_error(what + " mock script not found: " + e.mock->string());
    }
  };
  check(c.default_backend, "default");
  for (const auto& [cap, e] : c.routes) check(e, std::string(to_string(cap)));
  bool all_routed = true;
  for (backend::Capability cap : backend::kCapabilities) all_routed = all_routed && c.routes.count(cap);
  if (!all_routed && !c.default_backend.mock && !c.default_backend.url) {
    detail::config_error("no backend configured");
  }
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    detail::config_error("config file not found: " + path.string());
  }
  json doc = json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded()) detail::config_error("config is not valid JSON: " + path.string());
  return parse_run_config(doc, std::filesystem::absolute(path).parent_path());
}

// Concepts a config asks for, in config order.
inline std::vector<Concept> config_concepts(const RunConfig& c, const Vocabulary& vocab) {
  std::vector<Concept> out;
  for (std::size_t i = 0; i < c.tasks.size(); ++i) {
    const auto& t = c.tasks[i];
    try {
      auto batch = sample_concepts(vocab, t.task, t.n, t.count, c.task_seed(i));
      out.insert(out.end(), batch.begin(), batch.end());
    } catch (const Error& e) {
      detail::config_error(std::string(to_string(t.task)) + " n=" + std::to_string(t.n) + ": " + e.what());
    }
  }
  return out;
}

// Keyed script answering every request a run of `c` makes.
inline backend::MockScript mock_script_for_config(const RunConfig& c, const Vocabulary& vocab,
                                                  const backend::FixtureFaults& faults = {},
                                                  bool embed = true) {
  backend::FixtureOptions o;
  o.tracks = c.tracks;
  o.retries = c.retries;
  o.match.relation_gap = c.relation_gap;
  o.include_binding_equivalents = c.include_binding_equivalents;
  o.embed = embed;
  o.faults = faults;
  return backend::build_mock_script(config_concepts(c, vocab), vocab, o);
}

// Backend set ---------------------------------------------------------------------

// Owns the configured backends and the cache wrapped around them.
class BackendStack {
 public:
  BackendStack(const RunConfig& c, const std::filesystem::path& cache_dir)
      : cache_(cache_dir) {
    auto make = [&](const Endpoint& e) -> backend::Backend* {
      const std::string key = e.mock ? "mock:" + e.mock->string() : "url:" + *e.url;
      if (auto it = by_key_.find(key); it != by_key_.end()) return it->second;
      std::unique_ptr<backend::Backend> b;
      if (e.mock) {
        b = std::make_unique<backend::MockBackend>(backend::load_mock_script_file(*e.mock),
                                                   c.output_dir / "tmp" / "mock-images");
      } else {
        backend::HttpOptions o;
        o.base_url = *e.url;
        o.timeout_seconds = e.timeout_seconds;
        o.inflight_per_capability = c.inflight_per_capability;
        o.base_dir = c.output_dir;
        auto http = std::make_unique<backend::HttpBackend>(o);
        http_.push_back(http.get());
        b = std::move(http);
      }
      backend::Backend* raw = b.get();
      owned_.push_back(std::move(b));
      by_key_[key] = raw;
      return raw;
    };
    for (backend::Capability cap : backend::kCapabilities) {
      auto it = c.routes.find(cap);
      const Endpoint& e = it != c.routes.end() ? it->second : c.default_backend;
      if (e.mock || e.url) routing_.route(cap, make(e));
    }
    cached_ = std::make_unique<backend::CachedBackend>(routing_, cache_);
  }

  backend::Backend& backend() { return *cached_; }
  std::size_t remote_calls() const { return cached_->remote_calls(); }
  std::size_t cache_hits() const { return cached_->hits(); }

  // Throws BackendUnavailable when an HTTP endpoint does not answer /healthz.
  void check_health() const {
    for (auto* h : http_) h->health();
  }

 private:
  backend::DiskCache cache_;
  std::vector<std::unique_ptr<backend::Backend>> owned_;
  std::map<std::string, backend::Backend*> by_key_;
  std::vector<backend::HttpBackend*> http_;
  backend::RoutingBackend routing_;
  std::unique_ptr<backend::CachedBackend> cached_;
};

inline std::filesystem::path cache_dir_for(const RunConfig& c) {
  if (const char* env = std::getenv("AUTOCOMP_CACHE_DIR"); env && *env) return env;
  return c.output_dir / "cache";
}

// Pipeline ------------------------------------------------------------------------

struct RunReport {
  int exit_code = kExitOk;
  std::vector<PipelineStage> stages_run;
  std::map<std::string, std::int64_t> status_counts;
  std::size_t remote_calls = 0;
  std::size_t cache_hits = 0;
  SurvivalStats survival;
  BenchmarkSets sets;
  std::vector<std::string> errors;
};

inline json to_json(const RunReport& r) {
  json stages = json::array();
  for (auto s : r.stages_run) stages.push_back(to_string(s));
  return json{{"exit_code", r.exit_code},
              {"stages", stages},
              {"records", r.status_counts},
              {"remote_calls", r.remote_calls},
              {"cache_hits", r.cache_hits},
              {"survival", to_json(r.survival)},
              {"sets",
               {{"minimal", r.sets.minimal_ids.size()},
                {"contextual", r.sets.contextual_ids.size()},
                {"paired", r.sets.paired_ids.size()}}},
              {"warnings", r.sets.warnings},
              {"errors", r.errors}};
}

namespace detail {

inline std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Failures that mark a record Errored (and retryable) instead of aborting.
inline bool recoverable(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kBackendUnavailable:
    case ErrorCode::kProtocolViolation:
    case ErrorCode::kMockMiss:
    case ErrorCode::kIoFailure:
      return true;
    default:
      return false;
  }
}

inline std::string error_note(const Error& e) {
  return e.what();
}

}  // namespace detail

class Pipeline {
 public:
  explicit Pipeline(RunConfig config)
      : config_(std::move(config)),
        vocab_(load_vocab(config_)),
        backends_(config_, cache_dir_for(config_)) {
    match_.relation_gap = config_.relation_gap;
  }

  const RunConfig& config() const { return config_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  backend::Backend& backend() { return backends_.backend(); }
  std::vector<ManifestRecord>& records() { return records_; }

  RunReport run() {
    RunReport report;
    try {
      backends_.check_health();
    } catch (const Error& e) {
      report.exit_code = kExitUnreachable;
      report.errors.push_back(detail::error_note(e));
      return report;
    }
    if (!config_.resume) clear_outputs();
    load_records();
    for (PipelineStage stage : kPipelineStages) {
      if (!config_.stages.count(stage)) continue;
      switch (stage) {
        case PipelineStage::kCaptions: captions(); break;
        case PipelineStage::kSynth: synth(); break;
        case PipelineStage::kValidate: validate(); break;
        case PipelineStage::kNegatives: negatives(); break;
        case PipelineStage::kCurate: curate(); break;
      }
      write_manifest(config_.manifest_path(), records_);
      report.stages_run.push_back(stage);
    }
    for (const auto& r : records_) {
      ++report.status_counts[std::string(to_string(r.status))];
      if (r.status == RecordStatus::kErrored) {
        report.errors.push_back(r.concept_id() + "/" + std::string(to_string(r.track)) + ": " + r.note);
      }
    }
    report.remote_calls = backends_.remote_calls();
    report.cache_hits = backends_.cache_hits();
    report.survival = survival_stats(records_);
    report.sets = curate_benchmarks(records_);
    report.exit_code = report.status_counts.count("errored") ? kExitPartial : kExitOk;
    write_file_atomic(config_.output_dir / "run_report.json", to_json(report).dump(2) + "\n");
    return report;
  }

 private:
  static Vocabulary load_vocab(const RunConfig& c) {
    check_paths(c);
    try {
      return load_vocabulary_file(c.vocabulary);
    } catch (const Error& e) {
      detail::config_error(std::string("vocabulary: ") + e.what());
    }
  }

  void clear_outputs() {
    std::error_code ec;
    for (const char* name : {"manifest.jsonl", "images", "benchmark", "tmp", "run_report.json"}) {
      std::filesystem::remove_all(config_.output_dir / name, ec);
    }
  }

  void stamp(ManifestRecord& r, PipelineStage s) const {
    if (config_.timestamps) r.timestamps[std::string(to_string(s))] = detail::utc_now();
  }

  bool has_track(Track t) const {
    return std::find(config_.tracks.begin(), config_.tracks.end(), t) != config_.tracks.end();
  }

  // Existing records keep their order; concepts new to the manifest follow in
  // config order, minimal before contextual.
  void load_records() {
    std::error_code ec;
    records_.clear();
    if (std::filesystem::exists(config_.manifest_path(), ec)) records_ = read_manifest(config_.manifest_path());
    std::set<std::pair<std::string, Track>> present;
    for (const auto& r : records_) present.insert({r.concept_id(), r.track});
    for (const auto& c : config_concepts(config_, vocab_)) {
      for (Track t : config_.tracks) {
        if (present.insert({c.id(), t}).second) records_.emplace_back(c, t);
      }
    }
  }

  template <typename Pred, typename Work>
  void for_each_record(Pred pred, Work work) {
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < records_.size(); ++i) {
      if (has_track(records_[i].track) && pred(records_[i])) todo.push_back(i);
    }
    parallel_for(todo.size(), config_.workers, [&](std::size_t k) {
      ManifestRecord& r = records_[todo[k]];
      try {
        work(r);
      } catch (const Error& e) {
        if (!detail::recoverable(e)) throw;
        r.status = RecordStatus::kErrored;
        r.note = detail::error_note(e);
      }
    });
  }

  void captions() {
    ContextualOptions opts;
    opts.retries = config_.retries;
    opts.match = match_;
    opts.sampling = config_.sampling;
    opts.seed = config_.seed;
    for_each_record(
        [](const ManifestRecord& r) {
          return r.status == RecordStatus::kPending || (r.status == RecordStatus::kErrored && !r.caption);
        },
        [&](ManifestRecord& r) {
          if (r.track == Track::kMinimal) {
            r.caption = render_minimal(r.cpt, match_);
            r.status = RecordStatus::kCaptioned;
          } else {
            auto outcome = generate_contextual(r.cpt, backends_.backend(), opts);
            if (auto* rec = std::get_if<CaptionRecord>(&outcome)) {
              r.caption = std::move(*rec);
              r.status = RecordStatus::kCaptioned;
            } else {
              const auto& d = std::get<Discarded>(outcome);
              r.status = RecordStatus::kDiscarded;
              r.note = "discarded after " + std::to_string(d.attempts) + " attempts: " + d.reason;
            }
          }
          r.note = r.status == RecordStatus::kDiscarded ? r.note : "";
          stamp(r, PipelineStage::kCaptions);
        });
    // A concept whose contextual rewrite was discarded leaves both tracks.
    std::set<std::string> dropped;
    for (const auto& r : records_) {
      if (r.track == Track::kContextual && r.status == RecordStatus::kDiscarded) dropped.insert(r.concept_id());
    }
    for (auto& r : records_) {
      if (r.track == Track::kMinimal && dropped.count(r.concept_id()) &&
          r.status == RecordStatus::kCaptioned) {
        r.status = RecordStatus::kDiscarded;
        r.note = "contextual twin discarded";
      }
    }
  }

  void synth() {
    for_each_record(
        [](const ManifestRecord& r) {
          return r.status == RecordStatus::kCaptioned ||
                 (r.status == RecordStatus::kErrored && r.caption && !r.image);
        },
        [&](ManifestRecord& r) {
          const std::string track(to_string(r.track));
          const auto req = backend::image_request(r.caption->text, r.concept_id(), track,
                                                  config_.seed ^ hash64(r.concept_id() + track),
                                                  config_.image);
          const auto res = backends_.backend().call(req);
          backend::validate_result(req.capability, res.result);
          const auto produced = backend::image_ref_from_json(res.result.at("image"));
          std::filesystem::path src(produced.path);
          if (src.is_relative()) src = config_.output_dir / src;
          const std::string bytes = read_file(src);
          if (sha256_hex(bytes) != produced.sha256) {
            throw Error(ErrorCode::kProtocolViolation, "image bytes do not match " + produced.sha256);
          }
          const std::string rel = "images/" + track + "/" + r.concept_id() + ".png";
          write_file_atomic(config_.output_dir / rel, bytes);
          r.image = backend::ImageRef{rel, produced.sha256};
          r.status = RecordStatus::kSynthesized;
          r.note.clear();
          stamp(r, PipelineStage::kSynth);
        });
  }

  void validate() {
    for_each_record(
        [](const ManifestRecord& r) {
          return r.status == RecordStatus::kSynthesized ||
                 (r.status == RecordStatus::kErrored && r.image);
        },
        [&](ManifestRecord& r) {
          // An earlier Errored report is replaced by the retry.
          r.validation.reset();
          ValidationReport v = validate_sample(r.concept_id(), *r.image, config_.output_dir, r.cpt,
                                               r.track, vocab_, backends_.backend(), config_.validation);
          switch (v.status) {
            case ValidationStatus::kValidated: r.status = RecordStatus::kValidated; break;
            case ValidationStatus::kRejected: r.status = RecordStatus::kRejected; break;
            case ValidationStatus::kErrored:
              r.status = RecordStatus::kErrored;
              r.note = v.error;
              break;
          }
          if (v.status != ValidationStatus::kErrored) r.note.clear();
          r.validation = std::move(v);
          stamp(r, PipelineStage::kValidate);
        });
  }

  void negatives() {
    for_each_record(
        [](const ManifestRecord& r) {
          return r.status == RecordStatus::kValidated && r.negatives.empty() && r.cpt.n() >= 2;
        },
        [&](ManifestRecord& r) {
          for (Scheme s : {Scheme::kSwap, Scheme::kConfusion}) {
            r.negatives.emplace(s, make_negative_set(*r.caption, r.cpt, s,
                                                     config_.include_binding_equivalents));
          }
          stamp(r, PipelineStage::kNegatives);
        });
  }

  void curate() {
    const BenchmarkSets sets = curate_benchmarks(records_);
    write_file_atomic(config_.output_dir / "sets.json", to_json(sets).dump(2) + "\n");
    export_benchmark(config_.output_dir, records_, config_.output_dir / "benchmark");
  }

  RunConfig config_;
  Vocabulary vocab_;
  BackendStack backends_;
  MatchOptions match_;
  std::vector<ManifestRecord> records_;
};

// Config errors become exit 2 before any work is done.
inline RunReport run_pipeline(const RunConfig& config) {
  try {
    Pipeline p(config);
    return p.run();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kConfigError && e.code() != ErrorCode::kMalformedScript) throw;
    RunReport r;
    r.exit_code = kExitConfig;
    r.errors.push_back(detail::error_note(e));
    return r;
  }
}

}  // namespace autocomp
