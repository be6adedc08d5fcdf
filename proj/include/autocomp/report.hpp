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

#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "autocomp/dataset.hpp"
#include "autocomp/evaluator.hpp"

namespace autocomp {

enum class ReportFormat { kTable, kCsv, kJson };

inline ReportFormat report_format_from_string(std::string_view s) {
  if (s == "table") return ReportFormat::kTable;
  if (s == "csv") return ReportFormat::kCsv;
  if (s == "json") return ReportFormat::kJson;
  throw Error(ErrorCode::kInvalidArgument, "unknown report format '" + std::string(s) + "'");
}

// Scores serialization -----------------------------------------------------------

inline json to_json(const Tally& t) {
  json j{{"correct", t.correct}, {"total", t.total}};
  j["accuracy"] = t.accuracy() ? json(t.accuracy()->to_fixed(1)) : json("n/a");
  return j;
}

inline Tally tally_from_json(const json& j) {
  return Tally{j.at("correct").get<std::int64_t>(), j.at("total").get<std::int64_t>()};
}

inline json cell_key_json(const CellKey& k) {
  const auto& [task, n, track, scheme] = k;
  return json{{"task", to_string(task)},
              {"n", n},
              {"track", to_string(track)},
              {"scheme", to_string(scheme)}};
}

inline CellKey cell_key_from_json(const json& j) {
  return CellKey{task_from_string(j.at("task").get<std::string>()), j.at("n").get<int>(),
                 track_from_string(j.at("track").get<std::string>()),
                 scheme_from_string(j.at("scheme").get<std::string>())};
}

inline json to_json(const BenchmarkScores& s) {
  json cells = json::array();
  for (const auto& [key, cell] : s.cells) {
    json c = cell_key_json(key);
    c["tally"] = to_json(cell.tally);
    c["ties"] = cell.ties;
    json rel = json::object();
    for (const auto& [name, t] : cell.per_relation) rel[name] = to_json(t);
    c["per_relation"] = rel;
    json errors = json::object();
    for (const auto& [cat, k] : cell.errors) errors[std::string(to_string(cat))] = k;
    c["errors"] = errors;
    c["unclassified_errors"] = cell.unclassified_errors;
    cells.push_back(c);
  }
  json empty = json::array();
  for (const auto& k : s.empty_cells) empty.push_back(cell_key_json(k));
  return json{{"cells", cells}, {"empty_cells", empty}};
}

inline ErrorCategory error_category_from_string(std::string_view s) {
  for (ErrorCategory c : kErrorCategories) {
    if (to_string(c) == s) return c;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown error category '" + std::string(s) + "'");
}

inline BenchmarkScores benchmark_scores_from_json(const json& j) {
  BenchmarkScores s;
  for (const auto& c : j.at("cells")) {
    CellScore cell;
    cell.tally = tally_from_json(c.at("tally"));
    cell.ties = c.value("ties", std::int64_t{0});
    const json relations = c.value("per_relation", json::object());
    const json errors = c.value("errors", json::object());
    for (const auto& [name, t] : relations.items()) {
      cell.per_relation[name] = tally_from_json(t);
    }
    for (const auto& [name, k] : errors.items()) {
      cell.errors[error_category_from_string(name)] = k.get<std::int64_t>();
    }
    cell.unclassified_errors = c.value("unclassified_errors", std::int64_t{0});
    s.cells[cell_key_from_json(c)] = cell;
  }
  const json empty = j.value("empty_cells", json::array());
  for (const auto& k : empty) s.empty_cells.push_back(cell_key_from_json(k));
  return s;
}

// Rendering ----------------------------------------------------------------------

struct ReportInput {
  std::optional<BenchmarkScores> scores;
  // Scores restricted to the paired set; deltas come from here when present.
  std::optional<BenchmarkScores> paired_scores;
  std::optional<SurvivalStats> survival;
  std::optional<BenchmarkSets> sets;
};

namespace detail {

inline std::string pct(const std::optional<Rational>& r) { return r ? r->to_fixed(1) : "n/a"; }

inline std::string signed_pct(const std::optional<Rational>& r) {
  return r ? r->to_fixed(1, true) : "n/a";
}

inline std::string cell_accuracy(const BenchmarkScores& s, TaskKind t, int n, Track tr, Scheme sc) {
  auto it = s.cells.find(CellKey{t, n, tr, sc});
  return it == s.cells.end() ? "n/a" : pct(it->second.tally.accuracy());
}

// Fixed-width text table; the first row is the header.
inline std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::ostringstream out;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t i = 0; i < rows[k].size(); ++i) {
      if (i) out << "  ";
      if (i + 1 < rows[k].size()) {
        out << std::left << std::setw(static_cast<int>(width[i])) << rows[k][i];
      } else {
        out << rows[k][i];
      }
    }
    out << "\n";
    if (k == 0) {
      std::size_t total = 0;
      for (std::size_t i = 0; i < width.size(); ++i) total += width[i] + (i ? 2 : 0);
      out << std::string(total, '-') << "\n";
    }
  }
  return out.str();
}

inline std::set<std::pair<TaskKind, int>> task_rows(const BenchmarkScores& s) {
  std::set<std::pair<TaskKind, int>> rows;
  for (const auto& [key, cell] : s.cells) rows.insert({std::get<0>(key), std::get<1>(key)});
  return rows;
}

}  // namespace detail

// Accuracy table in "Swap/Conf" cells per track, with paired deltas.
inline std::string scores_table(const BenchmarkScores& s, const BenchmarkScores* paired) {
  using detail::cell_accuracy;
  std::vector<std::vector<std::string>> rows{
      {"task", "n", "minimal swap/conf", "contextual swap/conf", "delta swap/conf"}};
  const auto deltas = paired_deltas(paired ? *paired : s);
  for (const auto& [task, n] : detail::task_rows(s)) {
    auto pair = [&](Track tr) {
      return cell_accuracy(s, task, n, tr, Scheme::kSwap) + "/" +
             cell_accuracy(s, task, n, tr, Scheme::kConfusion);
    };
    std::string delta = "n/a";
    if (auto it = deltas.find({task, n}); it != deltas.end()) {
      delta = detail::signed_pct(it->second.swap) + "/" + detail::signed_pct(it->second.confusion);
    }
    rows.push_back({std::string(to_string(task)), std::to_string(n), pair(Track::kMinimal),
                    pair(Track::kContextual), delta});
  }
  std::string out = detail::render_table(rows);
  for (const auto& [key, cell] : s.cells) {
    const auto& [task, n, track, scheme] = key;
    if (!cell.per_relation.empty()) {
      out += "\nper relation (" + std::string(to_string(task)) + " n=" + std::to_string(n) + " " +
             std::string(to_string(track)) + " " + std::string(to_string(scheme)) + ")\n";
      std::vector<std::vector<std::string>> rel{{"relation", "accuracy", "count"}};
      for (const auto& [name, t] : cell.per_relation) {
        rel.push_back({name, detail::pct(t.accuracy()), std::to_string(t.total)});
      }
      out += detail::render_table(rel);
    }
    if (!cell.errors.empty() || cell.unclassified_errors) {
      out += "\nerror types (" + std::string(to_string(task)) + " n=" + std::to_string(n) + " " +
             std::string(to_string(track)) + " " + std::string(to_string(scheme)) + ")\n";
      std::vector<std::vector<std::string>> err{{"category", "count"}};
      for (ErrorCategory c : kErrorCategories) {
        auto it = cell.errors.find(c);
        err.push_back({std::string(to_string(c)), std::to_string(it == cell.errors.end() ? 0 : it->second)});
      }
      err.push_back({"unclassified", std::to_string(cell.unclassified_errors)});
      out += detail::render_table(err);
    }
  }
  for (const auto& k : s.empty_cells) {
    const auto& [task, n, track, scheme] = k;
    out += "empty cell: " + std::string(to_string(task)) + " n=" + std::to_string(n) + " " +
           std::string(to_string(track)) + " " + std::string(to_string(scheme)) + "\n";
  }
  return out;
}

inline std::string scores_csv(const BenchmarkScores& s) {
  std::string out = "task,n,track,scheme,accuracy,count\n";
  for (const auto& [key, cell] : s.cells) {
    const auto& [task, n, track, scheme] = key;
    out += std::string(to_string(task)) + "," + std::to_string(n) + "," +
           std::string(to_string(track)) + "," + std::string(to_string(scheme)) + "," +
           detail::pct(cell.tally.accuracy()) + "," + std::to_string(cell.tally.total) + "\n";
  }
  return out;
}

// Survival rates per stage; background is blank for contextual rows.
inline std::string survival_table(const SurvivalStats& stats) {
  std::vector<std::vector<std::string>> rows{
      {"task", "n", "track", "object", "background", "attribute", "generated", "errored"}};
  for (const auto& [key, c] : stats) {
    rows.push_back({std::string(to_string(c.task)), std::to_string(c.n),
                    std::string(to_string(c.track)), format_rate(c.rate(c.passed_object)),
                    c.passed_background ? format_rate(c.rate(*c.passed_background)) : "-",
                    format_rate(c.rate(c.passed_attribute)), std::to_string(c.generated),
                    std::to_string(c.errored)});
  }
  return detail::render_table(rows);
}

inline std::string survival_csv(const SurvivalStats& stats) {
  std::string out =
      "task,n,track,generated,passed_object,passed_background,passed_attribute,errored,"
      "object_rate,background_rate,attribute_rate\n";
  for (const auto& [key, c] : stats) {
    out += std::string(to_string(c.task)) + "," + std::to_string(c.n) + "," +
           std::string(to_string(c.track)) + "," + std::to_string(c.generated) + "," +
           std::to_string(c.passed_object) + "," +
           (c.passed_background ? std::to_string(*c.passed_background) : "") + "," +
           std::to_string(c.passed_attribute) + "," + std::to_string(c.errored) + "," +
           format_rate(c.rate(c.passed_object)) + "," +
           (c.passed_background ? format_rate(c.rate(*c.passed_background)) : "") + "," +
           format_rate(c.rate(c.passed_attribute)) + "\n";
  }
  return out;
}

inline json deltas_json(const BenchmarkScores& s) {
  json out = json::array();
  for (const auto& [key, d] : paired_deltas(s)) {
    out.push_back({{"task", to_string(key.first)},
                   {"n", key.second},
                   {"delta_swap", detail::signed_pct(d.swap)},
                   {"delta_confusion", detail::signed_pct(d.confusion)}});
  }
  return out;
}

// Deterministic: same input, same bytes.
inline std::string emit_report(const ReportInput& in, ReportFormat format) {
  if (!in.scores && !in.survival && !in.sets) {
    throw Error(ErrorCode::kInvalidArgument, "nothing to report");
  }
  if (format == ReportFormat::kJson) {
    json j = json::object();
    if (in.scores) {
      j["scores"] = to_json(*in.scores);
      j["paired_deltas"] = deltas_json(in.paired_scores ? *in.paired_scores : *in.scores);
    }
    if (in.survival) j["survival"] = to_json(*in.survival);
    if (in.sets) j["sets"] = to_json(*in.sets);
    return j.dump(2) + "\n";
  }
  std::vector<std::string> sections;
  if (format == ReportFormat::kCsv) {
    if (in.scores) sections.push_back(scores_csv(*in.scores));
    if (in.survival) sections.push_back(survival_csv(*in.survival));
  } else {
    if (in.scores) {
      sections.push_back("accuracy (%)\n" +
                         scores_table(*in.scores, in.paired_scores ? &*in.paired_scores : nullptr));
    }
    if (in.survival) sections.push_back("survival (%)\n" + survival_table(*in.survival));
    if (in.sets) {
      sections.push_back("benchmark sets\nminimal " + std::to_string(in.sets->minimal_ids.size()) +
                         "\ncontextual " + std::to_string(in.sets->contextual_ids.size()) +
                         "\npaired " + std::to_string(in.sets->paired_ids.size()) + "\n");
    }
  }
  std::string out;
  for (std::size_t i = 0; i < sections.size(); ++i) out += (i ? "\n" : "") + sections[i];
  return out;
}

}  // namespace autocomp
