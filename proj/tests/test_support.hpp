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

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include "autocomp/concept.hpp"

namespace autocomp::testing {

inline Vocabulary default_vocabulary() {
  return load_vocabulary_file(AUTOCOMP_DEFAULT_VOCABULARY);
}

inline json toy_vocabulary_doc(const std::vector<std::string>& objects,
                               const std::vector<std::string>& colors, bool with_relations = true) {
  json doc;
  doc["objects"] = json::array();
  for (const auto& o : objects) doc["objects"].push_back({{"name", o}});
  doc["colors"] = colors;
  doc["relations"] = json::array();
  if (with_relations) {
    doc["relations"] = json::parse(R"([
      {"name": "over", "inverse": "under"},
      {"name": "under", "inverse": "over"},
      {"name": "to the left of", "inverse": "to the right of"},
      {"name": "to the right of", "inverse": "to the left of"}])");
  }
  return doc;
}

inline Vocabulary toy_vocabulary(const std::vector<std::string>& objects,
                                 const std::vector<std::string>& colors) {
  return load_vocabulary(toy_vocabulary_doc(objects, colors));
}

// Shapes and a few household objects, including one inherently-plural noun.
inline json shapes_vocabulary_doc() {
  json doc = toy_vocabulary_doc({"cube", "sphere", "cone", "chair", "lamp", "table", "monitor",
                                 "bicycle", "apple"},
                                {"red", "blue", "green", "yellow", "olive", "orange"});
  doc["objects"].push_back({{"name", "glove"}, {"plural", "gloves"}, {"number", "plural"}});
  return doc;
}

inline Vocabulary shapes_vocabulary() { return load_vocabulary(shapes_vocabulary_doc()); }

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("autocomp-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

}  // namespace autocomp::testing
