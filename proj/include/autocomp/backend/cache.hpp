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
#include <atomic>
#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "autocomp/backend/mock.hpp"
#include "autocomp/backend/protocol.hpp"
#include "autocomp/io.hpp"

namespace autocomp::backend {

// Content-addressed response store: <root>/<capability>/<request_id> holds the
// response envelope and <request_id>.meta the request payload and model id.
// Image results are copied next to them as <request_id>.png.
class DiskCache {
 public:
  explicit DiskCache(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }

  std::filesystem::path entry_path(Capability c, const std::string& id) const {
    return root_ / std::string(to_string(c)) / id;
  }

  std::optional<BackendResponse> get(Capability c, const std::string& id) const {
    std::shared_lock lock(mutex_);
    const auto path = entry_path(c, id);
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return std::nullopt;
    json doc = json::parse(read_file(path), nullptr, false);
    if (doc.is_discarded()) return std::nullopt;
    try {
      return response_from_envelope(c, doc, id);
    } catch (const Error&) {
      return std::nullopt;
    }
  }

  BackendResponse put(const BackendRequest& request, BackendResponse response) {
    std::unique_lock lock(mutex_);
    const auto path = entry_path(request.capability, request.request_id);
    if (request.capability == Capability::kImageGen) {
      const ImageRef ref = image_ref_from_json(response.result.at("image"));
      const std::string bytes = read_file(ref.path);
      if (sha256_hex(bytes) != ref.sha256) {
        throw Error(ErrorCode::kProtocolViolation, "image bytes do not match sha256 " + ref.sha256);
      }
      const auto blob = path.string() + ".png";
      write_file_atomic(blob, bytes);
      response.result["image"]["path"] = std::filesystem::absolute(blob).string();
    }
    json meta{{"capability", to_string(request.capability)},
              {"request_id", request.request_id},
              {"model_id", response.model_id},
              {"protocol_version", kProtocolVersion},
              {"payload", request.payload}};
    write_file_atomic(path.string() + ".meta", meta.dump() + "\n");
    write_file_atomic(path, response_envelope(response).dump() + "\n");
    return response;
  }

  // Keyed mock script answering every cached request by request_id. Image
  // results keep pointing at the cached blobs.
  MockScript to_script() const {
    std::shared_lock lock(mutex_);
    MockScript script;
    script.mode = ScriptMode::kKeyed;
    std::error_code ec;
    for (Capability c : kCapabilities) {
      const auto dir = root_ / std::string(to_string(c));
      if (!std::filesystem::is_directory(dir, ec)) continue;
      std::vector<std::filesystem::path> entries;
      for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.path().extension().empty()) entries.push_back(e.path());
      }
      std::sort(entries.begin(), entries.end());
      for (const auto& p : entries) {
        json doc = json::parse(read_file(p), nullptr, false);
        if (doc.is_discarded()) continue;
        Fixture f;
        f.capability = c;
        f.request_id = p.filename().string();
        f.result = doc.at("result");
        f.model_id = doc.value("model_id", std::string());
        script.fixtures.push_back(std::move(f));
      }
    }
    return script;
  }

 private:
  std::filesystem::path root_;
  mutable std::shared_mutex mutex_;
};

// Serves repeated requests from the cache; only misses reach `inner`.
class CachedBackend : public Backend {
 public:
  CachedBackend(Backend& inner, DiskCache& cache) : inner_(inner), cache_(cache) {}

  BackendResponse call(const BackendRequest& request) override {
    if (auto hit = cache_.get(request.capability, request.request_id)) {
      ++hits_;
      return *hit;
    }
    ++remote_calls_;
    BackendResponse r = inner_.call(request);
    if (r.request_id != request.request_id) {
      throw Error(ErrorCode::kProtocolViolation, "response request_id does not echo the request");
    }
    validate_result(request.capability, r.result);
    return cache_.put(request, std::move(r));
  }

  std::size_t remote_calls() const { return remote_calls_; }
  std::size_t hits() const { return hits_; }

 private:
  Backend& inner_;
  DiskCache& cache_;
  std::atomic<std::size_t> remote_calls_{0};
  std::atomic<std::size_t> hits_{0};
};

}  // namespace autocomp::backend
