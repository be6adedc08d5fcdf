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

#include <httplib.h>

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "autocomp/backend/protocol.hpp"

namespace autocomp::backend {

struct HttpOptions {
  std::string base_url;  // e.g. http://127.0.0.1:8000
  int timeout_seconds = 600;
  int inflight_per_capability = 4;
  // Relative image paths in payloads are resolved against this directory
  // before they go on the wire.
  std::filesystem::path base_dir;
};

namespace detail {

class Limiter {
 public:
  explicit Limiter(int slots) : slots_(slots < 1 ? 1 : slots) {}
  void acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return slots_ > 0; });
    --slots_;
  }
  void release() {
    {
      std::lock_guard lock(mutex_);
      ++slots_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  int slots_;
};

inline json resolve_image_paths(json payload, const std::filesystem::path& base) {
  if (base.empty() || !payload.contains("image") || !payload.at("image").is_object()) {
    return payload;
  }
  std::filesystem::path p = payload["image"].value("path", std::string());
  if (p.is_relative()) payload["image"]["path"] = (base / p).lexically_normal().string();
  return payload;
}

}  // namespace detail

// Client for a remote backend speaking the /v1/* protocol.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpOptions options) : options_(std::move(options)) {
    for (Capability c : kCapabilities) {
      limiters_.emplace(c, std::make_unique<detail::Limiter>(options_.inflight_per_capability));
    }
  }

  BackendResponse call(const BackendRequest& request) override {
    BackendRequest wire = make_request(
        request.capability, detail::resolve_image_paths(request.payload, options_.base_dir));
    auto& limiter = *limiters_.at(request.capability);
    limiter.acquire();
    httplib::Result res;
    const auto started = std::chrono::steady_clock::now();
    {
      httplib::Client cli(options_.base_url);
      cli.set_connection_timeout(10, 0);
      cli.set_read_timeout(options_.timeout_seconds, 0);
      cli.set_write_timeout(options_.timeout_seconds, 0);
      res = cli.Post(endpoint_path(request.capability), request_envelope(wire).dump(),
                     "application/json");
    }
    limiter.release();
    if (!res) {
      throw Error(ErrorCode::kBackendUnavailable,
                  options_.base_url + ": " + httplib::to_string(res.error()));
    }
    json body = json::parse(res->body, nullptr, false);
    if (res->status != 200) {
      if (res->status == 503) {
        throw Error(ErrorCode::kBackendUnavailable, options_.base_url + " is not ready (503)");
      }
      if (!body.is_discarded() && body.contains("error") && body["error"].is_object()) {
        throw Error(error_code_from_string(body["error"].value("code", std::string())),
                    body["error"].value("message", std::string("remote error")));
      }
      throw Error(ErrorCode::kProtocolViolation,
                  "HTTP " + std::to_string(res->status) + " without error body");
    }
    if (body.is_discarded()) throw Error(ErrorCode::kProtocolViolation, "response is not JSON");
    BackendResponse r = response_from_envelope(request.capability, body, wire.request_id);
    r.request_id = request.request_id;
    if (r.latency_ms == 0.0) {
      r.latency_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - started)
                         .count();
    }
    return r;
  }

  // Returns the /healthz document; throws BackendUnavailable when unreachable.
  json health() const {
    httplib::Client cli(options_.base_url);
    cli.set_connection_timeout(5, 0);
    auto res = cli.Get("/healthz");
    if (!res || res->status != 200) {
      throw Error(ErrorCode::kBackendUnavailable, options_.base_url + " health check failed");
    }
    json body = json::parse(res->body, nullptr, false);
    if (body.is_discarded() || body.value("protocol_version", std::string()) != kProtocolVersion) {
      throw Error(ErrorCode::kProtocolViolation, "health check reports another protocol version");
    }
    return body;
  }

 private:
  HttpOptions options_;
  std::map<Capability, std::unique_ptr<detail::Limiter>> limiters_;
};

// Exposes `backend` on `server` under the /v1/* protocol. Used for local
// contract tests and as a replay server for recorded scripts.
inline void mount_backend(httplib::Server& server, Backend& backend, json models = json::object()) {
  for (Capability c : kCapabilities) {
    server.Post(endpoint_path(c), [&backend, c](const httplib::Request& req,
                                                httplib::Response& res) {
      json body = json::parse(req.body, nullptr, false);
      try {
        if (body.is_discarded()) throw Error(ErrorCode::kProtocolViolation, "body is not JSON");
        BackendRequest request = request_from_envelope(c, body);
        BackendResponse response = backend.call(request);
        validate_result(c, response.result);
        res.set_content(response_envelope(response).dump(), "application/json");
      } catch (const Error& e) {
        res.status = e.code() == ErrorCode::kProtocolViolation ? 400
                     : e.code() == ErrorCode::kBackendUnavailable ? 503
                                                                  : 422;
        res.set_content(error_envelope(e.code(), e.detail()).dump(), "application/json");
      }
    });
  }
  server.Get("/healthz", [models](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"protocol_version", kProtocolVersion}, {"models", models}}.dump(),
                    "application/json");
  });
}

}  // namespace autocomp::backend
