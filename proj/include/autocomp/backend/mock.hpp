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
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "autocomp/backend/protocol.hpp"
#include "autocomp/raster.hpp"

namespace autocomp::backend {

enum class ScriptMode { kOrdered, kKeyed };

struct FieldMatcher {
  std::string field;  // dotted path into the payload, e.g. "image.path"
  std::optional<std::string> contains;
  std::optional<json> equals;
};

struct Fixture {
  Capability capability = Capability::kTextGen;
  std::optional<std::string> request_id;
  std::vector<FieldMatcher> match;
  std::optional<json> result;
  std::optional<json> synthesize;  // ImageGen only: raster drawn on the fly
  std::optional<ErrorCode> error;
  std::string error_message;
  std::string model_id;
};

struct MockScript {
  ScriptMode mode = ScriptMode::kKeyed;
  std::string model_id = "mock";
  std::vector<Fixture> fixtures;
};

namespace detail {

[[noreturn]] inline void malformed(const std::string& what) {
  throw Error(ErrorCode::kMalformedScript, what);
}

inline std::array<std::uint8_t, 3> rgb_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) malformed("colors are [r, g, b]");
  std::array<std::uint8_t, 3> out{};
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number_integer() || j[i].get<int>() < 0 || j[i].get<int>() > 255) {
      malformed("color channels are integers in 0..255");
    }
    out[i] = static_cast<std::uint8_t>(j[i].get<int>());
  }
  return out;
}

inline std::array<double, 4> box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) malformed("boxes are [x0, y0, x1, y1]");
  std::array<double, 4> b{};
  for (int i = 0; i < 4; ++i) {
    if (!j[i].is_number()) malformed("box coordinates must be numbers");
    b[i] = j[i].get<double>();
  }
  return b;
}

inline Raster synthesize_raster(const json& spec) {
  if (!spec.is_object()) malformed("synthesize must be an object");
  const int w = spec.value("width", 64);
  const int h = spec.value("height", 64);
  if (w <= 0 || h <= 0 || w > 8192 || h > 8192) malformed("synthesize size out of range");
  Raster r(w, h, spec.contains("background") ? rgb_from_json(spec.at("background"))
                                             : std::array<std::uint8_t, 3>{255, 255, 255});
  if (spec.contains("rects")) {
    for (const auto& rect : spec.at("rects")) {
      r.fill_box(box_from_json(rect.at("box")), rgb_from_json(rect.at("color")));
    }
  }
  return r;
}

inline const json* lookup(const json& payload, const std::string& dotted) {
  const json* cur = &payload;
  std::size_t start = 0;
  while (start <= dotted.size()) {
    const std::size_t dot = std::min(dotted.find('.', start), dotted.size());
    const std::string part = dotted.substr(start, dot - start);
    if (!cur->is_object() || !cur->contains(part)) return nullptr;
    cur = &cur->at(part);
    start = dot + 1;
  }
  return cur;
}

inline bool matches(const Fixture& f, const BackendRequest& r) {
  if (f.capability != r.capability) return false;
  if (f.request_id && *f.request_id != r.request_id) return false;
  for (const auto& m : f.match) {
    const json* v = lookup(r.payload, m.field);
    if (!v) return false;
    if (m.equals && canonicalize(*m.equals) != *v) return false;
    if (m.contains) {
      const std::string hay = v->is_string() ? v->get<std::string>() : v->dump();
      if (hay.find(*m.contains) == std::string::npos) return false;
    }
  }
  return true;
}

}  // namespace detail

inline Fixture fixture_from_json(const json& j, const std::string& default_model) {
  using detail::malformed;
  if (!j.is_object()) malformed("fixtures must be objects");
  Fixture f;
  if (!j.contains("capability") || !j.at("capability").is_string()) {
    malformed("fixture needs a capability");
  }
  try {
    f.capability = capability_from_string(j.at("capability").get<std::string>());
  } catch (const Error& e) {
    malformed(e.detail());
  }
  if (j.contains("request_id")) f.request_id = j.at("request_id").get<std::string>();
  if (j.contains("match")) {
    if (!j.at("match").is_array()) malformed("match must be a list");
    for (const auto& m : j.at("match")) {
      if (!m.is_object() || !m.contains("field") || !m.at("field").is_string()) {
        malformed("matchers need a field");
      }
      FieldMatcher fm;
      fm.field = m.at("field").get<std::string>();
      if (m.contains("contains")) fm.contains = m.at("contains").get<std::string>();
      if (m.contains("equals")) fm.equals = m.at("equals");
      if (!fm.contains && !fm.equals) malformed("matcher needs contains or equals");
      f.match.push_back(std::move(fm));
    }
  }
  const int outcomes = static_cast<int>(j.contains("result")) +
                       static_cast<int>(j.contains("synthesize")) +
                       static_cast<int>(j.contains("error"));
  if (outcomes != 1) malformed("fixture needs exactly one of result, synthesize, error");
  if (j.contains("result")) {
    f.result = j.at("result");
    try {
      validate_result(f.capability, *f.result);
    } catch (const Error& e) {
      malformed(e.detail());
    }
  }
  if (j.contains("synthesize")) {
    if (f.capability != Capability::kImageGen) malformed("synthesize is for image fixtures");
    detail::synthesize_raster(j.at("synthesize"));
    f.synthesize = j.at("synthesize");
  }
  if (j.contains("error")) {
    const json& e = j.at("error");
    if (!e.is_object() || !e.contains("code")) malformed("error needs a code");
    f.error = error_code_from_string(e.at("code").get<std::string>());
    f.error_message = e.value("message", std::string("scripted failure"));
  }
  f.model_id = j.value("model_id", default_model);
  return f;
}

inline MockScript parse_mock_script(const json& doc) {
  using detail::malformed;
  if (!doc.is_object()) malformed("mock script must be an object");
  MockScript s;
  const std::string mode = doc.value("mode", std::string("keyed"));
  if (mode == "ordered") {
    s.mode = ScriptMode::kOrdered;
  } else if (mode != "keyed") {
    malformed("mode must be ordered or keyed");
  }
  s.model_id = doc.value("model_id", std::string("mock"));
  if (!doc.contains("fixtures") || !doc.at("fixtures").is_array()) {
    malformed("mock script needs a fixtures list");
  }
  for (const auto& f : doc.at("fixtures")) s.fixtures.push_back(fixture_from_json(f, s.model_id));
  return s;
}

inline json to_json(const Fixture& f) {
  json j{{"capability", to_string(f.capability)}};
  if (f.request_id) j["request_id"] = *f.request_id;
  if (!f.match.empty()) {
    json ms = json::array();
    for (const auto& m : f.match) {
      json mj{{"field", m.field}};
      if (m.contains) mj["contains"] = *m.contains;
      if (m.equals) mj["equals"] = *m.equals;
      ms.push_back(mj);
    }
    j["match"] = ms;
  }
  if (f.result) j["result"] = *f.result;
  if (f.synthesize) j["synthesize"] = *f.synthesize;
  if (f.error) j["error"] = {{"code", to_string(*f.error)}, {"message", f.error_message}};
  j["model_id"] = f.model_id;
  return j;
}

inline json to_json(const MockScript& s) {
  json fixtures = json::array();
  for (const auto& f : s.fixtures) fixtures.push_back(to_json(f));
  return json{{"mode", s.mode == ScriptMode::kOrdered ? "ordered" : "keyed"},
              {"model_id", s.model_id},
              {"fixtures", fixtures}};
}

inline MockScript load_mock_script_file(const std::filesystem::path& path) {
  json doc = json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded()) {
    throw Error(ErrorCode::kMalformedScript, path.string() + " is not valid JSON");
  }
  return parse_mock_script(doc);
}

// Replays a script. Keyed mode answers with the first matching fixture and
// may be shared between threads; ordered mode consumes fixtures per
// capability in sequence and is meant for a single consumer.
class MockBackend : public Backend {
 public:
  MockBackend(MockScript script, std::filesystem::path image_dir)
      : script_(std::move(script)), image_dir_(std::move(image_dir)) {}

  BackendResponse call(const BackendRequest& request) override {
    const Fixture* f = nullptr;
    {
      std::lock_guard lock(mutex_);
      ++calls_;
      if (script_.mode == ScriptMode::kKeyed) {
        for (const auto& candidate : script_.fixtures) {
          if (detail::matches(candidate, request)) {
            f = &candidate;
            break;
          }
        }
      } else {
        std::size_t& cursor = cursors_[request.capability];
        while (cursor < script_.fixtures.size() &&
               script_.fixtures[cursor].capability != request.capability) {
          ++cursor;
        }
        if (cursor < script_.fixtures.size() &&
            detail::matches(script_.fixtures[cursor], request)) {
          f = &script_.fixtures[cursor++];
        }
      }
    }
    if (!f) {
      throw Error(ErrorCode::kMockMiss, "no fixture for " + std::string(to_string(request.capability)) +
                                            " request " + request.request_id.substr(0, 12) +
                                            " payload " + request.payload.dump().substr(0, 200));
    }
    if (f->error) throw Error(*f->error, f->error_message);

    BackendResponse r;
    r.request_id = request.request_id;
    r.model_id = f->model_id;
    if (f->synthesize) {
      const auto path = image_dir_ / (request.request_id + ".png");
      const std::string sha = write_png(path, detail::synthesize_raster(*f->synthesize));
      r.result = json{{"image", to_json(ImageRef{path.string(), sha})}};
    } else {
      r.result = *f->result;
    }
    return r;
  }

  std::size_t calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
  }

  const MockScript& script() const { return script_; }

 private:
  MockScript script_;
  std::filesystem::path image_dir_;
  mutable std::mutex mutex_;
  std::map<Capability, std::size_t> cursors_;
  std::size_t calls_ = 0;
};

// Sends each capability to its own backend.
class RoutingBackend : public Backend {
 public:
  void route(Capability c, Backend* b) { routes_[c] = b; }
  void route_all(Backend* b) {
    for (Capability c : kCapabilities) routes_[c] = b;
  }

  BackendResponse call(const BackendRequest& request) override {
    auto it = routes_.find(request.capability);
    if (it == routes_.end() || !it->second) {
      throw Error(ErrorCode::kBackendUnavailable,
                  "no backend configured for " + std::string(to_string(request.capability)));
    }
    return it->second->call(request);
  }

 private:
  std::map<Capability, Backend*> routes_;
};

}  // namespace autocomp::backend
