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

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "autocomp/error.hpp"
#include "autocomp/hash.hpp"
#include "autocomp/vocabulary.hpp"

namespace autocomp::backend {

inline constexpr std::string_view kProtocolVersion = "autocomp-backend/1";

enum class Capability { kTextGen, kImageGen, kDetect, kVqa, kEmbed };

inline constexpr Capability kCapabilities[] = {Capability::kTextGen, Capability::kImageGen,
                                               Capability::kDetect, Capability::kVqa,
                                               Capability::kEmbed};

inline std::string_view to_string(Capability c) {
  switch (c) {
    case Capability::kTextGen: return "text";
    case Capability::kImageGen: return "image";
    case Capability::kDetect: return "detect";
    case Capability::kVqa: return "vqa";
    case Capability::kEmbed: return "embed";
  }
  return "text";
}

inline Capability capability_from_string(std::string_view s) {
  for (Capability c : kCapabilities) {
    if (to_string(c) == s) return c;
  }
  throw Error(ErrorCode::kProtocolViolation, "unknown capability '" + std::string(s) + "'");
}

inline std::string endpoint_path(Capability c) { return "/v1/" + std::string(to_string(c)); }

struct BackendRequest {
  Capability capability = Capability::kTextGen;
  json payload;
  std::string request_id;
};

struct BackendResponse {
  std::string request_id;
  json result;
  std::string model_id;
  double latency_ms = 0.0;
};

// Sorted keys come for free with nlohmann::json objects. Floats that hold an
// integral value become integers and -0.0 becomes 0, so 4.5 / 4.50 and
// 1024 / 1024.0 hash alike.
inline json canonicalize(const json& j) {
  if (j.is_object()) {
    json out = json::object();
    for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = canonicalize(it.value());
    return out;
  }
  if (j.is_array()) {
    json out = json::array();
    for (const auto& v : j) out.push_back(canonicalize(v));
    return out;
  }
  if (j.is_number_float()) {
    const double d = j.get<double>();
    if (!std::isfinite(d)) throw Error(ErrorCode::kProtocolViolation, "non-finite number");
    if (d == std::trunc(d) && std::fabs(d) < 9.0e15) return json(static_cast<std::int64_t>(d));
    return json(d);
  }
  if (j.is_number_unsigned()) {
    const auto u = j.get<std::uint64_t>();
    if (u <= static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      return json(static_cast<std::int64_t>(u));
    }
  }
  return j;
}

inline std::string cache_key(Capability c, const json& payload) {
  return sha256_hex(std::string(to_string(c)) + "\n" + canonicalize(payload).dump());
}

inline BackendRequest make_request(Capability c, json payload) {
  BackendRequest r;
  r.capability = c;
  r.payload = canonicalize(payload);
  r.request_id = cache_key(c, r.payload);
  return r;
}

// Sampling and inference defaults ------------------------------------------

struct TextGenParams {
  double temperature = 0.7;
  double top_p = 0.9;
  int max_tokens = 150;
};

struct ImageGenParams {
  int width = 1024;
  int height = 1024;
  int steps = 28;
  double guidance = 4.5;
};

struct DetectParams {
  double box_threshold = 0.4;
  double text_threshold = 0.3;
};

// Images travel by reference: a path (relative to the run directory when
// produced by the pipeline) plus the sha256 of the file bytes.
struct ImageRef {
  std::string path;
  std::string sha256;
  bool operator==(const ImageRef&) const = default;
};

inline json to_json(const ImageRef& r) { return json{{"path", r.path}, {"sha256", r.sha256}}; }

inline ImageRef image_ref_from_json(const json& j) {
  if (!j.is_object() || !j.contains("path") || !j.at("path").is_string() ||
      !j.contains("sha256") || !j.at("sha256").is_string()) {
    throw Error(ErrorCode::kProtocolViolation, "image reference needs string path and sha256");
  }
  return ImageRef{j.at("path").get<std::string>(), j.at("sha256").get<std::string>()};
}

inline BackendRequest text_request(std::string_view system, std::string_view user, int attempt,
                                   std::uint64_t seed, const TextGenParams& p = {}) {
  return make_request(Capability::kTextGen, json{{"system", system},
                                                 {"user", user},
                                                 {"attempt", attempt},
                                                 {"seed", seed},
                                                 {"temperature", p.temperature},
                                                 {"top_p", p.top_p},
                                                 {"max_tokens", p.max_tokens}});
}

inline BackendRequest image_request(std::string_view caption, std::string_view concept_id,
                                    std::string_view track, std::uint64_t seed,
                                    const ImageGenParams& p = {}) {
  return make_request(Capability::kImageGen, json{{"caption", caption},
                                                  {"concept_id", concept_id},
                                                  {"track", track},
                                                  {"seed", seed},
                                                  {"width", p.width},
                                                  {"height", p.height},
                                                  {"steps", p.steps},
                                                  {"guidance", p.guidance}});
}

inline BackendRequest detect_request(const ImageRef& image, const std::vector<std::string>& labels,
                                     const DetectParams& p = {}) {
  return make_request(Capability::kDetect, json{{"image", to_json(image)},
                                                {"labels", labels},
                                                {"box_threshold", p.box_threshold},
                                                {"text_threshold", p.text_threshold}});
}

inline BackendRequest vqa_request(const ImageRef& image, std::string_view question,
                                  const std::vector<std::string>& allowed_answers) {
  return make_request(Capability::kVqa, json{{"image", to_json(image)},
                                             {"question", question},
                                             {"allowed_answers", allowed_answers}});
}

inline BackendRequest embed_request(const std::vector<std::string>& texts,
                                    const ImageRef* image = nullptr) {
  json payload{{"texts", texts}};
  if (image) payload["image"] = to_json(*image);
  return make_request(Capability::kEmbed, payload);
}

// Result schemas --------------------------------------------------------------

struct Detection {
  std::string label;
  double score = 0.0;
  std::array<double, 4> bbox{};  // normalized x0, y0, x1, y1
  std::optional<std::string> mask_path;

  bool operator==(const Detection&) const = default;
};

inline json to_json(const Detection& d) {
  json j{{"label", d.label}, {"score", d.score}, {"bbox", d.bbox}};
  if (d.mask_path) j["mask"] = json{{"path", *d.mask_path}};
  return j;
}

inline Detection detection_from_json(const json& j) {
  if (!j.is_object() || !j.contains("label") || !j.at("label").is_string() ||
      !j.contains("score") || !j.at("score").is_number() || !j.contains("bbox") ||
      !j.at("bbox").is_array() || j.at("bbox").size() != 4) {
    throw Error(ErrorCode::kProtocolViolation, "malformed detection: " + j.dump());
  }
  Detection d;
  d.label = j.at("label").get<std::string>();
  d.score = j.at("score").get<double>();
  for (int i = 0; i < 4; ++i) {
    if (!j.at("bbox")[i].is_number()) {
      throw Error(ErrorCode::kProtocolViolation, "bbox entries must be numbers");
    }
    d.bbox[i] = j.at("bbox")[i].get<double>();
  }
  if (!(d.score >= 0.0 && d.score <= 1.0) || !(0.0 <= d.bbox[0] && d.bbox[0] < d.bbox[2] &&
                                              d.bbox[2] <= 1.0) ||
      !(0.0 <= d.bbox[1] && d.bbox[1] < d.bbox[3] && d.bbox[3] <= 1.0)) {
    throw Error(ErrorCode::kProtocolViolation, "detection out of range: " + j.dump());
  }
  if (j.contains("mask") && !j.at("mask").is_null()) {
    const json& m = j.at("mask");
    if (!m.is_object() || !m.contains("path") || !m.at("path").is_string()) {
      throw Error(ErrorCode::kProtocolViolation, "mask must be {path}");
    }
    d.mask_path = m.at("path").get<std::string>();
  }
  return d;
}

inline void require(bool ok, Capability c, const std::string& what) {
  if (!ok) {
    throw Error(ErrorCode::kProtocolViolation,
                std::string(to_string(c)) + " result: " + what);
  }
}

// Throws ProtocolViolation unless `result` has the shape of capability `c`.
inline void validate_result(Capability c, const json& result) {
  require(result.is_object(), c, "must be an object");
  switch (c) {
    case Capability::kTextGen:
      require(result.contains("text") && result.at("text").is_string(), c, "needs string text");
      break;
    case Capability::kImageGen:
      require(result.contains("image"), c, "needs image reference");
      image_ref_from_json(result.at("image"));
      break;
    case Capability::kDetect:
      require(result.contains("detections") && result.at("detections").is_array(), c,
              "needs detections array");
      for (const auto& d : result.at("detections")) detection_from_json(d);
      break;
    case Capability::kVqa:
      require(result.contains("answer") && result.at("answer").is_string(), c,
              "needs string answer");
      break;
    case Capability::kEmbed: {
      require(result.contains("vectors") && result.at("vectors").is_array(), c,
              "needs vectors array");
      for (const auto& v : result.at("vectors")) {
        require(v.is_array(), c, "vectors must be arrays");
        for (const auto& x : v) require(x.is_number(), c, "vector entries must be numbers");
      }
      if (result.contains("image_vector")) {
        require(result.at("image_vector").is_array(), c, "image_vector must be an array");
      }
      break;
    }
  }
}

inline std::vector<Detection> detections_of(const BackendResponse& r) {
  std::vector<Detection> out;
  for (const auto& d : r.result.at("detections")) out.push_back(detection_from_json(d));
  return out;
}

// Wire envelopes --------------------------------------------------------------

inline json request_envelope(const BackendRequest& r) {
  return json{{"protocol_version", kProtocolVersion},
              {"request_id", r.request_id},
              {"payload", r.payload}};
}

inline BackendRequest request_from_envelope(Capability c, const json& j) {
  if (!j.is_object() || !j.contains("payload") || !j.at("payload").is_object()) {
    throw Error(ErrorCode::kProtocolViolation, "request envelope needs an object payload");
  }
  if (j.value("protocol_version", std::string()) != kProtocolVersion) {
    throw Error(ErrorCode::kProtocolViolation, "unsupported protocol_version");
  }
  BackendRequest r = make_request(c, j.at("payload"));
  if (j.contains("request_id") && j.at("request_id") != r.request_id) {
    throw Error(ErrorCode::kProtocolViolation, "request_id does not match payload");
  }
  return r;
}

inline json response_envelope(const BackendResponse& r) {
  return json{{"protocol_version", kProtocolVersion},
              {"request_id", r.request_id},
              {"model_id", r.model_id},
              {"latency_ms", r.latency_ms},
              {"result", r.result}};
}

inline BackendResponse response_from_envelope(Capability c, const json& j,
                                              const std::string& expected_id) {
  if (!j.is_object() || !j.contains("result") || !j.contains("request_id") ||
      !j.at("request_id").is_string()) {
    throw Error(ErrorCode::kProtocolViolation, "response envelope needs request_id and result");
  }
  BackendResponse r;
  r.request_id = j.at("request_id").get<std::string>();
  if (r.request_id != expected_id) {
    throw Error(ErrorCode::kProtocolViolation, "response request_id does not echo the request");
  }
  r.result = j.at("result");
  validate_result(c, r.result);
  r.model_id = j.value("model_id", std::string());
  r.latency_ms = j.contains("latency_ms") && j.at("latency_ms").is_number()
                     ? j.at("latency_ms").get<double>()
                     : 0.0;
  return r;
}

inline json error_envelope(ErrorCode code, std::string_view message) {
  return json{{"error", {{"code", to_string(code)}, {"message", message}}}};
}

// A backend serves every capability it is asked for, or throws.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendResponse call(const BackendRequest& request) = 0;
};

}  // namespace autocomp::backend
