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

#include <png.h>

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "autocomp/error.hpp"
#include "autocomp/hash.hpp"
#include "autocomp/io.hpp"
#include "autocomp/vocabulary.hpp"

namespace autocomp {

// 8-bit RGB raster, row-major.
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Raster() = default;
  Raster(int w, int h, std::array<std::uint8_t, 3> fill = {255, 255, 255})
      : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3) {
    if (w <= 0 || h <= 0) throw Error(ErrorCode::kInvalidArgument, "raster must be non-empty");
    for (std::size_t i = 0; i < rgb.size(); i += 3) {
      rgb[i] = fill[0];
      rgb[i + 1] = fill[1];
      rgb[i + 2] = fill[2];
    }
  }

  bool empty() const { return width == 0 || height == 0; }

  std::uint8_t* at(int x, int y) {
    return &rgb[(static_cast<std::size_t>(y) * width + x) * 3];
  }
  const std::uint8_t* at(int x, int y) const {
    return &rgb[(static_cast<std::size_t>(y) * width + x) * 3];
  }

  // Fills pixels whose centre lies inside the normalized box.
  void fill_box(const std::array<double, 4>& box, std::array<std::uint8_t, 3> color) {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double cx = (x + 0.5) / width;
        const double cy = (y + 0.5) / height;
        if (cx >= box[0] && cx < box[2] && cy >= box[1] && cy < box[3]) {
          std::uint8_t* p = at(x, y);
          p[0] = color[0];
          p[1] = color[1];
          p[2] = color[2];
        }
      }
    }
  }

  bool operator==(const Raster&) const = default;
};

inline std::string encode_png(const Raster& r) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(r.width);
  image.height = static_cast<png_uint_32>(r.height);
  image.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, r.rgb.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIoFailure, std::string("png encode: ") + image.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, r.rgb.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIoFailure, std::string("png encode: ") + image.message);
  }
  out.resize(size);
  return out;
}

inline Raster decode_png(const std::string& bytes) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::kIoFailure, std::string("png decode: ") + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  Raster r;
  r.width = static_cast<int>(image.width);
  r.height = static_cast<int>(image.height);
  r.rgb.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, r.rgb.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error(ErrorCode::kIoFailure, std::string("png decode: ") + image.message);
  }
  return r;
}

// Returns the sha256 of the encoded file.
inline std::string write_png(const std::filesystem::path& path, const Raster& r) {
  const std::string bytes = encode_png(r);
  write_file_atomic(path, bytes);
  return sha256_hex(bytes);
}

inline Raster read_png(const std::filesystem::path& path) {
  try {
    return decode_png(read_file(path));
  } catch (const Error& e) {
    throw Error(ErrorCode::kIoFailure, path.string() + ": " + e.detail());
  }
}

}  // namespace autocomp
