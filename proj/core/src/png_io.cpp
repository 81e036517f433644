// Copyright 2026 The radseg Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "radseg/png_io.hpp"

#include <png.h>

#include <cstring>

RADSEG_NAMESPACE_BEGIN

void write_mask_png(const std::string& path, std::span<const std::uint8_t> labels,
                    Index rows, Index cols) {
  if (rows <= 0 || cols <= 0 || static_cast<Index>(labels.size()) != rows * cols) {
    throw ShapeError("png: label count does not match " + std::to_string(rows) +
                     "x" + std::to_string(cols));
  }
  std::vector<std::uint8_t> rgb(labels.size() * 3);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= kClassPalette.size()) {
      throw DataError("png: label " + std::to_string(labels[i]) + " has no color");
    }
    std::memcpy(&rgb[3 * i], kClassPalette[labels[i]].data(), 3);
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(cols);
  image.height = static_cast<png_uint_32>(rows);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, rgb.data(), 0, nullptr)) {
    throw DataError("png: cannot write " + path + ": " + image.message);
  }
}

LabelImage read_mask_png(const std::string& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw DataError("png: cannot read " + path + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> rgb(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, rgb.data(), 0, nullptr)) {
    throw DataError("png: cannot decode " + path + ": " + image.message);
  }
  LabelImage out;
  out.rows = image.height;
  out.cols = image.width;
  out.labels.resize(static_cast<std::size_t>(out.rows * out.cols));
  for (std::size_t i = 0; i < out.labels.size(); ++i) {
    const std::uint8_t* px = &rgb[3 * i];
    bool found = false;
    for (std::size_t k = 0; k < kClassPalette.size(); ++k) {
      if (std::memcmp(px, kClassPalette[k].data(), 3) == 0) {
        out.labels[i] = static_cast<std::uint8_t>(k);
        found = true;
        break;
      }
    }
    if (!found) throw DataError("png: color outside the class palette in " + path);
  }
  return out;
}

RADSEG_NAMESPACE_END
