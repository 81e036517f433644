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

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "radseg/config.hpp"

RADSEG_NAMESPACE_BEGIN

// Class palette: background black, pedestrian red, cyclist green, car blue.
inline constexpr std::array<std::array<std::uint8_t, 3>, 4> kClassPalette{{
    {0, 0, 0}, {255, 0, 0}, {0, 255, 0}, {0, 0, 255}}};

struct LabelImage {
  Index rows = 0;
  Index cols = 0;
  std::vector<std::uint8_t> labels;  // row-major
};

// 8-bit RGB PNG, one pixel per bin. Labels outside the palette raise DataError.
void write_mask_png(const std::string& path, std::span<const std::uint8_t> labels,
                    Index rows, Index cols);
// Colors outside the palette raise DataError.
LabelImage read_mask_png(const std::string& path);

RADSEG_NAMESPACE_END
