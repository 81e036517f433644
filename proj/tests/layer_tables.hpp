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

// Per-layer output extents (batch axis dropped) at 256 x 256 x 64 input and
// K = 4, as listed in the architecture tables of the four networks.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "radseg/models.hpp"

namespace radseg_test {

using LayerTable = std::vector<std::pair<std::string, radseg::Shape>>;

inline LayerTable expected_layer_table(radseg::Variant v) {
  using radseg::Variant;
  LayerTable t;
  auto add = [&](const std::string& name, radseg::Shape s) { t.emplace_back(name, std::move(s)); };
  auto encoder = [&](const std::string& view, radseg::Index w, bool aspp) {
    const radseg::Index half = view == "ra" ? w / 2 : w;
    const radseg::Index quarter = view == "ra" ? w / 4 : w;
    add(view + "_layer1", {128, 256, w});
    add(view + "_layer2", {128, 128, half});
    add(view + "_layer3", {128, 128, half});
    add(view + "_layer4", {128, 64, quarter});
    add(view + "_layer5", {128, 64, quarter});
    if (aspp) {
      add(view + "_layer6", {640, 64, 64});
      add(view + "_layer7", {128, 64, 64});
    }
  };
  auto decoder = [&](const std::string& view, radseg::Index w, int first,
                     radseg::Index concat) {
    int n = first;
    add(view + "_layer" + std::to_string(n++), {128, 64, 64});
    if (concat > 0) add(view + "_layer" + std::to_string(n++), {concat, 64, 64});
    const radseg::Index half = view == "ra" ? w / 2 : w;
    add(view + "_layer" + std::to_string(n++), {128, 128, half});
    add(view + "_layer" + std::to_string(n++), {128, 128, half});
    add(view + "_layer" + std::to_string(n++), {128, 256, w});
    add(view + "_layer" + std::to_string(n++), {128, 256, w});
    add(view + "_layer" + std::to_string(n++), {4, 256, w});
  };
  if (v == Variant::kMvNet) {
    encoder("rd", 64, false);
    encoder("ra", 256, false);
    add("layer6", {256, 64, 64});
    decoder("rd", 64, 7, 0);
    decoder("ra", 256, 7, 0);
    return t;
  }
  const bool ad = v != Variant::kMvaNetA;
  const radseg::Index latent = ad ? 384 : 256;
  encoder("rd", 64, true);
  if (ad) encoder("ad", 64, true);
  encoder("ra", 256, true);
  add("layer8", {latent, 64, 64});
  decoder("rd", 64, 9, latent);
  decoder("ra", 256, 9, latent);
  return t;
}

struct LayerTableReport {
  std::size_t compared = 0;
  std::size_t mismatches = 0;
  std::string first_mismatch;
  bool ok() const { return compared > 0 && mismatches == 0; }
};

inline LayerTableReport compare_layer_table(const std::vector<radseg::LayerTrace>& trace,
                                            const LayerTable& want) {
  std::map<std::string, radseg::Shape> got;
  for (const auto& l : trace) got[l.name] = l.shape;
  LayerTableReport r;
  auto miss = [&](const std::string& what) {
    if (r.mismatches++ == 0) r.first_mismatch = what;
  };
  for (const auto& [name, shape] : want) {
    ++r.compared;
    const auto it = got.find(name);
    if (it == got.end()) {
      miss(name + " missing");
    } else if (it->second != shape) {
      miss(name + " is " + radseg::to_string(it->second) + ", expected " +
           radseg::to_string(shape));
    }
  }
  if (got.size() != want.size()) {
    miss("trace has " + std::to_string(got.size()) + " layers, table " +
         std::to_string(want.size()));
  }
  return r;
}

}  // namespace radseg_test
