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

#include <map>
#include <string>

#include "radseg/config.hpp"

RADSEG_NAMESPACE_BEGIN

// Plain-text "key=value" files. Blank lines and lines starting with '#' are
// ignored; surrounding whitespace is trimmed.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text, const std::string& origin);
KeyValues read_key_values(const std::string& path);
void write_key_values(const std::string& path, const KeyValues& kv);

// Typed lookups; missing keys and malformed values raise DataError.
const std::string& kv_get(const KeyValues& kv, const std::string& key);
double kv_double(const KeyValues& kv, const std::string& key);
Index kv_index(const KeyValues& kv, const std::string& key);
std::uint64_t kv_u64(const KeyValues& kv, const std::string& key);

// Round-trip exact text for a double.
std::string format_double(double v);

RADSEG_NAMESPACE_END
