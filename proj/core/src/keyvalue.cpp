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

#include "radseg/keyvalue.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

RADSEG_NAMESPACE_BEGIN

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& text, const std::string& key) {
  T v{};
  const char* first = text.data();
  const char* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw DataError("invalid value '" + text + "' for key '" + key + "'");
  }
  return v;
}

}  // namespace

KeyValues parse_key_values(const std::string& text, const std::string& origin) {
  KeyValues kv;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw DataError(origin + ":" + std::to_string(lineno) +
                      ": expected key=value");
    }
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) {
      throw DataError(origin + ":" + std::to_string(lineno) + ": empty key");
    }
    if (kv.count(key)) {
      throw DataError(origin + ":" + std::to_string(lineno) +
                      ": duplicate key '" + key + "'");
    }
    kv[key] = trim(t.substr(eq + 1));
  }
  return kv;
}

KeyValues read_key_values(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_key_values(ss.str(), path);
}

void write_key_values(const std::string& path, const KeyValues& kv) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot open " + path + " for writing");
  for (const auto& [k, v] : kv) os << k << '=' << v << '\n';
  if (!os) throw DataError("write failed for " + path);
}

const std::string& kv_get(const KeyValues& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw DataError("missing key '" + key + "'");
  return it->second;
}

double kv_double(const KeyValues& kv, const std::string& key) {
  return parse_number<double>(kv_get(kv, key), key);
}

Index kv_index(const KeyValues& kv, const std::string& key) {
  return parse_number<Index>(kv_get(kv, key), key);
}

std::uint64_t kv_u64(const KeyValues& kv, const std::string& key) {
  return parse_number<std::uint64_t>(kv_get(kv, key), key);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

RADSEG_NAMESPACE_END
