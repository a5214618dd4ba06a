// Copyright 2026 The dlflow Authors
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

#include "pipeline/utf8.hpp"

#include <cstdint>

namespace dlflow::pipeline {
namespace {

constexpr std::string_view kReplacement = "\xEF\xBF\xBD";

// Length of the well-formed sequence starting at i, or the length of the
// maximal ill-formed prefix (>= 1) negated.
int scan(std::string_view s, std::size_t i) {
  const auto b = [&](std::size_t k) { return static_cast<uint8_t>(s[k]); };
  const uint8_t c0 = b(i);
  if (c0 < 0x80) return 1;
  int need = 0;
  uint8_t lo = 0x80;
  uint8_t hi = 0xBF;
  if (c0 >= 0xC2 && c0 <= 0xDF) {
    need = 1;
  } else if (c0 == 0xE0) {
    need = 2;
    lo = 0xA0;
  } else if (c0 >= 0xE1 && c0 <= 0xEC) {
    need = 2;
  } else if (c0 == 0xED) {
    need = 2;
    hi = 0x9F;
  } else if (c0 >= 0xEE && c0 <= 0xEF) {
    need = 2;
  } else if (c0 == 0xF0) {
    need = 3;
    lo = 0x90;
  } else if (c0 >= 0xF1 && c0 <= 0xF3) {
    need = 3;
  } else if (c0 == 0xF4) {
    need = 3;
    hi = 0x8F;
  } else {
    return -1;
  }
  for (int k = 1; k <= need; ++k) {
    if (i + k >= s.size()) return -k;
    const uint8_t ck = b(i + k);
    const uint8_t l = (k == 1) ? lo : 0x80;
    const uint8_t h = (k == 1) ? hi : 0xBF;
    if (ck < l || ck > h) return -k;
  }
  return need + 1;
}

}  // namespace

Utf8Result sanitize_utf8(std::string_view bytes) {
  Utf8Result out;
  out.text.reserve(bytes.size());
  std::size_t i = 0;
  while (i < bytes.size()) {
    const int n = scan(bytes, i);
    if (n > 0) {
      out.text.append(bytes.substr(i, static_cast<std::size_t>(n)));
      i += static_cast<std::size_t>(n);
    } else {
      out.text.append(kReplacement);
      ++out.replacements;
      i += static_cast<std::size_t>(-n);
    }
    ++out.code_points;
  }
  return out;
}

bool is_valid_utf8(std::string_view bytes) {
  std::size_t i = 0;
  while (i < bytes.size()) {
    const int n = scan(bytes, i);
    if (n <= 0) return false;
    i += static_cast<std::size_t>(n);
  }
  return true;
}

}  // namespace dlflow::pipeline
