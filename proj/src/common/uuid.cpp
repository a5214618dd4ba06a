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

#include "common/uuid.hpp"

#include <random>

#include "common/hash.hpp"

namespace dlflow {
namespace {

std::string format_uuid(std::string hex) {
  // version nibble and variant bits
  hex[12] = '8';
  static constexpr char kVariant[] = "89ab";
  const int v = (hex[16] >= 'a') ? hex[16] - 'a' + 10 : hex[16] - '0';
  hex[16] = kVariant[v & 0x3];
  return hex.substr(0, 8) + "-" + hex.substr(8, 4) + "-" + hex.substr(12, 4) +
         "-" + hex.substr(16, 4) + "-" + hex.substr(20, 12);
}

}  // namespace

std::string uuid_from_name(std::string_view name) {
  return format_uuid(sha256_hex(name).substr(0, 32));
}

std::string random_uuid() {
  static thread_local std::random_device rd;
  std::string seed;
  for (int i = 0; i < 8; ++i) seed += std::to_string(rd()) + ":";
  std::string hex = sha256_hex(seed).substr(0, 32);
  hex[12] = '4';
  static constexpr char kVariant[] = "89ab";
  const int v = (hex[16] >= 'a') ? hex[16] - 'a' + 10 : hex[16] - '0';
  hex[16] = kVariant[v & 0x3];
  return hex.substr(0, 8) + "-" + hex.substr(8, 4) + "-" + hex.substr(12, 4) +
         "-" + hex.substr(16, 4) + "-" + hex.substr(20, 12);
}

}  // namespace dlflow
