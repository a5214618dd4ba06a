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

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace dlflow {

// Lowercase hex SHA-256; the identity of every stored object.
using HashId = std::string;

HashId sha256_hex(std::string_view data);

bool is_hash_id(std::string_view s) noexcept;

// Streaming variant for digests over many records.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view data);
  HashId hex_digest();

 private:
  struct State;
  std::unique_ptr<State> state_;
};

// First 64 bits (big-endian) of SHA-256(le64(seed) || key).
uint64_t keyed_hash64(uint64_t seed, std::string_view key);

}  // namespace dlflow
