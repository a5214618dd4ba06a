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

#include <map>
#include <string>
#include <vector>

#include "common/fs.hpp"
#include "common/rng.hpp"

namespace dlflow::tracker {

struct Domain {
  enum class Kind { kFixed, kCategorical, kInt, kFloat };
  Kind kind = Kind::kFixed;
  json fixed;
  std::vector<json> values;  // categorical
  double lo = 0.0;           // int and float ranges; int bounds inclusive
  double hi = 0.0;
  bool log = false;

  [[nodiscard]] json to_json() const;
};

// Accepted forms per name: a scalar (fixed), a list (categorical), or
//   {"type": "categorical", "values": [...]}
//   {"type": "int", "lo": 1, "hi": 8}
//   {"type": "float", "lo": 1e-3, "hi": 1, "scale": "log"}
class HyperparameterSpace {
 public:
  HyperparameterSpace() = default;
  static HyperparameterSpace from_json(const json& j);

  [[nodiscard]] bool is_fixed() const;
  [[nodiscard]] const std::map<std::string, Domain>& domains() const noexcept { return domains_; }

  // One draw per name, in name order.
  [[nodiscard]] json sample(Rng& rng) const;
  // Cartesian product in name order, last name varying fastest. Float
  // ranges cannot be enumerated.
  [[nodiscard]] std::vector<json> grid() const;
  [[nodiscard]] json to_json() const;

 private:
  std::map<std::string, Domain> domains_;
};

}  // namespace dlflow::tracker
