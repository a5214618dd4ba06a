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
#include <optional>
#include <string>
#include <vector>

#include "common/fs.hpp"

namespace dlflow::governance {

enum class Role {
  kDataEngineer,
  kDataLabeler,
  kDataScientist,
  kModelValidator,
  kDevopsEngineer,
  kSoftwareEngineer,
};

const char* to_string(Role role) noexcept;
Role parse_role(const std::string& s);
const std::vector<Role>& all_roles();

// Submission gate: `metric` must reach `threshold` (inclusive).
struct Gate {
  std::string metric = "test_accuracy";
  double threshold = 0.7;
  bool maximize = true;

  [[nodiscard]] bool passes(double value) const {
    return maximize ? value >= threshold : value <= threshold;
  }
  [[nodiscard]] json to_json() const;
  static Gate from_json(const json& j);
};

// Actors, their roles and per-model gates. Identity is asserted by the
// caller; there is no authentication.
struct Project {
  std::string name = "default";
  std::map<std::string, Role> actors;
  Gate default_gate;
  std::map<std::string, Gate> gates;  // per model name

  [[nodiscard]] Role role_of(const std::string& actor) const;
  [[nodiscard]] bool has_role(const std::string& actor, Role role) const;
  // Throws permission-denied unless the actor holds one of the roles.
  void require(const std::string& actor, std::initializer_list<Role> roles,
               const std::string& action) const;
  [[nodiscard]] const Gate& gate_for(const std::string& model) const;

  [[nodiscard]] json to_json() const;
  static Project from_json(const json& j);
  // One actor per role, used by the scripted use cases.
  static Project standard(const std::string& name);
};

}  // namespace dlflow::governance
