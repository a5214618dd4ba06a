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

#include "governance/project.hpp"

#include <algorithm>

#include "common/error.hpp"

namespace dlflow::governance {

const char* to_string(Role role) noexcept {
  switch (role) {
    case Role::kDataEngineer: return "data-engineer";
    case Role::kDataLabeler: return "data-labeler";
    case Role::kDataScientist: return "data-scientist";
    case Role::kModelValidator: return "model-validator";
    case Role::kDevopsEngineer: return "devops-engineer";
    case Role::kSoftwareEngineer: return "software-engineer";
  }
  return "?";
}

const std::vector<Role>& all_roles() {
  static const std::vector<Role> roles = {Role::kDataEngineer,    Role::kDataLabeler,
                                          Role::kDataScientist,   Role::kModelValidator,
                                          Role::kDevopsEngineer,  Role::kSoftwareEngineer};
  return roles;
}

Role parse_role(const std::string& s) {
  for (Role r : all_roles()) {
    if (s == to_string(r)) return r;
  }
  fail(ErrorCode::kInvalidConfig, "unknown role " + s);
}

json Gate::to_json() const {
  return {{"metric", metric}, {"threshold", threshold}, {"direction", maximize ? "max" : "min"}};
}

Gate Gate::from_json(const json& j) {
  Gate g;
  g.metric = j.value("metric", g.metric);
  g.threshold = j.value("threshold", g.threshold);
  const auto dir = j.value("direction", std::string("max"));
  if (dir != "max" && dir != "min") fail(ErrorCode::kInvalidConfig, "gate direction must be min or max");
  g.maximize = dir == "max";
  if (g.metric.rfind("test_", 0) != 0) fail(ErrorCode::kInvalidConfig, "gate metric must be a test_ metric");
  return g;
}

Role Project::role_of(const std::string& actor) const {
  auto it = actors.find(actor);
  if (it == actors.end()) fail(ErrorCode::kPermissionDenied, "unknown actor " + actor);
  return it->second;
}

bool Project::has_role(const std::string& actor, Role role) const {
  auto it = actors.find(actor);
  return it != actors.end() && it->second == role;
}

void Project::require(const std::string& actor, std::initializer_list<Role> roles,
                      const std::string& action) const {
  const Role r = role_of(actor);
  if (std::find(roles.begin(), roles.end(), r) != roles.end()) return;
  std::string need;
  for (Role x : roles) need += (need.empty() ? "" : " or ") + std::string(to_string(x));
  fail(ErrorCode::kPermissionDenied,
       actor + " (" + to_string(r) + ") may not " + action + "; requires " + need);
}

const Gate& Project::gate_for(const std::string& model) const {
  auto it = gates.find(model);
  return it == gates.end() ? default_gate : it->second;
}

json Project::to_json() const {
  json a = json::object();
  for (const auto& [id, r] : actors) a[id] = to_string(r);
  json g = json::object();
  for (const auto& [m, gate] : gates) g[m] = gate.to_json();
  return {{"project", name}, {"actors", a}, {"gate", default_gate.to_json()}, {"gates", g}};
}

Project Project::from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::kInvalidConfig, "project config must be a map");
  Project p;
  p.name = j.value("project", p.name);
  if (j.contains("actors")) {
    const auto& a = j.at("actors");
    if (a.is_object()) {
      for (const auto& [id, role] : a.items()) p.actors[id] = parse_role(role.get<std::string>());
    } else if (a.is_array()) {
      for (const auto& row : a) {
        const auto id = row.at("id").get<std::string>();
        if (p.actors.contains(id)) fail(ErrorCode::kInvalidConfig, "actor " + id + " listed twice");
        p.actors[id] = parse_role(row.at("role").get<std::string>());
      }
    } else {
      fail(ErrorCode::kInvalidConfig, "actors must be a map or a list");
    }
  }
  if (j.contains("gate")) p.default_gate = Gate::from_json(j.at("gate"));
  if (j.contains("gates")) {
    for (const auto& [m, g] : j.at("gates").items()) p.gates[m] = Gate::from_json(g);
  }
  return p;
}

Project Project::standard(const std::string& name) {
  Project p;
  p.name = name;
  p.actors = {{"dana", Role::kDataEngineer},    {"lee", Role::kDataLabeler},
              {"sam", Role::kDataScientist},    {"val", Role::kModelValidator},
              {"ops", Role::kDevopsEngineer},   {"sol", Role::kSoftwareEngineer}};
  return p;
}

}  // namespace dlflow::governance
