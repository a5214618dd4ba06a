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
#include <optional>
#include <string>
#include <vector>

#include "common/clock.hpp"
#include "common/fs.hpp"
#include "governance/project.hpp"

namespace dlflow::workflow {

struct Step {
  std::string id;
  std::optional<governance::Role> owner;  // empty: any actor
  bool optional = false;
  // Recorded with actor, time and a note; no computation attached.
  bool human_only = false;
};

enum class EdgeKind { kForward, kSkip, kFeedback };

struct Edge {
  std::string from;
  std::string to;
  EdgeKind kind = EdgeKind::kForward;
};

const char* to_string(EdgeKind kind) noexcept;

class StepGraph {
 public:
  // The lifecycle graph: data, model and deployment pipelines plus the
  // feedback loops between them.
  static const StepGraph& standard();

  [[nodiscard]] const std::vector<Step>& steps() const noexcept { return steps_; }
  [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }
  [[nodiscard]] const Step& step(const std::string& id) const;
  [[nodiscard]] bool has_step(const std::string& id) const;
  [[nodiscard]] const Edge* edge(const std::string& from, const std::string& to) const;
  [[nodiscard]] std::vector<std::string> successors(const std::string& from) const;

  [[nodiscard]] json to_json() const;

 private:
  std::vector<Step> steps_;
  std::vector<Edge> edges_;
};

inline constexpr const char* kStartStep = "project-start";
inline constexpr const char* kMaintenanceStep = "model-maintenance";

struct HistoryEntry {
  std::string step;
  std::string actor;
  int64_t timestamp = 0;
  int iteration = 1;
  std::string note;
  json artifacts = json::object();

  [[nodiscard]] json to_json() const;
  static HistoryEntry from_json(const json& j);
};

struct WorkflowRun {
  std::string project;
  int iteration = 1;
  std::string current_step = kStartStep;
  std::vector<HistoryEntry> history;

  [[nodiscard]] json to_json() const;
  static WorkflowRun from_json(const json& j);
};

// Per-project runs persisted at workflow/<project>.json.
class WorkflowEngine {
 public:
  WorkflowEngine(fs::path root, Clock clock);

  // Starts a run at project-start; an existing run is kept.
  WorkflowRun start(const governance::Project& project, const std::string& actor);
  [[nodiscard]] bool has_run(const std::string& project) const;
  [[nodiscard]] WorkflowRun run(const std::string& project) const;

  // Moves along one graph edge. Leaving model-maintenance starts a new
  // iteration.
  WorkflowRun advance(const governance::Project& project, const std::string& step,
                      const std::string& actor, const std::string& note = "",
                      const json& artifacts = json::object());

 private:
  [[nodiscard]] fs::path path_for(const std::string& project) const;

  fs::path root_;
  Clock clock_;
};

}  // namespace dlflow::workflow
