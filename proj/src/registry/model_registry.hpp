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
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "common/fs.hpp"
#include "governance/project.hpp"
#include "store/data_store.hpp"
#include "tracker/experiment_tracker.hpp"

namespace dlflow::registry {

enum class Stage { kRegistered, kSubmitted, kApproved, kProduction, kRejected };

const char* to_string(Stage stage) noexcept;
Stage parse_stage(const std::string& s);

// Edges an actor may request: registered->submitted,
// submitted->approved|rejected, approved->production. Rejected is terminal.
bool is_allowed_transition(Stage from, Stage to) noexcept;

struct StageEvent {
  Stage from = Stage::kRegistered;
  Stage to = Stage::kRegistered;
  std::string actor;
  int64_t at = 0;
  std::string note;
  // Demotion of the previous production version, caused by a promotion.
  bool automatic = false;

  [[nodiscard]] json to_json() const;
  static StageEvent from_json(const json& j);
};

struct ModelVersion {
  std::string model_name;
  int version = 0;
  std::string checkpoint;
  std::string experiment;
  HashId source_snapshot;
  std::vector<std::string> dependencies;
  std::string creator;
  int64_t created_at = 0;
  std::string description;
  tracker::Metrics metrics;
  Stage stage = Stage::kRegistered;
  std::vector<StageEvent> history;
  std::optional<std::string> reviewer;

  [[nodiscard]] json to_json() const;
  static ModelVersion from_json(const json& j);
};

// Role-gated model lifecycle.
//
// On-disk layout under the root:
//   models/<name>/versions/<v>.json   current state of each version
//   models/<name>/history.jsonl       every stage transition
//   models/<name>/events.jsonl        deployment triggers
class ModelRegistry {
 public:
  static constexpr const char* kWorkspaceRepo = "_workspace";
  using EventListener = std::function<void(const json& event)>;

  ModelRegistry(store::DataStore& store, const tracker::ExperimentTracker& tracker,
                governance::Project project);

  struct Registration {
    std::string name;
    std::string checkpoint;
    std::string experiment;  // defaults to the checkpoint's experiment
    // Commit in the workspace repo; captured from the experiment when empty.
    std::string source_snapshot;
    std::string creator;
    std::string description;
    std::vector<std::string> dependencies;
  };

  ModelVersion register_model(const Registration& reg);
  ModelVersion attach_test_metrics(const std::string& name, int version, const tracker::Metrics& metrics);
  ModelVersion submit(const std::string& name, int version, const std::string& actor);
  ModelVersion review(const std::string& name, int version, bool approve, const std::string& reviewer,
                      const std::string& note = "");
  ModelVersion promote_to_production(const std::string& name, int version, const std::string& actor);

  [[nodiscard]] ModelVersion version(const std::string& name, int version) const;
  [[nodiscard]] std::vector<ModelVersion> versions(const std::string& name) const;
  [[nodiscard]] std::vector<std::string> models() const;
  [[nodiscard]] std::optional<ModelVersion> production(const std::string& name) const;
  [[nodiscard]] std::vector<json> history(const std::string& name) const;
  [[nodiscard]] std::vector<json> events(const std::string& name) const;

  void add_listener(EventListener listener);
  void set_project(governance::Project project);
  [[nodiscard]] const governance::Project& project() const noexcept { return project_; }

 private:
  [[nodiscard]] fs::path model_dir(const std::string& name) const;
  void write_version(const ModelVersion& v) const;
  void transition(ModelVersion& v, Stage to, const std::string& actor, const std::string& note,
                  bool automatic = false);
  HashId capture_workspace(const std::string& name, const std::string& experiment,
                           const std::string& creator);

  store::DataStore& store_;
  const tracker::ExperimentTracker& tracker_;
  governance::Project project_;
  mutable std::mutex mu_;
  std::vector<EventListener> listeners_;
};

}  // namespace dlflow::registry
