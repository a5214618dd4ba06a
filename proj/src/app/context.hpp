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
#include <optional>
#include <string>

#include "common/clock.hpp"
#include "common/fs.hpp"
#include "governance/project.hpp"
#include "labels/label_store.hpp"
#include "pipeline/pipeline_engine.hpp"
#include "registry/model_registry.hpp"
#include "serving/gateway.hpp"
#include "store/data_store.hpp"
#include "tracker/experiment_tracker.hpp"
#include "workflow/workflow.hpp"

namespace dlflow::app {

struct ContextOptions {
  fs::path root = ".dlflow";
  bool deterministic = false;
  int64_t epoch = Clock::kDefaultEpoch;

  // DLFLOW_ROOT and DLFLOW_DETERMINISTIC ("1", "true").
  static ContextOptions from_env();
};

struct UseCaseOptions {
  uint64_t seed = 7;
};

// Every store and service over one root directory.
class Context {
 public:
  explicit Context(ContextOptions options);
  ~Context();
  Context(const Context&) = delete;
  Context& operator=(const Context&) = delete;

  [[nodiscard]] const fs::path& root() const noexcept { return options_.root; }
  [[nodiscard]] const Clock& clock() const noexcept { return clock_; }

  store::DataStore& store() { return *store_; }
  pipeline::PipelineEngine& pipelines() { return *pipelines_; }
  labels::LabelStore& labels() { return *labels_; }
  tracker::ExperimentTracker& tracker() { return *tracker_; }
  registry::ModelRegistry& registry() { return *registry_; }
  serving::Gateway& gateway() { return *gateway_; }
  workflow::WorkflowEngine& workflow() { return *workflow_; }

  [[nodiscard]] bool has_project() const;
  [[nodiscard]] const governance::Project& project() const;
  // Persists project.json and starts the workflow run.
  json init_project(const governance::Project& project, const std::string& actor);

  // Commits files, then runs the pipelines the commit triggered.
  json commit(const std::string& repo, const std::string& branch,
              const std::map<std::string, std::string>& files, const std::string& author,
              const std::string& message);

  json advance(const std::string& step, const std::string& actor, const std::string& note = "",
               const json& artifacts = json::object());

  // model version -> checkpoint -> experiment -> data commit -> provenance DAG.
  json trace(const std::string& model, int version);

  json run_use_case(const std::string& which, const UseCaseOptions& options = {});

 private:
  json run_news(const UseCaseOptions& options);
  json run_fashion(const UseCaseOptions& options);

  ContextOptions options_;
  Clock clock_;
  std::unique_ptr<store::DataStore> store_;
  std::unique_ptr<pipeline::PipelineEngine> pipelines_;
  std::unique_ptr<labels::LabelStore> labels_;
  std::unique_ptr<tracker::ExperimentTracker> tracker_;
  std::unique_ptr<registry::ModelRegistry> registry_;
  std::unique_ptr<serving::Gateway> gateway_;
  std::unique_ptr<workflow::WorkflowEngine> workflow_;
  std::optional<governance::Project> project_;
};

}  // namespace dlflow::app
