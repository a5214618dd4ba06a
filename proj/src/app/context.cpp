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

#include "app/context.hpp"

#include <cstdlib>

#include "common/error.hpp"
#include "learners/learner.hpp"

namespace dlflow::app {

ContextOptions ContextOptions::from_env() {
  ContextOptions o;
  if (const char* root = std::getenv("DLFLOW_ROOT"); root != nullptr && *root != '\0') o.root = root;
  if (const char* det = std::getenv("DLFLOW_DETERMINISTIC"); det != nullptr) {
    const std::string v = det;
    o.deterministic = v == "1" || v == "true" || v == "yes";
  }
  return o;
}

Context::Context(ContextOptions options)
    : options_(std::move(options)), clock_(options_.deterministic, options_.epoch) {
  fs::create_directories(options_.root);
  if (fs::exists(options_.root / "project.json")) {
    project_ = governance::Project::from_json(read_json(options_.root / "project.json"));
  }
  store_ = std::make_unique<store::DataStore>(options_.root, clock_);
  pipelines_ = std::make_unique<pipeline::PipelineEngine>(*store_, pipeline::TransformRegistry::with_builtins());
  labels_ = std::make_unique<labels::LabelStore>(*store_);
  tracker_ = std::make_unique<tracker::ExperimentTracker>(*store_, *labels_,
                                                          learners::LearnerRegistry::with_builtins());
  registry_ = std::make_unique<registry::ModelRegistry>(
      *store_, *tracker_, project_ ? *project_ : governance::Project::standard("default"));
  gateway_ = std::make_unique<serving::Gateway>(*store_, *registry_, *tracker_);
  workflow_ = std::make_unique<workflow::WorkflowEngine>(options_.root, clock_);
}

Context::~Context() = default;

bool Context::has_project() const { return project_.has_value(); }

const governance::Project& Context::project() const {
  if (!project_) fail(ErrorCode::kNotFound, "no project; run init first");
  return *project_;
}

json Context::init_project(const governance::Project& project, const std::string& actor) {
  if (!store::is_valid_repo_name(project.name)) {
    fail(ErrorCode::kInvalidName, "invalid project name '" + project.name + "'");
  }
  write_json_atomic(options_.root / "project.json", project.to_json());
  project_ = project;
  registry_->set_project(project);
  const auto run = workflow_->start(project, actor);
  return {{"project", project.to_json()}, {"workflow", run.to_json()}};
}

json Context::commit(const std::string& repo, const std::string& branch,
                     const std::map<std::string, std::string>& files, const std::string& author,
                     const std::string& message) {
  const auto c = store_->commit_files(repo, branch, files, author, message);
  json jobs = json::array();
  for (const auto& job : pipelines_->run_pending()) jobs.push_back(job.to_json());
  json out = c.to_json();
  out["jobs"] = jobs;
  return out;
}

json Context::advance(const std::string& step, const std::string& actor, const std::string& note,
                      const json& artifacts) {
  return workflow_->advance(project(), step, actor, note, artifacts).to_json();
}

json Context::trace(const std::string& model, int version) {
  const auto v = registry_->version(model, version);
  const auto cp = tracker_->checkpoint(v.checkpoint);
  const json exp = tracker_->experiment(cp.experiment);
  const json& data = exp.at("data");

  tracker::DataSource source;
  source.repo = data.at("repo").get<std::string>();
  source.ref = data.at("commit").get<std::string>();
  source.split = data.at("split").get<std::string>();
  source.prefix = data.at("prefix").get<std::string>();
  const auto recomputed = tracker_->load_dataset(source).digest();
  const auto recorded = data.at("digest").get<std::string>();

  const auto lineage = pipelines_->lineage(data.at("commit").get<std::string>());

  json chain = json::array();
  chain.push_back({{"kind", "model-version"},
                   {"model", v.model_name},
                   {"version", v.version},
                   {"stage", registry::to_string(v.stage)}});
  chain.push_back({{"kind", "checkpoint"},
                   {"id", cp.id},
                   {"trial", cp.trial_id},
                   {"step", cp.step},
                   {"artifacts", cp.artifacts}});
  chain.push_back({{"kind", "experiment"},
                   {"id", cp.experiment},
                   {"config_hash", exp.at("config_hash")},
                   {"entry_point", exp.at("entry_point")},
                   {"source_snapshot", v.source_snapshot}});
  chain.push_back({{"kind", "dataset"},
                   {"repo", source.repo},
                   {"commit", source.ref},
                   {"split", source.split},
                   {"prefix", source.prefix},
                   {"digest", recorded},
                   {"recomputed_digest", recomputed},
                   {"digest_match", recomputed == recorded}});

  // Walk the provenance DAG breadth first from the training commit.
  std::vector<HashId> frontier{lineage.root};
  std::set<HashId> seen;
  while (!frontier.empty()) {
    std::vector<HashId> next;
    for (const auto& id : frontier) {
      if (!seen.insert(id).second) continue;
      const auto& node = lineage.nodes.at(id);
      json entry = {{"kind", "commit"},
                    {"repo", node.commit.repo},
                    {"branch", node.commit.branch},
                    {"commit", node.commit.id}};
      if (node.provenance) {
        entry["pipeline"] = node.provenance->pipeline;
        entry["spec_hash"] = node.provenance->spec_hash;
        entry["inputs"] = node.provenance->input_commits;
        for (const auto& in : node.provenance->input_commits) next.push_back(in);
      } else {
        entry["pipeline"] = nullptr;
      }
      chain.push_back(std::move(entry));
    }
    frontier = std::move(next);
  }

  return {{"model", model},
          {"version", version},
          {"chain", chain},
          {"depth", chain.size()},
          {"raw_commits", lineage.raw_commits()},
          {"spec_hashes", lineage.spec_hashes()},
          {"digest_match", recomputed == recorded},
          {"lineage", lineage.to_json()}};
}

json Context::run_use_case(const std::string& which, const UseCaseOptions& options) {
  if (which == "news") return run_news(options);
  if (which == "fashion") return run_fashion(options);
  fail(ErrorCode::kInvalidArgument, "unknown use case '" + which + "' (news|fashion)");
}

}  // namespace dlflow::app
