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

#include "workflow/workflow.hpp"

#include <algorithm>

#include "common/error.hpp"
#include "store/data_store.hpp"

namespace dlflow::workflow {

using governance::Role;

const char* to_string(EdgeKind kind) noexcept {
  switch (kind) {
    case EdgeKind::kForward: return "forward";
    case EdgeKind::kSkip: return "skip";
    case EdgeKind::kFeedback: return "feedback";
  }
  return "?";
}

const StepGraph& StepGraph::standard() {
  static const StepGraph graph = [] {
    StepGraph g;
    const auto de = Role::kDataEngineer;
    const auto dl = Role::kDataLabeler;
    const auto ds = Role::kDataScientist;
    const auto mv = Role::kModelValidator;
    const auto ops = Role::kDevopsEngineer;
    const auto se = Role::kSoftwareEngineer;
    g.steps_ = {
        {kStartStep, std::nullopt, false, true},
        {"define-project-requirements", mv, false, true},
        {"initial-setup", ops, false, false},
        {"data-collection", de, false, false},
        {"data-splitting", de, true, false},
        {"data-ingestion", de, false, false},
        {"data-versioning", de, false, false},
        {"data-cleaning", de, false, false},
        {"data-validation", de, false, false},
        {"data-labeling", dl, false, false},
        {"data-analysis", ds, false, true},
        {"data-preprocessing", ds, false, false},
        {"model-data-splitting", ds, false, false},
        {"model-building", ds, false, false},
        {"hp-optimization", ds, true, false},
        {"model-training", ds, false, false},
        {"experiment-evaluation", ds, false, false},
        {"model-registration", ds, false, false},
        {"model-evaluation", ds, false, false},
        {"model-submission", ds, false, false},
        {"review", mv, false, false},
        {"model-implementation", se, false, true},
        {"implementation-review", mv, false, true},
        {"model-compression", ds, true, false},
        {"model-revision", mv, true, false},
        {"model-packaging", ops, false, false},
        {"model-deployment", ops, false, false},
        {"model-monitoring", ds, false, false},
        {kMaintenanceStep, ds, false, false},
    };
    const auto F = EdgeKind::kForward;
    const auto S = EdgeKind::kSkip;
    const auto B = EdgeKind::kFeedback;
    g.edges_ = {
        {kStartStep, "define-project-requirements", F},
        {"define-project-requirements", "initial-setup", F},
        {"initial-setup", "data-collection", F},
        // data pipeline
        {"data-collection", "data-splitting", F},
        {"data-collection", "data-ingestion", S},
        {"data-splitting", "data-ingestion", F},
        {"data-ingestion", "data-versioning", F},
        {"data-ingestion", "model-training", S},
        {"data-versioning", "data-cleaning", F},
        {"data-cleaning", "data-validation", F},
        {"data-validation", "data-collection", B},
        {"data-validation", "data-labeling", F},
        // model pipeline
        {"data-labeling", "data-analysis", F},
        {"data-analysis", "data-preprocessing", F},
        {"data-preprocessing", "model-data-splitting", F},
        {"model-data-splitting", "model-building", F},
        {"model-building", "hp-optimization", F},
        {"model-building", "model-training", S},
        {"hp-optimization", "model-training", F},
        {"model-training", "experiment-evaluation", F},
        {"experiment-evaluation", "model-building", B},
        {"experiment-evaluation", "data-analysis", B},
        {"experiment-evaluation", "model-registration", F},
        {"model-registration", "model-evaluation", F},
        {"model-evaluation", "model-building", B},
        {"model-evaluation", "model-submission", F},
        {"model-submission", "review", F},
        {"review", "model-building", B},
        {"review", "data-collection", B},
        {"review", "model-implementation", F},
        // deployment pipeline
        {"model-implementation", "implementation-review", F},
        {"implementation-review", "model-implementation", B},
        {"implementation-review", "model-compression", F},
        {"implementation-review", "model-packaging", S},
        {"model-compression", "model-revision", F},
        {"model-revision", "model-compression", B},
        {"model-revision", "model-packaging", F},
        {"model-packaging", "model-deployment", F},
        {"model-deployment", "model-monitoring", F},
        {"model-monitoring", kMaintenanceStep, F},
        {kMaintenanceStep, "data-collection", B},
        {kMaintenanceStep, "model-building", B},
        {kMaintenanceStep, "model-deployment", B},
    };
    return g;
  }();
  return graph;
}

const Step& StepGraph::step(const std::string& id) const {
  for (const auto& s : steps_) {
    if (s.id == id) return s;
  }
  fail(ErrorCode::kNotFound, "unknown workflow step " + id);
}

bool StepGraph::has_step(const std::string& id) const {
  return std::any_of(steps_.begin(), steps_.end(), [&](const Step& s) { return s.id == id; });
}

const Edge* StepGraph::edge(const std::string& from, const std::string& to) const {
  for (const auto& e : edges_) {
    if (e.from == from && e.to == to) return &e;
  }
  return nullptr;
}

std::vector<std::string> StepGraph::successors(const std::string& from) const {
  std::vector<std::string> out;
  for (const auto& e : edges_) {
    if (e.from == from) out.push_back(e.to);
  }
  return out;
}

json StepGraph::to_json() const {
  json steps = json::array();
  for (const auto& s : steps_) {
    steps.push_back({{"id", s.id},
                     {"owner", s.owner ? governance::to_string(*s.owner) : "any"},
                     {"optional", s.optional},
                     {"human_only", s.human_only}});
  }
  json edges = json::array();
  for (const auto& e : edges_) edges.push_back({{"from", e.from}, {"to", e.to}, {"kind", to_string(e.kind)}});
  return {{"steps", steps}, {"edges", edges}};
}

json HistoryEntry::to_json() const {
  json j = {{"step", step}, {"actor", actor}, {"timestamp", timestamp}, {"iteration", iteration}};
  if (!note.empty()) j["note"] = note;
  if (!artifacts.empty()) j["artifacts"] = artifacts;
  return j;
}

HistoryEntry HistoryEntry::from_json(const json& j) {
  HistoryEntry h;
  h.step = j.at("step").get<std::string>();
  h.actor = j.at("actor").get<std::string>();
  h.timestamp = j.at("timestamp").get<int64_t>();
  h.iteration = j.at("iteration").get<int>();
  h.note = j.value("note", std::string());
  h.artifacts = j.value("artifacts", json::object());
  return h;
}

json WorkflowRun::to_json() const {
  json h = json::array();
  for (const auto& e : history) h.push_back(e.to_json());
  return {{"project", project}, {"iteration", iteration}, {"current_step", current_step}, {"history", h}};
}

WorkflowRun WorkflowRun::from_json(const json& j) {
  WorkflowRun r;
  r.project = j.at("project").get<std::string>();
  r.iteration = j.at("iteration").get<int>();
  r.current_step = j.at("current_step").get<std::string>();
  for (const auto& e : j.at("history")) r.history.push_back(HistoryEntry::from_json(e));
  return r;
}

WorkflowEngine::WorkflowEngine(fs::path root, Clock clock) : root_(std::move(root)), clock_(clock) {}

fs::path WorkflowEngine::path_for(const std::string& project) const {
  if (!store::is_valid_repo_name(project)) fail(ErrorCode::kInvalidName, "invalid project name '" + project + "'");
  return root_ / "workflow" / (project + ".json");
}

bool WorkflowEngine::has_run(const std::string& project) const { return fs::exists(path_for(project)); }

WorkflowRun WorkflowEngine::run(const std::string& project) const {
  const auto p = path_for(project);
  if (!fs::exists(p)) fail(ErrorCode::kNotFound, "no workflow run for project " + project);
  return WorkflowRun::from_json(read_json(p));
}

WorkflowRun WorkflowEngine::start(const governance::Project& project, const std::string& actor) {
  const auto p = path_for(project.name);
  fs::create_directories(p.parent_path());
  FileLock lock(p.string() + ".lock");
  if (fs::exists(p)) return WorkflowRun::from_json(read_json(p));
  if (!actor.empty()) (void)project.role_of(actor);
  WorkflowRun r;
  r.project = project.name;
  r.history.push_back({kStartStep, actor, clock_.now(), 1, "", json::object()});
  write_json_atomic(p, r.to_json());
  return r;
}

WorkflowRun WorkflowEngine::advance(const governance::Project& project, const std::string& step,
                                    const std::string& actor, const std::string& note, const json& artifacts) {
  const auto& graph = StepGraph::standard();
  const Step& target = graph.step(step);
  const auto p = path_for(project.name);
  FileLock lock(p.string() + ".lock");
  if (!fs::exists(p)) fail(ErrorCode::kNotFound, "no workflow run for project " + project.name);
  WorkflowRun r = WorkflowRun::from_json(read_json(p));
  if (graph.edge(r.current_step, step) == nullptr) {
    fail(ErrorCode::kIllegalTransition, "no edge " + r.current_step + " -> " + step);
  }
  if (target.owner) project.require(actor, {*target.owner}, "perform " + step);
  if (r.current_step == kMaintenanceStep) ++r.iteration;
  r.current_step = step;
  r.history.push_back({step, actor, clock_.now(), r.iteration, note, artifacts});
  write_json_atomic(p, r.to_json());
  return r;
}

}  // namespace dlflow::workflow
