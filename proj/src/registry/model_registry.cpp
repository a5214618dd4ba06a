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

#include "registry/model_registry.hpp"

#include <algorithm>

#include "common/error.hpp"

namespace dlflow::registry {

using governance::Role;

const char* to_string(Stage stage) noexcept {
  switch (stage) {
    case Stage::kRegistered: return "registered";
    case Stage::kSubmitted: return "submitted";
    case Stage::kApproved: return "approved";
    case Stage::kProduction: return "production";
    case Stage::kRejected: return "rejected";
  }
  return "?";
}

Stage parse_stage(const std::string& s) {
  for (Stage st : {Stage::kRegistered, Stage::kSubmitted, Stage::kApproved, Stage::kProduction,
                   Stage::kRejected}) {
    if (s == to_string(st)) return st;
  }
  fail(ErrorCode::kInvalidArgument, "unknown stage " + s);
}

bool is_allowed_transition(Stage from, Stage to) noexcept {
  switch (from) {
    case Stage::kRegistered: return to == Stage::kSubmitted;
    case Stage::kSubmitted: return to == Stage::kApproved || to == Stage::kRejected;
    case Stage::kApproved: return to == Stage::kProduction;
    case Stage::kProduction:
    case Stage::kRejected: return false;
  }
  return false;
}

json StageEvent::to_json() const {
  json j = {{"from", to_string(from)}, {"to", to_string(to)}, {"actor", actor}, {"at", at}};
  if (!note.empty()) j["note"] = note;
  if (automatic) j["automatic"] = true;
  return j;
}

StageEvent StageEvent::from_json(const json& j) {
  StageEvent e;
  e.from = parse_stage(j.at("from").get<std::string>());
  e.to = parse_stage(j.at("to").get<std::string>());
  e.actor = j.at("actor").get<std::string>();
  e.at = j.at("at").get<int64_t>();
  e.note = j.value("note", std::string());
  e.automatic = j.value("automatic", false);
  return e;
}

json ModelVersion::to_json() const {
  json m = json::object();
  for (const auto& [k, v] : metrics) m[k] = v;
  json h = json::array();
  for (const auto& e : history) h.push_back(e.to_json());
  json j = {{"model_name", model_name},
            {"version", version},
            {"checkpoint", checkpoint},
            {"experiment", experiment},
            {"source_snapshot", source_snapshot},
            {"dependencies", dependencies},
            {"metadata", {{"creator", creator}, {"created_at", created_at}, {"description", description}}},
            {"metrics", m},
            {"stage", to_string(stage)},
            {"history", h}};
  if (reviewer) j["reviewer"] = *reviewer;
  return j;
}

ModelVersion ModelVersion::from_json(const json& j) {
  ModelVersion v;
  v.model_name = j.at("model_name").get<std::string>();
  v.version = j.at("version").get<int>();
  v.checkpoint = j.at("checkpoint").get<std::string>();
  v.experiment = j.at("experiment").get<std::string>();
  v.source_snapshot = j.at("source_snapshot").get<std::string>();
  v.dependencies = j.at("dependencies").get<std::vector<std::string>>();
  const auto& md = j.at("metadata");
  v.creator = md.at("creator").get<std::string>();
  v.created_at = md.at("created_at").get<int64_t>();
  v.description = md.value("description", std::string());
  for (const auto& [k, val] : j.at("metrics").items()) v.metrics[k] = val.get<double>();
  v.stage = parse_stage(j.at("stage").get<std::string>());
  for (const auto& e : j.at("history")) v.history.push_back(StageEvent::from_json(e));
  if (j.contains("reviewer")) v.reviewer = j.at("reviewer").get<std::string>();
  return v;
}

ModelRegistry::ModelRegistry(store::DataStore& store, const tracker::ExperimentTracker& tracker,
                             governance::Project project)
    : store_(store), tracker_(tracker), project_(std::move(project)) {}

void ModelRegistry::set_project(governance::Project project) {
  std::lock_guard lk(mu_);
  project_ = std::move(project);
}

void ModelRegistry::add_listener(EventListener listener) {
  std::lock_guard lk(mu_);
  listeners_.push_back(std::move(listener));
}

fs::path ModelRegistry::model_dir(const std::string& name) const {
  if (!store::is_valid_repo_name(name)) fail(ErrorCode::kInvalidName, "invalid model name '" + name + "'");
  return store_.root() / "models" / name;
}

void ModelRegistry::write_version(const ModelVersion& v) const {
  write_json_atomic(model_dir(v.model_name) / "versions" / (std::to_string(v.version) + ".json"), v.to_json());
}

void ModelRegistry::transition(ModelVersion& v, Stage to, const std::string& actor, const std::string& note,
                               bool automatic) {
  StageEvent e{v.stage, to, actor, store_.clock().now(), note, automatic};
  v.stage = to;
  v.history.push_back(e);
  json line = e.to_json();
  line["version"] = v.version;
  append_line(model_dir(v.model_name) / "history.jsonl", line.dump());
  write_version(v);
}

HashId ModelRegistry::capture_workspace(const std::string& name, const std::string& experiment,
                                        const std::string& creator) {
  store_.ensure_repo(kWorkspaceRepo);
  const json exp = tracker_.experiment(experiment);
  const std::string base = name + "/" + experiment + "/";
  std::map<std::string, std::string> files = {
      {base + "experiment.json", exp.at("config").dump(2) + "\n"},
      {base + "entry_point", exp.at("entry_point").get<std::string>() + "\n"},
  };
  store::DataStore::CommitOptions opts;
  opts.overlay = true;
  opts.notify = false;
  return store_.commit_files(kWorkspaceRepo, store::DataStore::kDefaultBranch, files, creator,
                             "model source for " + name + " from " + experiment, opts)
      .id;
}

ModelVersion ModelRegistry::register_model(const Registration& reg) {
  project_.require(reg.creator, {Role::kDataScientist}, "register models");
  const auto dir = model_dir(reg.name);
  const auto cp = tracker_.checkpoint(reg.checkpoint);
  if (!reg.experiment.empty() && reg.experiment != cp.experiment) {
    fail(ErrorCode::kMissingCheckpoint, "checkpoint " + reg.checkpoint + " does not belong to " + reg.experiment);
  }
  for (const auto& [artifact, blob] : cp.artifacts) {
    if (!store_.objects().contains(blob)) fail(ErrorCode::kMissingArtifact, "artifact " + artifact + " is missing");
  }

  std::lock_guard lk(mu_);
  fs::create_directories(dir / "versions");
  FileLock lock(dir / ".lock");
  HashId snapshot = reg.source_snapshot;
  if (snapshot.empty()) {
    snapshot = capture_workspace(reg.name, cp.experiment, reg.creator);
  } else {
    snapshot = store_.resolve(kWorkspaceRepo, snapshot).id;
  }
  int next = 1;
  while (fs::exists(dir / "versions" / (std::to_string(next) + ".json"))) ++next;

  ModelVersion v;
  v.model_name = reg.name;
  v.version = next;
  v.checkpoint = cp.id;
  v.experiment = cp.experiment;
  v.source_snapshot = snapshot;
  v.dependencies = reg.dependencies;
  if (v.dependencies.empty()) v.dependencies.push_back("learner:" + tracker_.experiment(cp.experiment).at("entry_point").get<std::string>());
  v.creator = reg.creator;
  v.created_at = store_.clock().now();
  v.description = reg.description;
  v.metrics = cp.metrics;
  write_version(v);
  append_line(dir / "history.jsonl",
              json{{"version", v.version}, {"to", "registered"}, {"actor", reg.creator}, {"at", v.created_at}}.dump());
  return v;
}

ModelVersion ModelRegistry::attach_test_metrics(const std::string& name, int version_no,
                                                const tracker::Metrics& metrics) {
  std::lock_guard lk(mu_);
  FileLock lock(model_dir(name) / ".lock");
  auto v = version(name, version_no);
  if (v.stage != Stage::kRegistered) {
    fail(ErrorCode::kWrongStage, "test metrics can only be attached in stage registered, not " +
                                     std::string(to_string(v.stage)));
  }
  for (const auto& [k, val] : metrics) {
    if (k.rfind("test_", 0) != 0) fail(ErrorCode::kInvalidArgument, "test metric names start with test_: " + k);
  }
  for (const auto& [k, val] : metrics) v.metrics[k] = val;
  write_version(v);
  return v;
}

ModelVersion ModelRegistry::submit(const std::string& name, int version_no, const std::string& actor) {
  project_.require(actor, {Role::kDataScientist}, "submit models");
  std::lock_guard lk(mu_);
  FileLock lock(model_dir(name) / ".lock");
  auto v = version(name, version_no);
  if (v.stage != Stage::kRegistered) {
    fail(ErrorCode::kWrongStage, "only registered versions can be submitted; stage is " +
                                     std::string(to_string(v.stage)));
  }
  const auto& gate = project_.gate_for(name);
  auto it = v.metrics.find(gate.metric);
  if (it == v.metrics.end()) fail(ErrorCode::kMissingTestMetrics, "missing test metric " + gate.metric);
  if (!gate.passes(it->second)) {
    fail(ErrorCode::kGateFailed, gate.metric + " = " + std::to_string(it->second) + " does not meet " +
                                     (gate.maximize ? ">= " : "<= ") + std::to_string(gate.threshold));
  }
  transition(v, Stage::kSubmitted, actor, "");
  return v;
}

ModelVersion ModelRegistry::review(const std::string& name, int version_no, bool approve,
                                   const std::string& reviewer, const std::string& note) {
  std::lock_guard lk(mu_);
  FileLock lock(model_dir(name) / ".lock");
  auto v = version(name, version_no);
  if (reviewer == v.creator) fail(ErrorCode::kSelfReviewDenied, reviewer + " created this version");
  project_.require(reviewer, {Role::kModelValidator}, "review models");
  if (v.stage != Stage::kSubmitted) {
    fail(ErrorCode::kWrongStage, "only submitted versions can be reviewed; stage is " +
                                     std::string(to_string(v.stage)));
  }
  v.reviewer = reviewer;
  transition(v, approve ? Stage::kApproved : Stage::kRejected, reviewer, note);
  return v;
}

ModelVersion ModelRegistry::promote_to_production(const std::string& name, int version_no,
                                                  const std::string& actor) {
  project_.require(actor, {Role::kDevopsEngineer, Role::kModelValidator}, "promote models");
  json event;
  std::vector<EventListener> listeners;
  ModelVersion v;
  {
    std::lock_guard lk(mu_);
    FileLock lock(model_dir(name) / ".lock");
    v = version(name, version_no);
    if (v.stage != Stage::kApproved) {
      fail(ErrorCode::kWrongStage, "only approved versions can be promoted; stage is " +
                                       std::string(to_string(v.stage)));
    }
    for (auto& other : versions(name)) {
      if (other.stage == Stage::kProduction) {
        transition(other, Stage::kApproved, actor, "replaced by version " + std::to_string(version_no), true);
      }
    }
    transition(v, Stage::kProduction, actor, "");
    const auto seq = events(name).size() + 1;
    event = {{"type", "deployment-trigger"}, {"seq", seq},   {"model_name", name},
             {"version", version_no},        {"actor", actor}, {"at", store_.clock().now()}};
    append_line(model_dir(name) / "events.jsonl", event.dump());
    listeners = listeners_;
  }
  for (const auto& l : listeners) l(event);
  return v;
}

ModelVersion ModelRegistry::version(const std::string& name, int version_no) const {
  const auto p = model_dir(name) / "versions" / (std::to_string(version_no) + ".json");
  if (!fs::exists(p)) fail(ErrorCode::kNotFound, "no version " + std::to_string(version_no) + " of model " + name);
  return ModelVersion::from_json(read_json(p));
}

std::vector<ModelVersion> ModelRegistry::versions(const std::string& name) const {
  const auto dir = model_dir(name) / "versions";
  if (!fs::exists(dir)) fail(ErrorCode::kNotFound, "no model " + name);
  std::vector<ModelVersion> out;
  for (int v = 1; fs::exists(dir / (std::to_string(v) + ".json")); ++v) out.push_back(version(name, v));
  return out;
}

std::vector<std::string> ModelRegistry::models() const {
  std::vector<std::string> out;
  const auto dir = store_.root() / "models";
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory() && fs::exists(e.path() / "versions" / "1.json")) {
      out.push_back(e.path().filename().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<ModelVersion> ModelRegistry::production(const std::string& name) const {
  for (auto& v : versions(name)) {
    if (v.stage == Stage::kProduction) return v;
  }
  return std::nullopt;
}

std::vector<json> ModelRegistry::history(const std::string& name) const {
  return read_jsonl(model_dir(name) / "history.jsonl");
}

std::vector<json> ModelRegistry::events(const std::string& name) const {
  return read_jsonl(model_dir(name) / "events.jsonl");
}

}  // namespace dlflow::registry
