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

#include "pipeline/pipeline_engine.hpp"

#include <algorithm>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>

#include "common/error.hpp"

namespace dlflow::pipeline {

json ResourceHints::to_json() const {
  return json{{"cpu", cpu}, {"memory", memory}, {"gpu", gpu}};
}

ResourceHints ResourceHints::from_json(const json& j) {
  ResourceHints r;
  r.cpu = j.value("cpu", int64_t{1});
  r.memory = j.value("memory", int64_t{0});
  r.gpu = j.value("gpu", int64_t{0});
  if (r.cpu < 0 || r.memory < 0 || r.gpu < 0) {
    fail(ErrorCode::kInvalidConfig, "resource hints must be non-negative");
  }
  return r;
}

json PipelineSpec::to_json() const {
  json in = json::array();
  for (const auto& i : inputs) in.push_back({{"repo", i.repo}, {"branch", i.branch}});
  return json{{"name", name},
              {"inputs", in},
              {"transform", transform},
              {"params", params},
              {"trigger", trigger == Trigger::kOnCommit ? "on-commit" : "manual"},
              {"resources", resources.to_json()}};
}

HashId PipelineSpec::spec_hash() const { return sha256_hex(canonical(to_json())); }

PipelineSpec PipelineSpec::from_json(const json& j) {
  try {
    PipelineSpec s;
    s.name = j.at("name").get<std::string>();
    for (const auto& i : j.at("inputs")) {
      PipelineInput in;
      if (i.is_string()) {
        // "repo@branch" shorthand
        const std::string v = i.get<std::string>();
        const auto at = v.find('@');
        in.repo = v.substr(0, at);
        if (at != std::string::npos) in.branch = v.substr(at + 1);
      } else {
        in.repo = i.at("repo").get<std::string>();
        in.branch = i.value("branch", std::string(store::DataStore::kDefaultBranch));
      }
      s.inputs.push_back(std::move(in));
    }
    const json& t = j.at("transform");
    if (t.is_object()) {
      s.transform = t.at("id").get<std::string>();
      if (t.contains("params")) s.params = t.at("params");
    } else {
      s.transform = t.get<std::string>();
    }
    if (j.contains("params")) s.params = j.at("params");
    if (!s.params.is_object()) fail(ErrorCode::kInvalidConfig, "params must be an object");
    const std::string trig = j.value("trigger", std::string("manual"));
    if (trig == "on-commit") {
      s.trigger = Trigger::kOnCommit;
    } else if (trig == "manual") {
      s.trigger = Trigger::kManual;
    } else {
      fail(ErrorCode::kInvalidConfig, "trigger must be on-commit or manual");
    }
    if (j.contains("resources")) s.resources = ResourceHints::from_json(j.at("resources"));
    return s;
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidConfig, std::string("invalid pipeline spec: ") + e.what());
  }
}

const char* to_string(JobStatus status) noexcept {
  switch (status) {
    case JobStatus::kPending: return "pending";
    case JobStatus::kRunning: return "running";
    case JobStatus::kSucceeded: return "succeeded";
    case JobStatus::kFailed: return "failed";
  }
  return "?";
}

json Job::to_json() const {
  return json{{"id", id},
              {"pipeline", pipeline},
              {"spec_hash", spec_hash},
              {"input_commits", input_commits},
              {"output_commit", output_commit ? json(*output_commit) : json(nullptr)},
              {"status", to_string(status)},
              {"log", log},
              {"reused", reused}};
}

json ProvenanceRecord::to_json() const {
  return json{{"output_commit", output_commit},
              {"spec_hash", spec_hash},
              {"pipeline", pipeline},
              {"input_commits", input_commits}};
}

ProvenanceRecord ProvenanceRecord::from_json(const json& j) {
  ProvenanceRecord r;
  r.output_commit = j.at("output_commit").get<std::string>();
  r.spec_hash = j.at("spec_hash").get<std::string>();
  r.pipeline = j.value("pipeline", "");
  r.input_commits = j.at("input_commits").get<std::vector<std::string>>();
  return r;
}

std::vector<HashId> Lineage::raw_commits() const {
  std::vector<HashId> out;
  for (const auto& [id, node] : nodes) {
    if (!node.provenance) out.push_back(id);
  }
  return out;
}

std::vector<HashId> Lineage::spec_hashes() const {
  std::set<HashId> s;
  for (const auto& [id, node] : nodes) {
    if (node.provenance) s.insert(node.provenance->spec_hash);
  }
  return {s.begin(), s.end()};
}

json Lineage::to_json() const {
  json ns = json::array();
  json edges = json::array();
  for (const auto& [id, node] : nodes) {
    json n{{"commit", id},
           {"repo", node.commit.repo},
           {"branch", node.commit.branch},
           {"spec_hash", node.provenance ? json(node.provenance->spec_hash) : json(nullptr)},
           {"pipeline", node.provenance ? json(node.provenance->pipeline) : json(nullptr)}};
    ns.push_back(n);
    if (node.provenance) {
      for (const auto& in : node.provenance->input_commits) {
        edges.push_back({{"from", in}, {"to", id}, {"spec_hash", node.provenance->spec_hash}});
      }
    }
  }
  return json{{"root", root},
              {"depth", depth},
              {"nodes", ns},
              {"edges", edges},
              {"raw_commits", raw_commits()},
              {"spec_hashes", spec_hashes()}};
}

PipelineEngine::PipelineEngine(store::DataStore& store, TransformRegistry transforms)
    : store_(store), transforms_(std::move(transforms)) {
  fs::create_directories(dir() / "specs");
  fs::create_directories(dir() / "current");
  fs::create_directories(store_.root() / "provenance");
  store_.add_listener([this](const store::Commit& c) { on_commit(c); });
}

HashId PipelineEngine::register_pipeline(const PipelineSpec& spec) {
  if (!transforms_.contains(spec.transform)) {
    fail(ErrorCode::kUnknownTransform, "unknown transform: " + spec.transform);
  }
  if (!store::is_valid_repo_name(spec.name)) {
    fail(ErrorCode::kInvalidName, "invalid pipeline name: " + spec.name);
  }
  if (spec.inputs.empty()) fail(ErrorCode::kInvalidConfig, "pipeline needs at least one input");
  for (const auto& in : spec.inputs) {
    if (!store_.has_repo(in.repo)) {
      fail(ErrorCode::kMissingInputRepo, "input repo not found: " + in.repo);
    }
    if (in.repo == spec.name) fail(ErrorCode::kInvalidConfig, "pipeline cannot read its own output");
  }
  // Parameter validation happens at registration, not first run.
  if (spec.transform == "split_dataset") (void)SplitParams::from_json(spec.params);
  if (spec.transform == "clean_validate_text") (void)CleanValidateParams::from_json(spec.params);

  const HashId hash = spec.spec_hash();
  FileLock lock(store_.root() / "locks" / "pipelines.lock");
  write_atomic(dir() / "specs" / (hash + ".json"), canonical(spec.to_json()));
  if (!store_.has_repo(spec.name)) store_.create_repo(spec.name);
  write_json_atomic(dir() / "current" / (spec.name + ".json"), json{{"spec_hash", hash}});
  return hash;
}

PipelineSpec PipelineEngine::pipeline(const std::string& name) const {
  const fs::path cur = dir() / "current" / (name + ".json");
  if (!store::is_valid_repo_name(name) || !fs::exists(cur)) {
    fail(ErrorCode::kNotFound, "pipeline not found: " + name);
  }
  const std::string hash = read_json(cur).at("spec_hash").get<std::string>();
  return PipelineSpec::from_json(read_json(dir() / "specs" / (hash + ".json")));
}

std::vector<PipelineSpec> PipelineEngine::pipelines() const {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir() / "current")) {
    if (e.path().extension() == ".json") names.push_back(e.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  std::vector<PipelineSpec> out;
  for (const auto& n : names) out.push_back(pipeline(n));
  return out;
}

void PipelineEngine::on_commit(const store::Commit& commit) {
  for (const auto& spec : pipelines()) {
    if (spec.trigger != Trigger::kOnCommit) continue;
    const bool subscribed = std::any_of(spec.inputs.begin(), spec.inputs.end(), [&](const auto& in) {
      return in.repo == commit.repo && in.branch == commit.branch;
    });
    if (subscribed) {
      std::lock_guard lock(mu_);
      queue_.push_back(spec.name);
    }
  }
}

std::size_t PipelineEngine::pending_count() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

std::vector<Job> PipelineEngine::run_pending() {
  std::vector<Job> done;
  while (true) {
    std::string name;
    {
      std::lock_guard lock(mu_);
      if (queue_.empty()) break;
      name = queue_.front();
      queue_.pop_front();
    }
    done.push_back(run_job(name));
  }
  return done;
}

Job PipelineEngine::run_job(const std::string& name) {
  const PipelineSpec spec = pipeline(name);
  const HashId hash = spec.spec_hash();
  FileLock lock(store_.root() / "locks" / "pipeline" / (name + ".lock"));

  Job job;
  job.pipeline = name;
  job.spec_hash = hash;
  {
    const auto prior = jobs(name);
    std::ostringstream id;
    id << name << "-" << std::setw(6) << std::setfill('0') << prior.size() + 1;
    job.id = id.str();
  }

  std::vector<InputFile> files;
  for (const auto& in : spec.inputs) {
    auto head = store_.head(in.repo, in.branch);
    if (!head) {
      fail(ErrorCode::kNotFound, "input branch has no commits: " + in.repo + "@" + in.branch);
    }
    job.input_commits.push_back(head->id);
    for (const auto& [path, blob] : store_.tree(*head)) {
      InputFile f;
      f.path = spec.inputs.size() == 1 ? path : in.repo + "/" + path;
      f.blob = blob;
      f.content = store_.objects().get(blob);
      files.push_back(std::move(f));
    }
  }
  std::ostringstream log;
  log << "job " << job.id << " spec " << hash << " resources cpu=" << spec.resources.cpu
      << " memory=" << spec.resources.memory << " gpu=" << spec.resources.gpu << "\n";

  if (auto head = store_.head(name, store::DataStore::kDefaultBranch)) {
    auto prov = provenance(head->id);
    if (prov && prov->spec_hash == hash && prov->input_commits == job.input_commits) {
      job.status = JobStatus::kSucceeded;
      job.output_commit = head->id;
      job.reused = true;
      log << "output up to date at " << head->id << "\n";
      job.log = log.str();
      append_line(dir() / "jobs" / (name + ".jsonl"), canonical(job.to_json()));
      return job;
    }
  }

  job.status = JobStatus::kRunning;
  TransformOutput result;
  try {
    result = transforms_.get(spec.transform)(spec.params, files);
    for (const auto& [path, bytes] : result.files) store::validate_path(path);
  } catch (const std::exception& e) {
    job.status = JobStatus::kFailed;
    log << "transform failed: " << e.what() << "\n";
    job.log = log.str();
    append_line(dir() / "jobs" / (name + ".jsonl"), canonical(job.to_json()));
    return job;
  }
  log << result.log;

  store::FileTree tree;
  for (const auto& [path, bytes] : result.files) tree[path] = store_.objects().put(bytes);

  ProvenanceRecord prov;
  prov.spec_hash = hash;
  prov.pipeline = name;
  prov.input_commits = job.input_commits;
  const store::Commit out = store_.commit_tree(
      name, store::DataStore::kDefaultBranch, tree, "pipeline:" + name,
      "pipeline " + name + " spec " + hash.substr(0, 12), store::DataStore::CommitOptions{},
      [&](const store::Commit& c) {
        prov.output_commit = c.id;
        write_atomic(store_.root() / "provenance" / (c.id + ".json"),
                     canonical(prov.to_json()));
      });
  job.output_commit = out.id;
  job.status = JobStatus::kSucceeded;
  log << "committed " << out.id << " (" << tree.size() << " files)\n";
  job.log = log.str();
  append_line(dir() / "jobs" / (name + ".jsonl"), canonical(job.to_json()));
  return job;
}

std::vector<Job> PipelineEngine::jobs(const std::string& name) const {
  std::vector<Job> out;
  for (const auto& j : read_jsonl(dir() / "jobs" / (name + ".jsonl"))) {
    Job job;
    job.id = j.at("id").get<std::string>();
    job.pipeline = j.at("pipeline").get<std::string>();
    job.spec_hash = j.at("spec_hash").get<std::string>();
    job.input_commits = j.at("input_commits").get<std::vector<std::string>>();
    if (!j.at("output_commit").is_null()) job.output_commit = j.at("output_commit").get<std::string>();
    const std::string st = j.at("status").get<std::string>();
    job.status = st == "succeeded" ? JobStatus::kSucceeded
                 : st == "failed"  ? JobStatus::kFailed
                 : st == "running" ? JobStatus::kRunning
                                   : JobStatus::kPending;
    job.log = j.value("log", "");
    job.reused = j.value("reused", false);
    out.push_back(std::move(job));
  }
  return out;
}

std::optional<ProvenanceRecord> PipelineEngine::provenance(const HashId& commit) const {
  if (!is_hash_id(commit)) return std::nullopt;
  const fs::path p = store_.root() / "provenance" / (commit + ".json");
  if (!fs::exists(p)) return std::nullopt;
  return ProvenanceRecord::from_json(read_json(p));
}

Lineage PipelineEngine::lineage(const HashId& commit) const {
  Lineage out;
  out.root = store_.get_commit(commit).id;
  std::map<HashId, std::size_t> depth_memo;
  std::set<HashId> on_stack;
  std::function<std::size_t(const HashId&)> visit = [&](const HashId& id) -> std::size_t {
    if (auto it = depth_memo.find(id); it != depth_memo.end()) return it->second;
    if (!on_stack.insert(id).second) fail(ErrorCode::kInternal, "cycle in lineage at " + id);
    LineageNode node{store_.get_commit(id), provenance(id)};
    std::size_t d = 0;
    if (node.provenance) {
      for (const auto& in : node.provenance->input_commits) d = std::max(d, visit(in) + 1);
    }
    out.nodes.emplace(id, std::move(node));
    on_stack.erase(id);
    depth_memo[id] = d;
    return d;
  };
  out.depth = visit(out.root);
  return out;
}

}  // namespace dlflow::pipeline
