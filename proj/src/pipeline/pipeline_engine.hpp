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

#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "common/fs.hpp"
#include "pipeline/transforms.hpp"
#include "store/data_store.hpp"

namespace dlflow::pipeline {

struct ResourceHints {
  int64_t cpu = 1;
  int64_t memory = 0;
  int64_t gpu = 0;

  [[nodiscard]] json to_json() const;
  static ResourceHints from_json(const json& j);
};

struct PipelineInput {
  std::string repo;
  std::string branch = store::DataStore::kDefaultBranch;
};

enum class Trigger { kOnCommit, kManual };

struct PipelineSpec {
  std::string name;
  std::vector<PipelineInput> inputs;
  std::string transform;
  json params = json::object();
  Trigger trigger = Trigger::kManual;
  ResourceHints resources;

  // Canonical document without the hash itself.
  [[nodiscard]] json to_json() const;
  [[nodiscard]] HashId spec_hash() const;
  static PipelineSpec from_json(const json& j);
};

enum class JobStatus { kPending, kRunning, kSucceeded, kFailed };

const char* to_string(JobStatus status) noexcept;

struct Job {
  std::string id;
  std::string pipeline;
  HashId spec_hash;
  std::vector<HashId> input_commits;
  std::optional<HashId> output_commit;
  JobStatus status = JobStatus::kPending;
  std::string log;
  // Output already existed at the head for the same spec and inputs.
  bool reused = false;

  [[nodiscard]] json to_json() const;
};

struct ProvenanceRecord {
  HashId output_commit;
  HashId spec_hash;
  std::string pipeline;
  std::vector<HashId> input_commits;

  [[nodiscard]] json to_json() const;
  static ProvenanceRecord from_json(const json& j);
};

struct LineageNode {
  store::Commit commit;
  std::optional<ProvenanceRecord> provenance;
};

// Transitive closure of provenance records rooted at one commit.
struct Lineage {
  HashId root;
  std::map<HashId, LineageNode> nodes;
  // Longest provenance chain from the root, in edges.
  std::size_t depth = 0;

  [[nodiscard]] std::vector<HashId> raw_commits() const;
  [[nodiscard]] std::vector<HashId> spec_hashes() const;
  [[nodiscard]] json to_json() const;
};

// Runs registered transforms over input repos and records provenance.
//
// On-disk layout under the root:
//   pipelines/specs/<spec_hash>.json   every registered spec version
//   pipelines/current/<name>.json      {"spec_hash": ...}
//   pipelines/jobs/<name>.jsonl        terminal job records
//   provenance/<commit>.json           one record per produced commit
class PipelineEngine {
 public:
  PipelineEngine(store::DataStore& store, TransformRegistry transforms);

  HashId register_pipeline(const PipelineSpec& spec);
  [[nodiscard]] PipelineSpec pipeline(const std::string& name) const;
  [[nodiscard]] std::vector<PipelineSpec> pipelines() const;

  Job run_job(const std::string& name);

  // Runs queued on-commit jobs, including jobs their outputs trigger.
  std::vector<Job> run_pending();
  [[nodiscard]] std::size_t pending_count() const;

  [[nodiscard]] std::optional<ProvenanceRecord> provenance(const HashId& commit) const;
  [[nodiscard]] Lineage lineage(const HashId& commit) const;
  [[nodiscard]] std::vector<Job> jobs(const std::string& name) const;

  TransformRegistry& transforms() noexcept { return transforms_; }

 private:
  void on_commit(const store::Commit& commit);
  [[nodiscard]] fs::path dir() const { return store_.root() / "pipelines"; }

  store::DataStore& store_;
  TransformRegistry transforms_;
  mutable std::mutex mu_;
  std::deque<std::string> queue_;
};

}  // namespace dlflow::pipeline
