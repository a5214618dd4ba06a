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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "common/fs.hpp"
#include "labels/label_store.hpp"
#include "learners/learner.hpp"
#include "pipeline/pipeline_engine.hpp"
#include "store/data_store.hpp"
#include "tracker/asha.hpp"
#include "tracker/hparams.hpp"

namespace dlflow::tracker {

using learners::Metrics;

struct DataSource {
  std::string repo;
  std::string ref = store::DataStore::kDefaultBranch;
  std::string split = "train";  // label split
  std::string prefix;           // only files under this path prefix

  [[nodiscard]] json to_json() const;
  static DataSource from_json(const json& j);
};

enum class SearcherKind { kSingle, kGrid, kRandom, kAsha };

const char* to_string(SearcherKind kind) noexcept;

struct SearcherConfig {
  SearcherKind kind = SearcherKind::kSingle;
  // Training steps per trial for single, grid and random.
  int64_t steps = 100;
  // Validation cadence within a trial; 0 means only at the end.
  int64_t eval_every = 0;
  int64_t num_samples = 1;  // random
  uint64_t seed = 0;        // random and asha sampling
  AshaParams asha;
  std::string metric = "accuracy";
  int workers = 1;

  [[nodiscard]] json to_json() const;
  static SearcherConfig from_json(const json& j);
};

struct ExperimentConfig {
  std::string name;
  DataSource data;
  std::string entry_point;
  HyperparameterSpace hparams;
  SearcherConfig searcher;
  pipeline::ResourceHints resources;
  uint64_t seed = 0;
  // Direction per metric name; true means larger is better.
  std::map<std::string, bool> maximize = {{"accuracy", true}, {"loss", false}};
  json metadata = json::object();

  [[nodiscard]] bool maximizes(const std::string& metric) const;
  [[nodiscard]] json to_json() const;
  [[nodiscard]] HashId config_hash() const;
  static ExperimentConfig from_json(const json& j);
};

enum class TrialState { kCreated, kRunning, kCompleted, kEarlyStopped, kErrored };

const char* to_string(TrialState state) noexcept;
TrialState parse_trial_state(const std::string& s);

struct TrialRecord {
  std::string experiment;
  std::string trial_id;  // zero-padded ordinal, "0001"
  json hparams = json::object();
  uint64_t seed = 0;
  TrialState state = TrialState::kCreated;
  int rung = 0;
  int64_t steps_trained = 0;
  std::vector<std::string> checkpoints;
  std::string error;

  [[nodiscard]] json to_json() const;
  static TrialRecord from_json(const json& j);
};

struct MetricPoint {
  int64_t step = 0;
  Metrics values;
};

struct Checkpoint {
  std::string id;  // UUID
  std::string experiment;
  std::string trial_id;
  int64_t step = 0;
  std::map<std::string, HashId> artifacts;
  Metrics metrics;
  HashId commit;  // commit in the reserved experiments repo

  [[nodiscard]] json to_json() const;
  static Checkpoint from_json(const json& j);
};

// Experiment registry plus the searcher runtime.
//
// On-disk layout under the root:
//   experiments/<id>/experiment.json      config, data digest, search state
//   experiments/<id>/trials/<tid>.json    trial records
//   experiments/<id>/metrics/<tid>.jsonl  metric series
//   experiments/checkpoints/<uuid>.json   checkpoint index
// Artifact bytes are committed to the `_experiments` repo, one branch per
// experiment.
class ExperimentTracker {
 public:
  static constexpr const char* kArtifactRepo = "_experiments";

  ExperimentTracker(store::DataStore& store, labels::LabelStore& labels,
                    learners::LearnerRegistry learners);

  std::string run_experiment(const ExperimentConfig& config);

  [[nodiscard]] json experiment(const std::string& id) const;
  [[nodiscard]] ExperimentConfig experiment_config(const std::string& id) const;
  [[nodiscard]] std::vector<std::string> list_experiments() const;
  [[nodiscard]] std::vector<TrialRecord> trials(const std::string& experiment) const;
  [[nodiscard]] TrialRecord trial(const std::string& experiment, const std::string& trial_id) const;

  void log_metrics(const std::string& experiment, const std::string& trial_id, int64_t step,
                   const Metrics& metrics);
  [[nodiscard]] std::vector<MetricPoint> metrics(const std::string& experiment,
                                                 const std::string& trial_id) const;

  // Best checkpoint of completed or early-stopped trials; ties go to the
  // lowest trial id, then the lowest step.
  [[nodiscard]] Checkpoint best_checkpoint(const std::string& experiment, const std::string& metric,
                                           bool maximize) const;
  [[nodiscard]] Checkpoint checkpoint(const std::string& id) const;
  [[nodiscard]] bool has_checkpoint(const std::string& id) const;
  [[nodiscard]] learners::Artifacts checkpoint_artifacts(const Checkpoint& checkpoint) const;
  // A learner of the experiment's entry point restored from the checkpoint.
  [[nodiscard]] std::unique_ptr<learners::Learner> restore_learner(const Checkpoint& checkpoint) const;

  [[nodiscard]] learners::Dataset load_dataset(const DataSource& source) const;

  [[nodiscard]] const learners::LearnerRegistry& learners() const noexcept { return learners_; }

 private:
  struct Run;

  [[nodiscard]] fs::path dir() const { return store_.root() / "experiments"; }
  [[nodiscard]] fs::path exp_dir(const std::string& id) const { return dir() / id; }
  std::string allocate_id();
  void write_trial(const TrialRecord& t) const;
  Checkpoint save_checkpoint(const std::string& experiment, const TrialRecord& trial,
                             const learners::Learner& learner, const Metrics& metrics);

  store::DataStore& store_;
  labels::LabelStore& labels_;
  learners::LearnerRegistry learners_;
  mutable std::mutex mu_;
};

}  // namespace dlflow::tracker
