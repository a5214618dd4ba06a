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
#include <string_view>
#include <vector>

#include "common/fs.hpp"
#include "learners/mlp.hpp"
#include "learners/text_features.hpp"
#include "pipeline/pipeline_engine.hpp"
#include "registry/model_registry.hpp"
#include "tracker/experiment_tracker.hpp"

namespace dlflow::serving {

struct PackagedModel {
  std::string model_name;
  int version = 0;
  std::string learner;
  std::string checkpoint;
  json wrapper;                              // init, preprocess, postprocess, payload
  std::map<std::string, HashId> artifacts;   // the wrapper's init artifacts
  HashId package_hash;

  // Canonical content; package_hash is its digest.
  [[nodiscard]] json content() const;
  [[nodiscard]] json to_json() const;
  static PackagedModel from_json(const json& j);
};

struct DeploymentManifest {
  std::string deployment_name;
  std::string model_name;
  // Explicit version; otherwise the production version.
  std::optional<int> version;
  std::string endpoint;  // defaults to /predict/<deployment_name>
  int replicas = 1;
  pipeline::ResourceHints resources;
  // Allows an explicit approved (not yet production) version.
  bool staging = false;

  [[nodiscard]] json to_json() const;
  static DeploymentManifest from_json(const json& j);
};

struct Deployment {
  DeploymentManifest manifest;
  int model_version = 0;
  HashId package_hash;
  int64_t deployed_at = 0;

  [[nodiscard]] json to_json() const;
  static Deployment from_json(const json& j);
};

struct Prediction {
  std::string label;
  std::size_t class_id = 0;
  std::vector<double> scores;
  std::vector<std::string> classes;
  int model_version = 0;
  std::string request_id;

  [[nodiscard]] json to_json() const;
};

// The packaged wrapper around one model version: preprocess chain, forward
// pass and label decoding. Immutable once constructed.
class Predictor {
 public:
  Predictor(PackagedModel package, const std::map<std::string, std::string>& artifacts);

  [[nodiscard]] std::vector<double> preprocess(const json& data) const;
  // Scores and the decoded class id; ties go to the lowest class id.
  [[nodiscard]] std::pair<std::size_t, std::vector<double>> predict(const json& data) const;
  [[nodiscard]] const PackagedModel& package() const noexcept { return package_; }
  [[nodiscard]] const std::vector<std::string>& classes() const noexcept { return classes_; }

 private:
  PackagedModel package_;
  learners::Mlp net_;
  std::optional<learners::Vocabulary> vocab_;
  std::vector<std::string> classes_;
};

// Packaging, deployment and the scoring log.
//
// On-disk layout under the root:
//   serving/packages/<hash>.json            packaged models
//   serving/packaged/<model>/<version>.json latest package per version
//   serving/deployments/<name>.json         active deployments
//   serving/scoring/<name>.jsonl            one record per request
class Gateway {
 public:
  Gateway(store::DataStore& store, registry::ModelRegistry& registry,
          const tracker::ExperimentTracker& tracker);

  // Uses the learner's own wrapper when none is given.
  PackagedModel package_model(const std::string& name, int version,
                              const std::optional<json>& wrapper = std::nullopt);
  [[nodiscard]] PackagedModel package(const HashId& hash) const;

  // Swaps the live predictor; requests already holding the previous one
  // finish on it.
  Deployment deploy(const DeploymentManifest& manifest);
  [[nodiscard]] std::vector<Deployment> deployments() const;
  [[nodiscard]] Deployment deployment(const std::string& name) const;
  [[nodiscard]] std::optional<std::string> deployment_for_endpoint(const std::string& endpoint) const;

  // `body` is the raw request: {"data": <text | 28x28 | 784 numbers>}.
  // Every call with a known deployment appends a scoring record, including
  // malformed payloads, which then throw malformed-payload.
  Prediction predict(const std::string& deployment, std::string_view body);
  Prediction predict(const std::string& deployment, const json& body) {
    return predict(deployment, std::string_view(body.dump()));
  }

  [[nodiscard]] std::vector<json> scoring(const std::string& deployment,
                                          std::optional<int64_t> since = std::nullopt) const;

 private:
  struct Live {
    Deployment deployment;
    std::shared_ptr<const Predictor> predictor;
  };

  [[nodiscard]] fs::path dir() const { return store_.root() / "serving"; }
  std::shared_ptr<const Live> live(const std::string& name);
  std::shared_ptr<const Predictor> load_predictor(const PackagedModel& package) const;
  std::string next_request_id(const std::string& deployment, const HashId& input_digest);

  store::DataStore& store_;
  registry::ModelRegistry& registry_;
  const tracker::ExperimentTracker& tracker_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const Live>> live_;
  std::map<std::string, uint64_t> request_seq_;
};

}  // namespace dlflow::serving
