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
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "common/fs.hpp"
#include "common/hash.hpp"

namespace dlflow::learners {

struct DataFile {
  std::string path;  // relative to the dataset prefix
  HashId blob;
  std::string content;
  std::optional<std::string> label;
};

// A pinned slice of one commit: every file under `prefix`, with labels when
// the label store has them.
struct Dataset {
  std::string repo;
  HashId commit;
  std::string split;
  std::string prefix;
  std::vector<DataFile> files;  // sorted by path

  // SHA-256 over "path\tblob\tlabel\n" lines; identifies the training set.
  [[nodiscard]] HashId digest() const;
};

using Metrics = std::map<std::string, double>;
using Artifacts = std::map<std::string, std::string>;

// The trial contract every learner implements. Call order is init, then
// load_data, then any number of train/evaluate/save calls. restore() may
// replace load_data() when only inference is needed.
class Learner {
 public:
  virtual ~Learner() = default;

  [[nodiscard]] virtual std::string id() const = 0;
  virtual void init(const json& hparams, uint64_t seed) = 0;
  // Holds out a fixed fifth of the files for validation.
  virtual void load_data(const Dataset& train) = 0;
  virtual Metrics train(int64_t steps) = 0;
  // Validation metrics on the held-out part of the loaded data.
  [[nodiscard]] virtual Metrics evaluate() const = 0;
  [[nodiscard]] virtual Metrics evaluate_dataset(const Dataset& data) const = 0;
  [[nodiscard]] virtual Artifacts save() const = 0;
  virtual void restore(const Artifacts& artifacts) = 0;
  [[nodiscard]] virtual json describe() const = 0;

  // Serving wrapper for packaging: artifact names, preprocess chain and
  // postprocess step.
  [[nodiscard]] virtual json serving_wrapper() const;
  // Class scores for one serving payload through the learner's own
  // evaluate-time preprocessing and forward pass.
  [[nodiscard]] virtual std::vector<double> predict_scores(const json& payload) const;
};

using LearnerFactory = std::function<std::unique_ptr<Learner>()>;

class LearnerRegistry {
 public:
  // text-mlp-5, image-mlp and synthetic-curve.
  static LearnerRegistry with_builtins();

  void add(const std::string& id, LearnerFactory factory);
  [[nodiscard]] bool contains(const std::string& id) const;
  [[nodiscard]] std::unique_ptr<Learner> create(const std::string& id) const;
  [[nodiscard]] std::vector<std::string> ids() const;

 private:
  std::map<std::string, LearnerFactory> factories_;
};

}  // namespace dlflow::learners
