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

#include <optional>
#include <span>
#include <vector>

#include "common/rng.hpp"
#include "learners/learner.hpp"
#include "learners/mlp.hpp"
#include "learners/synth.hpp"
#include "learners/text_features.hpp"

namespace dlflow::learners {

// Shared SGD loop, validation split and evaluation for MLP learners.
class MlpLearner : public Learner {
 public:
  Metrics train(int64_t steps) override;
  [[nodiscard]] Metrics evaluate() const override;

  [[nodiscard]] const Mlp& model() const;
  Mlp& mutable_model();
  [[nodiscard]] int64_t steps_trained() const noexcept { return steps_done_; }

  // Global magnitude pruning followed by retraining on the loaded data.
  void compress(double fraction, int64_t retrain_steps);

 protected:
  struct Sample {
    std::vector<double> x;
    int label = 0;
  };

  void init_common(const json& hparams, uint64_t seed, double default_lr,
                   int64_t default_batch, double default_dropout);
  // Splits samples keyed by name into fit and validation sets and builds
  // the network.
  void set_data(std::vector<std::pair<std::string, Sample>> samples, MlpSpec spec);
  [[nodiscard]] Metrics evaluate_samples(const std::vector<Sample>& samples) const;

  json hparams_ = json::object();
  uint64_t seed_ = 0;
  double lr_ = 0.05;
  int64_t batch_size_ = 16;
  double dropout_ = 0.0;
  std::optional<Mlp> net_;
  std::vector<Sample> fit_;
  std::vector<Sample> val_;

 private:
  Rng rng_{0};
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  int64_t steps_done_ = 0;
};

// Bag-of-stems classifier with five linear layers, layer norm and dropout.
class TextMlpLearner final : public MlpLearner {
 public:
  static constexpr const char* kId = "text-mlp-5";

  [[nodiscard]] std::string id() const override { return kId; }
  void init(const json& hparams, uint64_t seed) override;
  void load_data(const Dataset& train) override;
  [[nodiscard]] Metrics evaluate_dataset(const Dataset& data) const override;
  [[nodiscard]] Artifacts save() const override;
  void restore(const Artifacts& artifacts) override;
  [[nodiscard]] json describe() const override;
  [[nodiscard]] json serving_wrapper() const override;
  [[nodiscard]] std::vector<double> predict_scores(const json& payload) const override;

  [[nodiscard]] const Vocabulary& vocabulary() const noexcept { return vocab_; }
  [[nodiscard]] const LabelEncoding& labels() const noexcept { return labels_; }

 private:
  [[nodiscard]] MlpSpec architecture(std::size_t input, std::size_t classes) const;

  int64_t hidden_ = 32;
  std::size_t vocab_size_ = 2000;
  Vocabulary vocab_;
  LabelEncoding labels_;
};

// Pixel values scaled to [0, 1]: exactly v / 255.
std::vector<double> image_features(std::span<const uint8_t> pixels);

// Flatten -> one ReLU hidden layer -> 10-way softmax.
class ImageMlpLearner final : public MlpLearner {
 public:
  static constexpr const char* kId = "image-mlp";

  [[nodiscard]] std::string id() const override { return kId; }
  void init(const json& hparams, uint64_t seed) override;
  void load_data(const Dataset& train) override;
  [[nodiscard]] Metrics evaluate_dataset(const Dataset& data) const override;
  [[nodiscard]] Artifacts save() const override;
  void restore(const Artifacts& artifacts) override;
  [[nodiscard]] json describe() const override;
  [[nodiscard]] json serving_wrapper() const override;
  [[nodiscard]] std::vector<double> predict_scores(const json& payload) const override;

  [[nodiscard]] const std::vector<std::string>& class_names() const noexcept { return classes_; }

  // Decodes `images.idx3`, `labels.idx1` and `classes.txt` from a dataset.
  static std::vector<Image> images_of(const Dataset& data, std::vector<std::string>* classes);

 private:
  int64_t hidden_ = 64;
  std::vector<std::string> classes_;
};

// Raw pixel values of a serving image payload: 784 numbers in [0, 255],
// flat or as 28 rows of 28.
std::vector<double> flatten_image_payload(const json& data);

// flatten_image_payload scaled by 1/255, as image_features does.
std::vector<double> image_payload_features(const json& data);

}  // namespace dlflow::learners
