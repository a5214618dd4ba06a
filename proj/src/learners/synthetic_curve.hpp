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

#include "learners/learner.hpp"

namespace dlflow::learners {

// Closed-form learning curve for scheduler tests: after s steps the
// validation accuracy is a * (1 - exp(-b * s)) and the loss is 1 - accuracy.
class SyntheticCurveLearner final : public Learner {
 public:
  static constexpr const char* kId = "synthetic-curve";

  [[nodiscard]] static double accuracy_at(double a, double b, int64_t steps);

  [[nodiscard]] std::string id() const override { return kId; }
  void init(const json& hparams, uint64_t seed) override;
  void load_data(const Dataset& train) override;
  Metrics train(int64_t steps) override;
  [[nodiscard]] Metrics evaluate() const override;
  [[nodiscard]] Metrics evaluate_dataset(const Dataset& data) const override;
  [[nodiscard]] Artifacts save() const override;
  void restore(const Artifacts& artifacts) override;
  [[nodiscard]] json describe() const override;

 private:
  double a_ = 0.5;
  double b_ = 0.1;
  int64_t steps_ = 0;
};

}  // namespace dlflow::learners
