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

#include "learners/learner.hpp"

#include <cmath>

#include "common/error.hpp"
#include "learners/mlp_learners.hpp"
#include "learners/synthetic_curve.hpp"

namespace dlflow::learners {

HashId Dataset::digest() const {
  Sha256 h;
  for (const auto& f : files) {
    h.update(f.path);
    h.update("\t");
    h.update(f.blob);
    h.update("\t");
    h.update(f.label.value_or(""));
    h.update("\n");
  }
  return h.hex_digest();
}

json Learner::serving_wrapper() const {
  fail(ErrorCode::kLearnerError, "learner " + id() + " cannot be served");
}

std::vector<double> Learner::predict_scores(const json&) const {
  fail(ErrorCode::kLearnerError, "learner " + id() + " cannot be served");
}

LearnerRegistry LearnerRegistry::with_builtins() {
  LearnerRegistry r;
  r.add(TextMlpLearner::kId, [] { return std::make_unique<TextMlpLearner>(); });
  r.add(ImageMlpLearner::kId, [] { return std::make_unique<ImageMlpLearner>(); });
  r.add(SyntheticCurveLearner::kId, [] { return std::make_unique<SyntheticCurveLearner>(); });
  return r;
}

void LearnerRegistry::add(const std::string& id, LearnerFactory factory) {
  factories_[id] = std::move(factory);
}

bool LearnerRegistry::contains(const std::string& id) const { return factories_.contains(id); }

std::unique_ptr<Learner> LearnerRegistry::create(const std::string& id) const {
  auto it = factories_.find(id);
  if (it == factories_.end()) fail(ErrorCode::kInvalidConfig, "unknown entry point: " + id);
  return it->second();
}

std::vector<std::string> LearnerRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, f] : factories_) out.push_back(id);
  return out;
}

// ------------------------------------------------------- SyntheticCurveLearner

double SyntheticCurveLearner::accuracy_at(double a, double b, int64_t steps) {
  return a * (1.0 - std::exp(-b * static_cast<double>(steps)));
}

void SyntheticCurveLearner::init(const json& hparams, uint64_t) {
  a_ = hparams.value("a", 0.5);
  b_ = hparams.value("b", 0.1);
  if (hparams.value("fail", false)) fail(ErrorCode::kLearnerError, "configured to fail");
  if (!(a_ > 0.0 && a_ <= 1.0) || !(b_ > 0.0)) {
    fail(ErrorCode::kInvalidConfig, "synthetic curve needs 0 < a <= 1 and b > 0");
  }
  steps_ = 0;
}

void SyntheticCurveLearner::load_data(const Dataset&) {}

Metrics SyntheticCurveLearner::train(int64_t steps) {
  if (steps < 0) fail(ErrorCode::kInvalidArgument, "negative step budget");
  steps_ += steps;
  return {{"train_loss", 1.0 - accuracy_at(a_, b_, steps_)}};
}

Metrics SyntheticCurveLearner::evaluate() const {
  const double acc = accuracy_at(a_, b_, steps_);
  return {{"accuracy", acc}, {"loss", 1.0 - acc}};
}

Metrics SyntheticCurveLearner::evaluate_dataset(const Dataset&) const { return evaluate(); }

Artifacts SyntheticCurveLearner::save() const {
  return {{"state", json{{"a", a_}, {"b", b_}, {"steps", steps_}}.dump()}};
}

void SyntheticCurveLearner::restore(const Artifacts& artifacts) {
  auto it = artifacts.find("state");
  if (it == artifacts.end()) fail(ErrorCode::kMissingArtifact, "missing artifact state");
  const json j = json::parse(it->second);
  a_ = j.at("a").get<double>();
  b_ = j.at("b").get<double>();
  steps_ = j.at("steps").get<int64_t>();
}

json SyntheticCurveLearner::describe() const {
  return {{"learner", kId}, {"a", a_}, {"b", b_}, {"steps", steps_}};
}

}  // namespace dlflow::learners
