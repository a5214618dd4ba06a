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

#include "learners/mlp_learners.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "common/error.hpp"
#include "pipeline/transforms.hpp"

namespace dlflow::learners {
namespace {

constexpr uint64_t kValidationSeed = 0x76616c6964ULL;
const pipeline::Fraction kFitFraction{4, 5};

template <typename T>
T hparam(const json& h, const char* name, T fallback) {
  if (!h.contains(name)) return fallback;
  try {
    return h.at(name).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::kInvalidConfig, std::string("hyperparameter ") + name + " has the wrong type");
  }
}

const DataFile& require_file(const Dataset& data, const std::string& path) {
  for (const auto& f : data.files) {
    if (f.path == path) return f;
  }
  fail(ErrorCode::kDataNotFound, "dataset " + data.repo + ":" + data.prefix + " lacks " + path);
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- MlpLearner

void MlpLearner::init_common(const json& hparams, uint64_t seed, double default_lr,
                             int64_t default_batch, double default_dropout) {
  if (!hparams.is_object()) fail(ErrorCode::kInvalidConfig, "hyperparameters must be a map");
  hparams_ = hparams;
  seed_ = seed;
  lr_ = hparam(hparams, "lr", default_lr);
  batch_size_ = hparam<int64_t>(hparams, "batch_size", default_batch);
  dropout_ = hparam(hparams, "dropout", default_dropout);
  if (!(lr_ > 0.0) || !std::isfinite(lr_)) fail(ErrorCode::kInvalidConfig, "lr must be positive");
  if (batch_size_ < 1) fail(ErrorCode::kInvalidConfig, "batch_size must be positive");
  if (!(dropout_ >= 0.0 && dropout_ < 1.0)) fail(ErrorCode::kInvalidConfig, "dropout must be in [0, 1)");
  rng_ = Rng(seed);
  steps_done_ = 0;
  cursor_ = 0;
  order_.clear();
}

void MlpLearner::set_data(std::vector<std::pair<std::string, Sample>> samples, MlpSpec spec) {
  fit_.clear();
  val_.clear();
  for (auto& [key, s] : samples) {
    (pipeline::routes_to_train(kFitFraction, kValidationSeed, key) ? fit_ : val_).push_back(std::move(s));
  }
  if (fit_.empty() || val_.empty()) {
    fail(ErrorCode::kEmptyDataset, "too few examples for a training/validation split");
  }
  net_.emplace(std::move(spec));
  Rng init_rng(Rng::mix(seed_ ^ 0x696e6974ULL));
  net_->init(init_rng);
  order_.resize(fit_.size());
  cursor_ = order_.size();
}

const Mlp& MlpLearner::model() const {
  if (!net_) fail(ErrorCode::kLearnerError, "model is not initialised");
  return *net_;
}

Mlp& MlpLearner::mutable_model() {
  if (!net_) fail(ErrorCode::kLearnerError, "model is not initialised");
  return *net_;
}

Metrics MlpLearner::train(int64_t steps) {
  if (!net_ || fit_.empty()) fail(ErrorCode::kLearnerError, "train called before load_data");
  if (steps < 0) fail(ErrorCode::kInvalidArgument, "negative step budget");
  double total = 0.0;
  std::vector<Example> batch;
  for (int64_t s = 0; s < steps; ++s) {
    batch.clear();
    for (int64_t b = 0; b < batch_size_; ++b) {
      if (cursor_ >= order_.size()) {
        // New epoch: Fisher-Yates over the fit set.
        for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
        for (std::size_t i = order_.size(); i > 1; --i) {
          std::swap(order_[i - 1], order_[rng_.uniform_index(i)]);
        }
        cursor_ = 0;
      }
      const Sample& sm = fit_[order_[cursor_++]];
      batch.push_back({sm.x, sm.label});
    }
    total += net_->train_step(batch, lr_, rng_);
    ++steps_done_;
  }
  Metrics m;
  m["train_loss"] = steps > 0 ? total / static_cast<double>(steps) : 0.0;
  return m;
}

Metrics MlpLearner::evaluate_samples(const std::vector<Sample>& samples) const {
  if (samples.empty()) fail(ErrorCode::kEmptyDataset, "nothing to evaluate");
  const Mlp& net = model();
  std::size_t correct = 0;
  double loss = 0.0;
  for (const auto& s : samples) {
    const auto p = net.predict_proba(s.x);
    const auto best = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
    if (best == s.label) ++correct;
    loss -= std::log(std::max(p[static_cast<std::size_t>(s.label)], 1e-300));
  }
  const auto n = static_cast<double>(samples.size());
  return {{"accuracy", static_cast<double>(correct) / n}, {"loss", loss / n}};
}

Metrics MlpLearner::evaluate() const { return evaluate_samples(val_); }

void MlpLearner::compress(double fraction, int64_t retrain_steps) {
  mutable_model().prune_magnitude(fraction);
  if (retrain_steps > 0) train(retrain_steps);
}

// ------------------------------------------------------------ TextMlpLearner

void TextMlpLearner::init(const json& hparams, uint64_t seed) {
  init_common(hparams, seed, 0.05, 16, 0.1);
  hidden_ = hparam<int64_t>(hparams, "hidden", 32);
  vocab_size_ = hparam<std::size_t>(hparams, "vocab_size", 2000);
  if (hidden_ < 1 || vocab_size_ < 1) fail(ErrorCode::kInvalidConfig, "hidden and vocab_size must be positive");
}

MlpSpec TextMlpLearner::architecture(std::size_t input, std::size_t classes) const {
  const auto h = static_cast<std::size_t>(hidden_);
  return MlpSpec{{input, h, h, h, h, classes}, true, dropout_};
}

void TextMlpLearner::load_data(const Dataset& train) {
  std::vector<std::vector<std::string>> fit_docs;
  std::vector<std::string> names;
  std::vector<std::pair<std::string, std::vector<std::string>>> tokens;
  for (const auto& f : train.files) {
    if (!f.label) continue;
    auto toks = tokenize(f.content);
    if (pipeline::routes_to_train(kFitFraction, kValidationSeed, f.path)) fit_docs.push_back(toks);
    names.push_back(*f.label);
    tokens.emplace_back(f.path, std::move(toks));
  }
  if (tokens.empty()) fail(ErrorCode::kDataNotFound, "no labelled documents in " + train.repo);
  vocab_ = Vocabulary::build(fit_docs, vocab_size_);
  labels_ = LabelEncoding(names);
  std::vector<std::pair<std::string, Sample>> samples;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    samples.push_back({tokens[i].first, Sample{vectorize(tokens[i].second, vocab_), labels_.encode(names[i])}});
  }
  set_data(std::move(samples), architecture(vocab_.size(), labels_.size()));
}

Metrics TextMlpLearner::evaluate_dataset(const Dataset& data) const {
  std::vector<Sample> samples;
  for (const auto& f : data.files) {
    if (!f.label) continue;
    samples.push_back({vectorize_text(f.content, vocab_), labels_.encode(*f.label)});
  }
  return evaluate_samples(samples);
}

Artifacts TextMlpLearner::save() const {
  return {{"weights", model().serialize()},
          {"vocabulary", vocab_.serialize()},
          {"labels", labels_.serialize()}};
}

void TextMlpLearner::restore(const Artifacts& artifacts) {
  for (const char* name : {"weights", "vocabulary", "labels"}) {
    if (!artifacts.contains(name)) fail(ErrorCode::kMissingArtifact, std::string("missing artifact ") + name);
  }
  Mlp net = Mlp::deserialize(artifacts.at("weights"));
  vocab_ = Vocabulary::deserialize(artifacts.at("vocabulary"));
  labels_ = LabelEncoding::deserialize(artifacts.at("labels"));
  if (net.input_dim() != vocab_.size() || net.output_dim() != labels_.size()) {
    fail(ErrorCode::kShapeMismatch, "weights do not match vocabulary or labels");
  }
  net_ = std::move(net);
}

json TextMlpLearner::describe() const {
  json layers = json::array();
  if (net_) {
    for (const auto& L : net_->layout()) layers.push_back({{"in", L.cols}, {"out", L.rows}, {"layer_norm", L.norm}});
  }
  return {{"learner", kId},
          {"linear_layers", net_ ? net_->linear_layers() : 5},
          {"layers", layers},
          {"hidden", hidden_},
          {"dropout", dropout_},
          {"vocabulary_size", vocab_.size()},
          {"classes", labels_.names()}};
}

json TextMlpLearner::serving_wrapper() const {
  return {{"init", {"weights", "vocabulary", "labels"}},
          {"preprocess",
           json::array({{{"id", "tokenize"}, {"params", {{"lowercase", true}, {"stemmer", "porter"}}}},
                        {{"id", "count-vectorize"}, {"params", {{"vocabulary", "vocabulary"}}}}})},
          {"postprocess", {{"id", "label-decode"}, {"params", {{"labels", "labels"}}}}},
          {"payload", "text"}};
}

std::vector<double> TextMlpLearner::predict_scores(const json& payload) const {
  if (!payload.is_string()) fail(ErrorCode::kMalformedPayload, "text payload must be a string");
  return model().predict_proba(vectorize_text(payload.get<std::string>(), vocab_));
}

// ----------------------------------------------------------- ImageMlpLearner

std::vector<double> image_features(std::span<const uint8_t> pixels) {
  std::vector<double> x(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) x[i] = static_cast<double>(pixels[i]) / 255.0;
  return x;
}

std::vector<double> flatten_image_payload(const json& data) {
  std::vector<double> values;
  auto take = [&](const json& v) {
    if (!v.is_number()) fail(ErrorCode::kMalformedPayload, "pixel values must be numbers");
    const double d = v.get<double>();
    if (!(d >= 0.0 && d <= 255.0)) fail(ErrorCode::kMalformedPayload, "pixel values must lie in [0, 255]");
    values.push_back(d);
  };
  if (!data.is_array()) fail(ErrorCode::kMalformedPayload, "image payload must be an array");
  if (data.size() == static_cast<std::size_t>(kImageSide) && !data.empty() && data.front().is_array()) {
    for (const auto& row : data) {
      if (!row.is_array() || row.size() != static_cast<std::size_t>(kImageSide)) {
        fail(ErrorCode::kMalformedPayload, "image rows must have 28 values");
      }
      for (const auto& v : row) take(v);
    }
  } else {
    if (data.size() != static_cast<std::size_t>(kImagePixels)) {
      fail(ErrorCode::kMalformedPayload, "image payload must have 784 values");
    }
    for (const auto& v : data) take(v);
  }
  return values;
}

std::vector<double> image_payload_features(const json& data) {
  auto values = flatten_image_payload(data);
  for (double& v : values) v /= 255.0;
  return values;
}

void ImageMlpLearner::init(const json& hparams, uint64_t seed) {
  init_common(hparams, seed, 0.1, 32, 0.0);
  hidden_ = hparam<int64_t>(hparams, "hidden", 64);
  if (hidden_ < 1) fail(ErrorCode::kInvalidConfig, "hidden must be positive");
}

std::vector<Image> ImageMlpLearner::images_of(const Dataset& data, std::vector<std::string>* classes) {
  const auto& images = require_file(data, "images.idx3");
  const auto& labels = require_file(data, "labels.idx1");
  if (classes != nullptr) *classes = split_lines(require_file(data, "classes.txt").content);
  return decode_idx(images.content, labels.content);
}

void ImageMlpLearner::load_data(const Dataset& train) {
  const auto images = images_of(train, &classes_);
  if (classes_.empty()) fail(ErrorCode::kDataNotFound, "classes.txt is empty");
  std::vector<std::pair<std::string, Sample>> samples;
  samples.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (static_cast<std::size_t>(images[i].label) >= classes_.size()) {
      fail(ErrorCode::kMalformedRow, "image label outside classes.txt");
    }
    samples.push_back({"image-" + std::to_string(i), Sample{image_features(images[i].pixels), images[i].label}});
  }
  const auto h = static_cast<std::size_t>(hidden_);
  set_data(std::move(samples), MlpSpec{{static_cast<std::size_t>(kImagePixels), h, classes_.size()}, false, dropout_});
}

Metrics ImageMlpLearner::evaluate_dataset(const Dataset& data) const {
  std::vector<Sample> samples;
  for (const auto& img : images_of(data, nullptr)) {
    samples.push_back({image_features(img.pixels), img.label});
  }
  return evaluate_samples(samples);
}

Artifacts ImageMlpLearner::save() const {
  std::string names;
  for (const auto& c : classes_) names += c + "\n";
  return {{"weights", model().serialize()}, {"labels", names}};
}

void ImageMlpLearner::restore(const Artifacts& artifacts) {
  for (const char* name : {"weights", "labels"}) {
    if (!artifacts.contains(name)) fail(ErrorCode::kMissingArtifact, std::string("missing artifact ") + name);
  }
  Mlp net = Mlp::deserialize(artifacts.at("weights"));
  classes_ = split_lines(artifacts.at("labels"));
  if (net.input_dim() != static_cast<std::size_t>(kImagePixels) || net.output_dim() != classes_.size()) {
    fail(ErrorCode::kShapeMismatch, "weights do not match image size or classes");
  }
  net_ = std::move(net);
}

json ImageMlpLearner::describe() const {
  json layers = json::array();
  if (net_) {
    for (const auto& L : net_->layout()) layers.push_back({{"in", L.cols}, {"out", L.rows}, {"layer_norm", L.norm}});
  }
  return {{"learner", kId},
          {"input", {kImageSide, kImageSide}},
          {"flatten", true},
          {"linear_layers", net_ ? net_->linear_layers() : 2},
          {"layers", layers},
          {"hidden", hidden_},
          {"classes", classes_}};
}

json ImageMlpLearner::serving_wrapper() const {
  return {{"init", {"weights", "labels"}},
          {"preprocess",
           json::array({{{"id", "flatten"}, {"params", {{"rows", kImageSide}, {"cols", kImageSide}}}},
                        {{"id", "scale"}, {"params", {{"divisor", 255}}}}})},
          {"postprocess", {{"id", "label-decode"}, {"params", {{"labels", "labels"}}}}},
          {"payload", "image"}};
}

std::vector<double> ImageMlpLearner::predict_scores(const json& payload) const {
  return model().predict_proba(image_payload_features(payload));
}

}  // namespace dlflow::learners
