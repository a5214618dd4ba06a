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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "common/rng.hpp"

namespace dlflow::learners {

struct MlpSpec {
  // Layer widths from input to output; dims.size() - 1 linear layers.
  std::vector<std::size_t> dims;
  // Layer normalization on every hidden layer, applied before the ReLU.
  bool layer_norm = false;
  // Inverted dropout after every hidden activation at train time.
  double dropout = 0.0;
};

struct Example {
  std::span<const double> x;
  int label = 0;
};

// Offsets of one linear layer inside the flat parameter vector.
struct LayerLayout {
  std::size_t rows = 0;  // outputs
  std::size_t cols = 0;  // inputs
  std::size_t weight = 0;
  std::size_t bias = 0;
  bool norm = false;
  std::size_t gain = 0;
  std::size_t shift = 0;
};

// Fully connected classifier: hidden layers are linear -> [layer norm] ->
// ReLU -> [dropout], the output layer is linear -> softmax. All parameters
// live in one contiguous vector so gradients and pruning masks share its
// indexing.
class Mlp {
 public:
  static constexpr double kNormEpsilon = 1e-5;

  explicit Mlp(MlpSpec spec);

  // He-normal weights, zero biases, unit gains.
  void init(Rng& rng);

  [[nodiscard]] const MlpSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] std::size_t linear_layers() const noexcept { return layout_.size(); }
  [[nodiscard]] const std::vector<LayerLayout>& layout() const noexcept { return layout_; }
  [[nodiscard]] std::size_t input_dim() const { return spec_.dims.front(); }
  [[nodiscard]] std::size_t output_dim() const { return spec_.dims.back(); }

  [[nodiscard]] std::span<double> params() noexcept { return params_; }
  [[nodiscard]] std::span<const double> params() const noexcept { return params_; }
  // 1 for pruned weights that training must keep at zero.
  [[nodiscard]] const std::vector<uint8_t>& frozen() const noexcept { return frozen_; }
  [[nodiscard]] bool is_weight(std::size_t param_index) const;

  // Class probabilities with dropout disabled.
  [[nodiscard]] std::vector<double> predict_proba(std::span<const double> x) const;

  // Mean cross-entropy with dropout disabled.
  [[nodiscard]] double loss(std::span<const Example> batch) const;

  // Mean cross-entropy and its gradient. Dropout masks are drawn from
  // dropout_rng when it is non-null and the dropout rate is positive.
  double gradient(std::span<const Example> batch, std::span<double> grad,
                  Rng* dropout_rng) const;

  // One SGD step; returns the pre-update batch loss.
  double train_step(std::span<const Example> batch, double learning_rate, Rng& rng);

  // Zeroes and freezes the floor(fraction * weight_count) smallest-magnitude
  // weights across all layers; biases and norm parameters are untouched.
  void prune_magnitude(double fraction);
  [[nodiscard]] std::size_t weight_count() const;
  [[nodiscard]] std::size_t zero_weight_count() const;

  // "DLFW" magic, u32 version, dims, flags, then row-major little-endian
  // float64 parameters and the frozen mask.
  [[nodiscard]] std::string serialize() const;
  static Mlp deserialize(std::string_view bytes);

  bool operator==(const Mlp& other) const;

 private:
  void check_example(const Example& ex) const;

  MlpSpec spec_;
  std::vector<LayerLayout> layout_;
  std::vector<double> params_;
  std::vector<uint8_t> frozen_;
};

}  // namespace dlflow::learners
