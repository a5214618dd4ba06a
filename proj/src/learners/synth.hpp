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

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace dlflow::learners {

inline constexpr std::array<const char*, 5> kNewsCategories = {
    "business", "entertainment", "politics", "sport", "tech"};

inline constexpr std::array<const char*, 10> kFashionClasses = {
    "T-shirt/top", "Trouser", "Pullover", "Dress", "Coat",
    "Sandal",      "Shirt",   "Sneaker",  "Bag",   "Ankle boot"};

struct CorpusOptions {
  std::vector<std::string> categories{kNewsCategories.begin(), kNewsCategories.end()};
  int docs_per_class = 100;
  uint64_t seed = 0;
  // Share of documents made too short to pass cleaning.
  double short_fraction = 0.02;
  // Share of documents carrying an invalid UTF-8 byte.
  double invalid_utf8_fraction = 0.02;
};

// Files `<category>/<NNNN>.txt` whose word distribution depends on the
// category. Same options, same bytes.
std::map<std::string, std::string> synth_corpus(const CorpusOptions& options);

inline constexpr int kImageSide = 28;
inline constexpr int kImagePixels = kImageSide * kImageSide;

struct Image {
  int label = 0;
  std::array<uint8_t, kImagePixels> pixels{};
};

// Per-class prototype silhouettes with random contrast, shift and noise.
// Prototypes are fixed; `seed` only drives the per-sample variation.
std::vector<Image> synth_images(int classes, int per_class, uint64_t seed);

// IDX3 (images) and IDX1 (labels) in the big-endian MNIST layout.
std::string encode_idx_images(const std::vector<Image>& images);
std::string encode_idx_labels(const std::vector<Image>& images);
std::vector<Image> decode_idx(std::string_view images_idx, std::string_view labels_idx);

}  // namespace dlflow::learners
