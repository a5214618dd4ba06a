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
#include <string>
#include <string_view>
#include <vector>

namespace dlflow::learners {

// Lowercase, split on anything that is not an ASCII letter, Porter stem.
std::vector<std::string> tokenize(std::string_view text);

class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> tokens);

  // Most frequent tokens over all documents, ties lexicographic.
  static Vocabulary build(const std::vector<std::vector<std::string>>& documents,
                          std::size_t max_size);

  [[nodiscard]] std::size_t size() const noexcept { return tokens_.size(); }
  [[nodiscard]] const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  // -1 when out of vocabulary.
  [[nodiscard]] long index_of(std::string_view token) const;

  [[nodiscard]] std::string serialize() const;
  static Vocabulary deserialize(std::string_view text);

 private:
  std::vector<std::string> tokens_;
  std::vector<std::size_t> order_;  // indices sorted by token for lookup
};

std::vector<double> vectorize(const std::vector<std::string>& tokens, const Vocabulary& vocab);
std::vector<double> vectorize_text(std::string_view text, const Vocabulary& vocab);

// Category names sorted lexicographically; index is the class id.
class LabelEncoding {
 public:
  LabelEncoding() = default;
  explicit LabelEncoding(std::vector<std::string> categories);

  [[nodiscard]] std::size_t size() const noexcept { return names_.size(); }
  [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }
  [[nodiscard]] int encode(std::string_view name) const;
  [[nodiscard]] const std::string& decode(std::size_t id) const;

  [[nodiscard]] std::string serialize() const;
  static LabelEncoding deserialize(std::string_view text);

 private:
  std::vector<std::string> names_;
};

}  // namespace dlflow::learners
