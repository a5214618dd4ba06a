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

#include "learners/text_features.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "common/error.hpp"
#include "learners/porter_stemmer.hpp"

namespace dlflow::learners {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(porter_stem(cur));
      cur.clear();
    }
  };
  for (char c : text) {
    if (c >= 'A' && c <= 'Z') {
      cur.push_back(static_cast<char>(c - 'A' + 'a'));
    } else if (c >= 'a' && c <= 'z') {
      cur.push_back(c);
    } else {
      flush();
    }
  }
  flush();
  return out;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  std::set<std::string_view> seen;
  for (const auto& t : tokens_) {
    if (!seen.insert(t).second) fail(ErrorCode::kInvalidArgument, "duplicate vocabulary token: " + t);
  }
  order_.resize(tokens_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::sort(order_.begin(), order_.end(),
            [&](std::size_t a, std::size_t b) { return tokens_[a] < tokens_[b]; });
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& documents,
                             std::size_t max_size) {
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : documents) {
    for (const auto& t : doc) ++counts[t];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > max_size) ranked.resize(max_size);
  std::vector<std::string> tokens;
  tokens.reserve(ranked.size());
  for (auto& [t, c] : ranked) tokens.push_back(std::move(t));
  return Vocabulary(std::move(tokens));
}

long Vocabulary::index_of(std::string_view token) const {
  auto it = std::lower_bound(order_.begin(), order_.end(), token,
                             [&](std::size_t i, std::string_view t) { return tokens_[i] < t; });
  if (it == order_.end() || tokens_[*it] != token) return -1;
  return static_cast<long>(*it);
}

std::string Vocabulary::serialize() const {
  std::string out;
  for (const auto& t : tokens_) {
    out += t;
    out += '\n';
  }
  return out;
}

Vocabulary Vocabulary::deserialize(std::string_view text) {
  std::vector<std::string> tokens;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) tokens.push_back(line);
  }
  return Vocabulary(std::move(tokens));
}

std::vector<double> vectorize(const std::vector<std::string>& tokens, const Vocabulary& vocab) {
  std::vector<double> v(vocab.size(), 0.0);
  for (const auto& t : tokens) {
    const long i = vocab.index_of(t);
    if (i >= 0) v[static_cast<std::size_t>(i)] += 1.0;
  }
  return v;
}

std::vector<double> vectorize_text(std::string_view text, const Vocabulary& vocab) {
  return vectorize(tokenize(text), vocab);
}

LabelEncoding::LabelEncoding(std::vector<std::string> categories) {
  std::sort(categories.begin(), categories.end());
  categories.erase(std::unique(categories.begin(), categories.end()), categories.end());
  names_ = std::move(categories);
}

int LabelEncoding::encode(std::string_view name) const {
  auto it = std::lower_bound(names_.begin(), names_.end(), name);
  if (it == names_.end() || *it != name) {
    fail(ErrorCode::kInvalidArgument, "unknown category: " + std::string(name));
  }
  return static_cast<int>(it - names_.begin());
}

const std::string& LabelEncoding::decode(std::size_t id) const {
  if (id >= names_.size()) fail(ErrorCode::kInvalidArgument, "class id out of range");
  return names_[id];
}

std::string LabelEncoding::serialize() const {
  std::string out;
  for (const auto& n : names_) {
    out += n;
    out += '\n';
  }
  return out;
}

LabelEncoding LabelEncoding::deserialize(std::string_view text) {
  std::vector<std::string> names;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) names.push_back(line);
  }
  return LabelEncoding(std::move(names));
}

}  // namespace dlflow::learners
