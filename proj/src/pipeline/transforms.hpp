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
#include <string>
#include <vector>

#include "common/fs.hpp"
#include "common/hash.hpp"

namespace dlflow::pipeline {

struct InputFile {
  std::string path;
  HashId blob;
  std::string content;
};

struct TransformOutput {
  std::map<std::string, std::string> files;
  std::string log;
};

// Must be a pure function of (params, inputs).
using Transform =
    std::function<TransformOutput(const json& params, const std::vector<InputFile>& inputs)>;

class TransformRegistry {
 public:
  // Registry preloaded with clean_validate_text and split_dataset.
  static TransformRegistry with_builtins();

  void add(const std::string& id, Transform fn);
  [[nodiscard]] bool contains(const std::string& id) const;
  [[nodiscard]] const Transform& get(const std::string& id) const;
  [[nodiscard]] std::vector<std::string> ids() const;

 private:
  std::map<std::string, Transform> transforms_;
};

struct CleanValidateParams {
  std::size_t min_chars = 50;
  std::string extension = ".txt";

  static CleanValidateParams from_json(const json& params);
};

TransformOutput clean_validate_text(const CleanValidateParams& params,
                                    const std::vector<InputFile>& inputs);

// Exact fraction num/den in (0, 1).
struct Fraction {
  uint64_t num = 4;
  uint64_t den = 5;

  // Accepts a JSON number (decimal, up to 15 significant digits) or "p/q".
  static Fraction from_json(const json& value);
  [[nodiscard]] double value() const { return static_cast<double>(num) / den; }
};

struct SplitParams {
  Fraction train_fraction;
  uint64_t seed = 0;

  static SplitParams from_json(const json& params);
};

// True when (seed, path) routes to the train side: hash / 2^64 < fraction.
bool routes_to_train(const Fraction& fraction, uint64_t seed, std::string_view path);

TransformOutput split_dataset(const SplitParams& params, const std::vector<InputFile>& inputs);

}  // namespace dlflow::pipeline
