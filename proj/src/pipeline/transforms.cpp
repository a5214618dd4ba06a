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

#include "pipeline/transforms.hpp"

#include <cstdio>
#include <sstream>

#include "common/error.hpp"
#include "pipeline/utf8.hpp"

namespace dlflow::pipeline {
namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

Fraction parse_decimal(const std::string& text) {
  // text is a plain decimal such as "0.8" or "1e-1"; only plain forms are
  // accepted so the fraction is exact.
  Fraction f{0, 1};
  bool seen_point = false;
  int digits = 0;
  for (char c : text) {
    if (c == '.') {
      if (seen_point) fail(ErrorCode::kInvalidFraction, "bad fraction: " + text);
      seen_point = true;
      continue;
    }
    if (c < '0' || c > '9') fail(ErrorCode::kInvalidFraction, "bad fraction: " + text);
    if (++digits > 18) fail(ErrorCode::kInvalidFraction, "fraction too precise: " + text);
    f.num = f.num * 10 + static_cast<uint64_t>(c - '0');
    if (seen_point) f.den *= 10;
  }
  return f;
}

}  // namespace

TransformRegistry TransformRegistry::with_builtins() {
  TransformRegistry reg;
  reg.add("clean_validate_text", [](const json& params, const std::vector<InputFile>& in) {
    return clean_validate_text(CleanValidateParams::from_json(params), in);
  });
  reg.add("split_dataset", [](const json& params, const std::vector<InputFile>& in) {
    return split_dataset(SplitParams::from_json(params), in);
  });
  return reg;
}

void TransformRegistry::add(const std::string& id, Transform fn) {
  transforms_[id] = std::move(fn);
}

bool TransformRegistry::contains(const std::string& id) const {
  return transforms_.contains(id);
}

const Transform& TransformRegistry::get(const std::string& id) const {
  auto it = transforms_.find(id);
  if (it == transforms_.end()) fail(ErrorCode::kUnknownTransform, "unknown transform: " + id);
  return it->second;
}

std::vector<std::string> TransformRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, fn] : transforms_) out.push_back(id);
  return out;
}

CleanValidateParams CleanValidateParams::from_json(const json& params) {
  CleanValidateParams p;
  if (params.contains("min_chars")) {
    const auto& v = params.at("min_chars");
    if (!v.is_number_integer() || v.get<int64_t>() < 0) {
      fail(ErrorCode::kInvalidConfig, "min_chars must be a non-negative integer");
    }
    p.min_chars = v.get<std::size_t>();
  }
  if (params.contains("extension")) p.extension = params.at("extension").get<std::string>();
  return p;
}

TransformOutput clean_validate_text(const CleanValidateParams& params,
                                    const std::vector<InputFile>& inputs) {
  TransformOutput out;
  std::size_t wrong_ext = 0;
  std::size_t too_short = 0;
  std::size_t repaired = 0;
  for (const auto& file : inputs) {
    if (!ends_with(file.path, params.extension)) {
      ++wrong_ext;
      continue;
    }
    Utf8Result clean = sanitize_utf8(file.content);
    if (clean.code_points < params.min_chars) {
      ++too_short;
      continue;
    }
    if (clean.replacements > 0) ++repaired;
    out.files.emplace(file.path, std::move(clean.text));
  }
  std::ostringstream log;
  log << "clean_validate_text: inputs=" << inputs.size() << " kept=" << out.files.size()
      << " discarded_extension=" << wrong_ext << " discarded_short=" << too_short
      << " repaired_utf8=" << repaired << "\n";
  out.log = log.str();
  return out;
}

Fraction Fraction::from_json(const json& value) {
  Fraction f;
  if (value.is_string()) {
    const std::string s = value.get<std::string>();
    const auto slash = s.find('/');
    if (slash == std::string::npos) {
      f = parse_decimal(s);
    } else {
      try {
        f.num = std::stoull(s.substr(0, slash));
        f.den = std::stoull(s.substr(slash + 1));
      } catch (const std::exception&) {
        fail(ErrorCode::kInvalidFraction, "bad fraction: " + s);
      }
    }
  } else if (value.is_number()) {
    const double d = value.get<double>();
    if (!(d > 0.0 && d < 1.0)) {
      fail(ErrorCode::kInvalidFraction, "train_fraction must be in (0, 1)");
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15f", d);
    std::string s(buf);
    while (!s.empty() && s.back() == '0') s.pop_back();
    f = parse_decimal(s);
  } else {
    fail(ErrorCode::kInvalidFraction, "train_fraction must be a number or \"p/q\"");
  }
  if (f.den == 0 || f.num == 0 || f.num >= f.den) {
    fail(ErrorCode::kInvalidFraction, "train_fraction must be in (0, 1)");
  }
  return f;
}

SplitParams SplitParams::from_json(const json& params) {
  SplitParams p;
  if (!params.contains("train_fraction")) {
    fail(ErrorCode::kInvalidFraction, "missing train_fraction");
  }
  p.train_fraction = Fraction::from_json(params.at("train_fraction"));
  if (params.contains("seed")) p.seed = params.at("seed").get<uint64_t>();
  return p;
}

bool routes_to_train(const Fraction& fraction, uint64_t seed, std::string_view path) {
  __extension__ using u128 = unsigned __int128;
  const u128 lhs = static_cast<u128>(keyed_hash64(seed, path)) * fraction.den;
  const u128 rhs = static_cast<u128>(fraction.num) << 64;
  return lhs < rhs;
}

TransformOutput split_dataset(const SplitParams& params, const std::vector<InputFile>& inputs) {
  TransformOutput out;
  std::size_t train = 0;
  for (const auto& file : inputs) {
    if (routes_to_train(params.train_fraction, params.seed, file.path)) {
      out.files.emplace("train/" + file.path, file.content);
      ++train;
    } else {
      out.files.emplace("test/" + file.path, file.content);
    }
  }
  std::ostringstream log;
  log << "split_dataset: inputs=" << inputs.size() << " train=" << train
      << " test=" << inputs.size() - train << "\n";
  out.log = log.str();
  return out;
}

}  // namespace dlflow::pipeline
