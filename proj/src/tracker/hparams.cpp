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

#include "tracker/hparams.hpp"

#include <cmath>

#include "common/error.hpp"

namespace dlflow::tracker {
namespace {

[[noreturn]] void bad(const std::string& name, const std::string& why) {
  fail(ErrorCode::kInvalidConfig, "hyperparameter " + name + ": " + why);
}

Domain parse_domain(const std::string& name, const json& j) {
  Domain d;
  if (j.is_array()) {
    if (j.empty()) bad(name, "empty choice list");
    d.kind = Domain::Kind::kCategorical;
    d.values = j.get<std::vector<json>>();
    return d;
  }
  if (!j.is_object() || !j.contains("type")) {
    d.kind = Domain::Kind::kFixed;
    d.fixed = j;
    return d;
  }
  const auto type = j.at("type").get<std::string>();
  if (type == "categorical") {
    d.kind = Domain::Kind::kCategorical;
    d.values = j.at("values").get<std::vector<json>>();
    if (d.values.empty()) bad(name, "empty choice list");
    return d;
  }
  if (type != "int" && type != "float" && type != "double") bad(name, "unknown type " + type);
  if (!j.contains("lo") || !j.contains("hi")) bad(name, "range needs lo and hi");
  d.kind = type == "int" ? Domain::Kind::kInt : Domain::Kind::kFloat;
  d.lo = j.at("lo").get<double>();
  d.hi = j.at("hi").get<double>();
  const auto scale = j.value("scale", std::string("linear"));
  if (scale != "linear" && scale != "log") bad(name, "scale must be linear or log");
  d.log = scale == "log";
  if (!(d.lo < d.hi)) bad(name, "lo must be below hi");
  if (d.log && !(d.lo > 0.0)) bad(name, "log range needs lo > 0");
  if (d.kind == Domain::Kind::kInt && (d.lo != std::floor(d.lo) || d.hi != std::floor(d.hi))) {
    bad(name, "int range bounds must be integers");
  }
  return d;
}

}  // namespace

json Domain::to_json() const {
  switch (kind) {
    case Kind::kFixed:
      return fixed;
    case Kind::kCategorical:
      return {{"type", "categorical"}, {"values", values}};
    case Kind::kInt:
      return {{"type", "int"}, {"lo", static_cast<int64_t>(lo)}, {"hi", static_cast<int64_t>(hi)},
              {"scale", log ? "log" : "linear"}};
    case Kind::kFloat:
      return {{"type", "float"}, {"lo", lo}, {"hi", hi}, {"scale", log ? "log" : "linear"}};
  }
  return nullptr;
}

HyperparameterSpace HyperparameterSpace::from_json(const json& j) {
  HyperparameterSpace s;
  if (j.is_null()) return s;
  if (!j.is_object()) fail(ErrorCode::kInvalidConfig, "hparams must be a map");
  for (const auto& [name, value] : j.items()) s.domains_.emplace(name, parse_domain(name, value));
  return s;
}

bool HyperparameterSpace::is_fixed() const {
  for (const auto& [n, d] : domains_) {
    if (d.kind != Domain::Kind::kFixed) return false;
  }
  return true;
}

json HyperparameterSpace::sample(Rng& rng) const {
  json out = json::object();
  for (const auto& [name, d] : domains_) {
    switch (d.kind) {
      case Domain::Kind::kFixed:
        out[name] = d.fixed;
        break;
      case Domain::Kind::kCategorical:
        out[name] = d.values[rng.uniform_index(d.values.size())];
        break;
      case Domain::Kind::kInt: {
        const auto lo = static_cast<int64_t>(d.lo);
        const auto hi = static_cast<int64_t>(d.hi);
        if (d.log) {
          const double v = std::exp(rng.uniform(std::log(d.lo), std::log(d.hi + 1.0)));
          out[name] = std::min(hi, std::max(lo, static_cast<int64_t>(std::floor(v))));
        } else {
          out[name] = lo + static_cast<int64_t>(rng.uniform_index(static_cast<uint64_t>(hi - lo + 1)));
        }
        break;
      }
      case Domain::Kind::kFloat:
        out[name] = d.log ? std::exp(rng.uniform(std::log(d.lo), std::log(d.hi)))
                          : rng.uniform(d.lo, d.hi);
        break;
    }
  }
  return out;
}

std::vector<json> HyperparameterSpace::grid() const {
  std::vector<std::pair<std::string, std::vector<json>>> axes;
  for (const auto& [name, d] : domains_) {
    std::vector<json> vals;
    switch (d.kind) {
      case Domain::Kind::kFixed:
        vals.push_back(d.fixed);
        break;
      case Domain::Kind::kCategorical:
        vals = d.values;
        break;
      case Domain::Kind::kInt:
        for (auto v = static_cast<int64_t>(d.lo); v <= static_cast<int64_t>(d.hi); ++v) vals.emplace_back(v);
        break;
      case Domain::Kind::kFloat:
        bad(name, "float ranges cannot be searched by grid");
    }
    axes.emplace_back(name, std::move(vals));
  }
  std::vector<json> out{json::object()};
  for (const auto& [name, vals] : axes) {
    std::vector<json> next;
    for (const auto& partial : out) {
      for (const auto& v : vals) {
        json a = partial;
        a[name] = v;
        next.push_back(std::move(a));
      }
    }
    out = std::move(next);
  }
  return out;
}

json HyperparameterSpace::to_json() const {
  json out = json::object();
  for (const auto& [name, d] : domains_) out[name] = d.to_json();
  return out;
}

}  // namespace dlflow::tracker
