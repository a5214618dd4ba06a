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

#include "tracker/asha.hpp"

#include <algorithm>

#include "common/error.hpp"

namespace dlflow::tracker {

void AshaParams::validate() const {
  if (min_resource < 1) fail(ErrorCode::kInvalidConfig, "min_resource must be at least 1");
  if (max_resource < min_resource) fail(ErrorCode::kInvalidConfig, "max_resource must be >= min_resource");
  if (reduction_factor < 2) fail(ErrorCode::kInvalidConfig, "reduction_factor must be at least 2");
  if (max_trials < 1) fail(ErrorCode::kInvalidConfig, "max_trials must be at least 1");
}

AshaScheduler::AshaScheduler(AshaParams params, bool maximize)
    : params_(params), maximize_(maximize) {
  params_.validate();
  int64_t budget = params_.min_resource;
  while (budget <= params_.max_resource / params_.reduction_factor) {
    budget *= params_.reduction_factor;
    ++top_rung_;
  }
  rungs_.resize(static_cast<std::size_t>(top_rung_) + 1);
}

int64_t AshaScheduler::resource(int rung) const {
  if (rung >= top_rung_) return params_.max_resource;
  int64_t r = params_.min_resource;
  for (int k = 0; k < rung; ++k) r *= params_.reduction_factor;
  return r;
}

std::vector<int> AshaScheduler::top_k(int rung) const {
  auto entries = rungs_.at(static_cast<std::size_t>(rung));
  std::sort(entries.begin(), entries.end(), [this](const auto& a, const auto& b) {
    if (a.second != b.second) return maximize_ ? a.second > b.second : a.second < b.second;
    return a.first < b.first;
  });
  const auto keep = entries.size() / static_cast<std::size_t>(params_.reduction_factor);
  std::vector<int> out;
  for (std::size_t i = 0; i < keep; ++i) out.push_back(entries[i].first);
  return out;
}

std::optional<int> AshaScheduler::promotable(int rung) const {
  for (int t : top_k(rung)) {
    if (!trials_[static_cast<std::size_t>(t)].promoted_from[static_cast<std::size_t>(rung)]) return t;
  }
  return std::nullopt;
}

bool AshaScheduler::running_at_or_below(int rung) const {
  return std::any_of(trials_.begin(), trials_.end(),
                     [rung](const TrialState& t) { return t.running_to && *t.running_to <= rung; });
}

bool AshaScheduler::any_running() const {
  return std::any_of(trials_.begin(), trials_.end(), [](const TrialState& t) { return t.running_to.has_value(); });
}

AshaScheduler::Decision AshaScheduler::decide() {
  auto promote = [this](int trial, int rung) {
    auto& t = trials_[static_cast<std::size_t>(trial)];
    t.promoted_from[static_cast<std::size_t>(rung)] = true;
    t.running_to = rung + 1;
    promotions_.push_back({trial, rung, rung + 1});
    return Decision{Action::kPromote, trial, rung + 1};
  };
  auto start_new = [this] {
    TrialState t;
    t.running_to = 0;
    t.promoted_from.assign(static_cast<std::size_t>(top_rung_) + 1, false);
    trials_.push_back(std::move(t));
    return Decision{Action::kStartNew, static_cast<int>(trials_.size()) - 1, 0};
  };
  const bool can_start = static_cast<int64_t>(trials_.size()) < params_.max_trials;

  if (params_.synchronous) {
    if (can_start) return start_new();
    for (int k = 0; k < top_rung_; ++k) {
      if (running_at_or_below(k)) return {Action::kWait};
      if (auto t = promotable(k)) return promote(*t, k);
    }
  } else {
    for (int k = top_rung_ - 1; k >= 0; --k) {
      if (auto t = promotable(k)) return promote(*t, k);
    }
    if (can_start) return start_new();
  }
  return any_running() ? Decision{Action::kWait} : Decision{Action::kHalt};
}

void AshaScheduler::report(int trial, int rung, double metric) {
  auto& t = trials_.at(static_cast<std::size_t>(trial));
  if (!t.running_to || *t.running_to != rung) {
    fail(ErrorCode::kInternal, "trial reported at a rung it was not scheduled for");
  }
  t.running_to.reset();
  t.completed_rung = rung;
  rungs_[static_cast<std::size_t>(rung)].emplace_back(trial, metric);
}

void AshaScheduler::report_error(int trial) {
  auto& t = trials_.at(static_cast<std::size_t>(trial));
  t.running_to.reset();
  t.errored = true;
}

int AshaScheduler::completed_rung(int trial) const {
  return trials_.at(static_cast<std::size_t>(trial)).completed_rung;
}

bool AshaScheduler::errored(int trial) const { return trials_.at(static_cast<std::size_t>(trial)).errored; }

bool AshaScheduler::running(int trial) const {
  return trials_.at(static_cast<std::size_t>(trial)).running_to.has_value();
}

json AshaScheduler::to_json() const {
  json rungs = json::array();
  for (std::size_t k = 0; k < rungs_.size(); ++k) {
    json completed = json::array();
    for (const auto& [t, m] : rungs_[k]) completed.push_back({{"trial", t}, {"metric", m}});
    rungs.push_back({{"rung", k}, {"resource", resource(static_cast<int>(k))}, {"completed", completed}});
  }
  json promos = json::array();
  for (const auto& p : promotions_) promos.push_back({{"trial", p.trial}, {"from", p.from}, {"to", p.to}});
  return {{"top_rung", top_rung_}, {"rungs", rungs}, {"promotions", promos}};
}

}  // namespace dlflow::tracker
