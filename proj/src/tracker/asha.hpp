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
#include <optional>
#include <utility>
#include <vector>

#include "common/fs.hpp"

namespace dlflow::tracker {

struct AshaParams {
  int64_t max_resource = 9;  // R
  int64_t min_resource = 1;  // r
  int64_t reduction_factor = 3;  // eta
  int64_t max_trials = 9;
  // Rung barrier: a rung is promoted from only once every trial that can
  // still reach it has reported. With one worker this is exactly
  // sequential successive halving.
  bool synchronous = true;

  void validate() const;
};

// Successive-halving promotion logic. Trials are dense indices in creation
// order; lower index wins metric ties. Resource at rung k is r * eta^k,
// except the top rung, which always trains to R.
class AshaScheduler {
 public:
  AshaScheduler(AshaParams params, bool maximize);

  enum class Action { kPromote, kStartNew, kWait, kHalt };
  struct Decision {
    Action action = Action::kHalt;
    int trial = -1;
    int rung = 0;  // rung the trial will train to
  };
  struct Promotion {
    int trial = 0;
    int from = 0;
    int to = 0;
  };

  // The single serialized decision point. kStartNew and kPromote mark the
  // trial as running until report() or report_error().
  Decision decide();
  void report(int trial, int rung, double metric);
  void report_error(int trial);

  [[nodiscard]] int top_rung() const noexcept { return top_rung_; }
  [[nodiscard]] int64_t resource(int rung) const;
  [[nodiscard]] const AshaParams& params() const noexcept { return params_; }
  [[nodiscard]] int trials_created() const noexcept { return static_cast<int>(trials_.size()); }

  // (trial, metric) pairs completed at each rung, in completion order.
  [[nodiscard]] const std::vector<std::vector<std::pair<int, double>>>& rungs() const noexcept {
    return rungs_;
  }
  [[nodiscard]] const std::vector<Promotion>& promotions() const noexcept { return promotions_; }
  // Highest rung the trial completed; -1 if none.
  [[nodiscard]] int completed_rung(int trial) const;
  [[nodiscard]] bool errored(int trial) const;
  [[nodiscard]] bool running(int trial) const;

  // Top floor(n_k / eta) trials at rung k, best first.
  [[nodiscard]] std::vector<int> top_k(int rung) const;

  [[nodiscard]] json to_json() const;

 private:
  struct TrialState {
    int completed_rung = -1;
    std::optional<int> running_to;
    bool errored = false;
    std::vector<bool> promoted_from;
  };

  std::optional<int> promotable(int rung) const;
  [[nodiscard]] bool running_at_or_below(int rung) const;
  [[nodiscard]] bool any_running() const;

  AshaParams params_;
  bool maximize_;
  int top_rung_ = 0;
  std::vector<TrialState> trials_;
  std::vector<std::vector<std::pair<int, double>>> rungs_;
  std::vector<Promotion> promotions_;
};

}  // namespace dlflow::tracker
