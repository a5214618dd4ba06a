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

namespace dlflow {

// UTC seconds. In deterministic mode every reading is the fixed epoch so that
// commit ids and reports are reproducible across runs.
class Clock {
 public:
  static constexpr int64_t kDefaultEpoch = 1700000000;

  Clock() = default;
  Clock(bool deterministic, int64_t epoch)
      : deterministic_(deterministic), epoch_(epoch) {}

  [[nodiscard]] int64_t now() const;
  [[nodiscard]] int64_t now_micros() const;
  [[nodiscard]] bool deterministic() const noexcept { return deterministic_; }

 private:
  bool deterministic_ = false;
  int64_t epoch_ = kDefaultEpoch;
};

}  // namespace dlflow
