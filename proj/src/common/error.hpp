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

#include <stdexcept>
#include <string>

namespace dlflow {

// Numeric values are part of the C API (dlflow_status) and must stay stable.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kNotFound = 2,
  kDuplicateName = 3,
  kInvalidName = 4,
  kPathEscape = 5,
  kUnknownTransform = 6,
  kMissingInputRepo = 7,
  kTransformFailure = 8,
  kInvalidFraction = 9,
  kDanglingPath = 10,
  kMalformedRow = 11,
  kNonMonotonicStep = 12,
  kNoCompletedTrials = 13,
  kLearnerError = 14,
  kDataNotFound = 15,
  kInvalidConfig = 16,
  kMissingCheckpoint = 17,
  kPermissionDenied = 18,
  kWrongStage = 19,
  kGateFailed = 20,
  kMissingTestMetrics = 21,
  kSelfReviewDenied = 22,
  kMissingArtifact = 23,
  kNoProductionVersion = 24,
  kEndpointConflict = 25,
  kMalformedPayload = 26,
  kIllegalTransition = 27,
  kShapeMismatch = 28,
  kNonFiniteLoss = 29,
  kEmptyDataset = 30,
  kIo = 31,
  kInternal = 32,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace dlflow
