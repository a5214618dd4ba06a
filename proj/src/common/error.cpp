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

#include "common/error.hpp"

namespace dlflow {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kOk: return "ok";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kNotFound: return "not-found";
    case ErrorCode::kDuplicateName: return "duplicate-name";
    case ErrorCode::kInvalidName: return "invalid-name";
    case ErrorCode::kPathEscape: return "path-escape";
    case ErrorCode::kUnknownTransform: return "unknown-transform";
    case ErrorCode::kMissingInputRepo: return "missing-input-repo";
    case ErrorCode::kTransformFailure: return "transform-failure";
    case ErrorCode::kInvalidFraction: return "invalid-fraction";
    case ErrorCode::kDanglingPath: return "dangling-path";
    case ErrorCode::kMalformedRow: return "malformed-row";
    case ErrorCode::kNonMonotonicStep: return "non-monotonic-step";
    case ErrorCode::kNoCompletedTrials: return "no-completed-trials";
    case ErrorCode::kLearnerError: return "learner-error";
    case ErrorCode::kDataNotFound: return "data-not-found";
    case ErrorCode::kInvalidConfig: return "invalid-config";
    case ErrorCode::kMissingCheckpoint: return "missing-checkpoint";
    case ErrorCode::kPermissionDenied: return "permission-denied";
    case ErrorCode::kWrongStage: return "wrong-stage";
    case ErrorCode::kGateFailed: return "gate-failed";
    case ErrorCode::kMissingTestMetrics: return "missing-test-metrics";
    case ErrorCode::kSelfReviewDenied: return "self-review-denied";
    case ErrorCode::kMissingArtifact: return "missing-artifact";
    case ErrorCode::kNoProductionVersion: return "no-production-version";
    case ErrorCode::kEndpointConflict: return "endpoint-conflict";
    case ErrorCode::kMalformedPayload: return "malformed-payload";
    case ErrorCode::kIllegalTransition: return "illegal-transition";
    case ErrorCode::kShapeMismatch: return "shape-mismatch";
    case ErrorCode::kNonFiniteLoss: return "non-finite-loss";
    case ErrorCode::kEmptyDataset: return "empty-dataset";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

}  // namespace dlflow
