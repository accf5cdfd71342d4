// Copyright 2026 The spdht Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spdht/error.hpp"

namespace spdht {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDuplicateObject:
      return "DuplicateObject";
    case ErrorCode::kUnknownObject:
      return "UnknownObject";
    case ErrorCode::kNotAHolder:
      return "NotAHolder";
    case ErrorCode::kConflictingObject:
      return "ConflictingObject";
    case ErrorCode::kNoCandidates:
      return "NoCandidates";
    case ErrorCode::kAlreadyMember:
      return "AlreadyMember";
    case ErrorCode::kEmptyElectorate:
      return "EmptyElectorate";
    case ErrorCode::kBelowThreshold:
      return "BelowThreshold";
    case ErrorCode::kNoMergeTarget:
      return "NoMergeTarget";
    case ErrorCode::kNotAMember:
      return "NotAMember";
    case ErrorCode::kNoSurvivingSecondary:
      return "NoSurvivingSecondary";
    case ErrorCode::kInsufficientAgents:
      return "InsufficientAgents";
    case ErrorCode::kAccessDenied:
      return "AccessDenied";
    case ErrorCode::kUnknownRequest:
      return "UnknownRequest";
    case ErrorCode::kUnknownNode:
      return "UnknownNode";
    case ErrorCode::kNotCrashed:
      return "NotCrashed";
    case ErrorCode::kNotHeld:
      return "NotHeld";
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
  }
  return "Unknown";
}

ProtocolError::ProtocolError(ErrorCode code, const std::string& detail)
    : std::runtime_error(detail.empty() ? std::string(to_string(code))
                                        : std::string(to_string(code)) + ": " + detail),
      code_(code) {}

void fail(ErrorCode code, const std::string& detail) { throw ProtocolError(code, detail); }

}  // namespace spdht
