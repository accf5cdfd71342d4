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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spdht {

enum class ErrorCode {
  kDuplicateObject,
  kUnknownObject,
  kNotAHolder,
  kConflictingObject,
  kNoCandidates,
  kAlreadyMember,
  kEmptyElectorate,
  kBelowThreshold,
  kNoMergeTarget,
  kNotAMember,
  kNoSurvivingSecondary,
  kInsufficientAgents,
  kAccessDenied,
  kUnknownRequest,
  kUnknownNode,
  kNotCrashed,
  kNotHeld,
  kInvalidArgument,
};

std::string_view to_string(ErrorCode code);

// Thrown by the pure protocol operations when a precondition is violated.
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& detail = {});

}  // namespace spdht
