// Copyright 2026 The evoqa Authors
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

#include "evoqa/error.hpp"

namespace evoqa {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
    case ErrorCode::kParseError:
      return "ParseError";
    case ErrorCode::kDuplicateDocId:
      return "DuplicateDocId";
    case ErrorCode::kDuplicateQid:
      return "DuplicateQid";
    case ErrorCode::kDomainError:
      return "DomainError";
    case ErrorCode::kMalformedTranscript:
      return "MalformedTranscript";
    case ErrorCode::kLengthMismatch:
      return "LengthMismatch";
    case ErrorCode::kEmptyGroup:
      return "EmptyGroup";
    case ErrorCode::kBackendUnavailable:
      return "BackendUnavailable";
    case ErrorCode::kContractViolation:
      return "ContractViolation";
    case ErrorCode::kEmptyCurriculum:
      return "EmptyCurriculum";
    case ErrorCode::kIoError:
      return "IoError";
    case ErrorCode::kInternal:
      return "Internal";
  }
  return "Internal";
}

}  // namespace evoqa
