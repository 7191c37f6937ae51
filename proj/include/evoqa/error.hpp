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

#ifndef EVOQA_ERROR_HPP_
#define EVOQA_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace evoqa {

// Error families shared by the C++ core, the C API and the HTTP service.
enum class ErrorCode {
  kInvalidArgument,
  kParseError,
  kDuplicateDocId,
  kDuplicateQid,
  kDomainError,
  kMalformedTranscript,
  kLengthMismatch,
  kEmptyGroup,
  kBackendUnavailable,
  kContractViolation,
  kEmptyCurriculum,
  kIoError,
  kInternal,
};

// Stable machine-readable name, e.g. "DomainError".
std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Thrown by corpus and benchmark loaders; carries the 1-based line number.
class LineError : public Error {
 public:
  LineError(ErrorCode code, std::size_t line, const std::string& message)
      : Error(code, "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace evoqa

#endif  // EVOQA_ERROR_HPP_
