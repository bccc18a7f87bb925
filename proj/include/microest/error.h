// Copyright 2026 The Microest Authors.
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

#ifndef MICROEST_ERROR_H_
#define MICROEST_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace microest {

// Every failure the library reports carries one of these codes. The CLI
// serializes the code name into its machine-readable error record.
enum class ErrorCode {
  kInvalidArgument,
  kIoError,
  kMissingColumn,
  kDuplicateId,
  kEmptyFile,
  kAllMissingColumn,
  kNegativeValue,
  kSchemeMismatch,
  kUnknownLabelValue,
  kSingleClass,
  kDegenerateData,
  kDimensionMismatch,
  kWrongModelKind,
  kInvalidConfig,
  kInvalidSpec,
  kEmptyGrid,
  kSingleClassLabeled,
  kEmptyTraining,
  kUnfittedModel,
  kNoCandidates,
  kInvalidParams,
  kNoPositives,
  kUnknownEvent,
  kParseError,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace microest

#endif  // MICROEST_ERROR_H_
