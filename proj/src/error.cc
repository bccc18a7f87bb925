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

#include "microest/error.h"

namespace microest {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kMissingColumn: return "MissingColumn";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kEmptyFile: return "EmptyFile";
    case ErrorCode::kAllMissingColumn: return "AllMissingColumn";
    case ErrorCode::kNegativeValue: return "NegativeValue";
    case ErrorCode::kSchemeMismatch: return "SchemeMismatch";
    case ErrorCode::kUnknownLabelValue: return "UnknownLabelValue";
    case ErrorCode::kSingleClass: return "SingleClass";
    case ErrorCode::kDegenerateData: return "DegenerateData";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kWrongModelKind: return "WrongModelKind";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kEmptyGrid: return "EmptyGrid";
    case ErrorCode::kSingleClassLabeled: return "SingleClassLabeled";
    case ErrorCode::kEmptyTraining: return "EmptyTraining";
    case ErrorCode::kUnfittedModel: return "UnfittedModel";
    case ErrorCode::kNoCandidates: return "NoCandidates";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kNoPositives: return "NoPositives";
    case ErrorCode::kUnknownEvent: return "UnknownEvent";
    case ErrorCode::kParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace microest
