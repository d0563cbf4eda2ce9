// src/error.cc

// Copyright 2026  MTJR authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "mtjr/error.h"

namespace mtjr {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNotScalar: return "NotScalar";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kEmptySequence: return "EmptySequence";
    case ErrorCode::kEmptyUtterance: return "EmptyUtterance";
    case ErrorCode::kInfeasibleAlignment: return "InfeasibleAlignment";
    case ErrorCode::kBlankInTarget: return "BlankInTarget";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kLabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kDegenerateLength: return "DegenerateLength";
    case ErrorCode::kCorruptFile: return "CorruptFile";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kIncompatibleCheckpoint: return "IncompatibleCheckpoint";
    case ErrorCode::kEmptyReference: return "EmptyReference";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

}  // namespace mtjr
