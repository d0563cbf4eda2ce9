// mtjr/error.h

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

#ifndef MTJR_ERROR_H_
#define MTJR_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace mtjr {

enum class ErrorCode {
  kInvalidArgument,
  kShapeMismatch,
  kNotScalar,
  kTooShort,
  kEmptySequence,
  kEmptyUtterance,
  kInfeasibleAlignment,
  kBlankInTarget,
  kLengthMismatch,
  kLabelOutOfRange,
  kNonFinite,
  kDegenerateLength,
  kCorruptFile,
  kVersionMismatch,
  kIncompatibleCheckpoint,
  kEmptyReference,
  kConfig,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what),
        code_(code),
        message_(what) {}
  ErrorCode code() const { return code_; }
  // The text without the code prefix.
  const std::string &message() const { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace mtjr

#endif  // MTJR_ERROR_H_
