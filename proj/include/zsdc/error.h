// Copyright 2026 The ZSDC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ZSDC_ERROR_H_
#define ZSDC_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace zsdc {

enum class ErrorCode {
  kInvalidArgument = 0,
  kFormat,
  kUnsupportedLayout,
  kIo,
  kInsufficientLength,
  kTrainingData,
  kIncompatibleLatent,
  kBadMagic,
  kTruncated,
  kVersionMismatch,
  kRecordTooLarge,
  kRetriable,
  kProtocol,
  kCorpusIntegrity,
  kContractViolation,
  kUndefinedAuroc,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported as zsdc::Error; the code distinguishes
// the error classes callers are expected to branch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace zsdc

#endif  // ZSDC_ERROR_H_
