// Copyright 2026 The Tracesynth Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TRACESYNTH_ERROR_H_
#define TRACESYNTH_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tracesynth {

enum class ErrorCode {
  kMalformedLine,
  kDuplicateSeq,
  kNonMonotonicSeq,
  kUnknownSyscall,
  kCyclicStruct,
  kUnresolvedStruct,
  kDuplicateSignature,
  kNotFound,
  kInconsistentEdge,
  kMalformedScript,
  kUnknownTemplateSlot,
  kNotReproducible,
  kDanglingEvent,
  kNeverHealthy,
  kEmptyWorkload,
  kMalformedConfig,
  kChecksumMismatch,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every domain failure in the library is reported with this exception.
// `line` is only meaningful for text-format errors (0 when not applicable).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::size_t line = 0);

  ErrorCode code() const { return code_; }
  std::size_t line() const { return line_; }
  // The message without the code/line prefix.
  const std::string &detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::size_t line_;
  std::string detail_;
};

}  // namespace tracesynth

#endif  // TRACESYNTH_ERROR_H_
