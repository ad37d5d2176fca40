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

#include "tracesynth/error.h"

#include <string>
#include <string_view>

namespace tracesynth {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kDuplicateSeq: return "DuplicateSeq";
    case ErrorCode::kNonMonotonicSeq: return "NonMonotonicSeq";
    case ErrorCode::kUnknownSyscall: return "UnknownSyscall";
    case ErrorCode::kCyclicStruct: return "CyclicStruct";
    case ErrorCode::kUnresolvedStruct: return "UnresolvedStruct";
    case ErrorCode::kDuplicateSignature: return "DuplicateSignature";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kInconsistentEdge: return "InconsistentEdge";
    case ErrorCode::kMalformedScript: return "MalformedScript";
    case ErrorCode::kUnknownTemplateSlot: return "UnknownTemplateSlot";
    case ErrorCode::kNotReproducible: return "NotReproducible";
    case ErrorCode::kDanglingEvent: return "DanglingEvent";
    case ErrorCode::kNeverHealthy: return "NeverHealthy";
    case ErrorCode::kEmptyWorkload: return "EmptyWorkload";
    case ErrorCode::kMalformedConfig: return "MalformedConfig";
    case ErrorCode::kChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

namespace {

std::string Compose(ErrorCode code, const std::string &message,
                    std::size_t line) {
  std::string out(ErrorCodeName(code));
  if (line != 0) out += "(line " + std::to_string(line) + ")";
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, std::string message, std::size_t line)
    : std::runtime_error(Compose(code, message, line)),
      code_(code),
      line_(line),
      detail_(std::move(message)) {}

}  // namespace tracesynth
