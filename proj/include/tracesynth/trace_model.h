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

#ifndef TRACESYNTH_TRACE_MODEL_H_
#define TRACESYNTH_TRACE_MODEL_H_

// Trace records and their canonical line format:
//
//   C|<seq>|<name>|<args>|<outputs>|ret:<signed-hex>
//
//   args    := `;`-joined  <slot>:<Dir><Kind>:0x<hex>[=[<off>:0x<hex>,...]]
//   outputs := `,`-joined  out:<slot>[=[<off>:0x<hex>,...]]   or `-`
//
// Lines starting with '#' are comments. A leading "# source: ..." comment is
// kept as the log's provenance string.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tracesynth/type_db.h"

namespace tracesynth {

// (byte offset, word) pairs, sorted by offset.
struct PointeeWord {
  uint64_t offset = 0;
  uint64_t value = 0;

  bool operator==(const PointeeWord &) const = default;
};
using Pointee = std::vector<PointeeWord>;

// Slots are unique and increasing within a record; ValidateTrace() also
// requires them to be contiguous from 0.
struct ArgValue {
  uint32_t slot = 0;
  Direction direction = Direction::kIn;
  ArgKind kind = ArgKind::kScalar;
  uint64_t raw = 0;
  std::optional<Pointee> pointee;

  bool operator==(const ArgValue &) const = default;
};

struct OutputValue {
  uint32_t slot = 0;
  std::optional<Pointee> pointee;

  bool operator==(const OutputValue &) const = default;
};

struct SyscallRecord {
  uint64_t seq = 0;
  std::string name;
  std::vector<ArgValue> args;
  std::vector<OutputValue> outputs;
  int64_t ret = 0;

  // Word at offset 0 of an output's post-call pointee, if captured.
  std::optional<uint64_t> OutputContent(uint32_t slot) const;
  const OutputValue *FindOutput(uint32_t slot) const;
  const ArgValue *FindArg(uint32_t slot) const;

  bool operator==(const SyscallRecord &) const = default;
};

struct TraceLog {
  std::vector<SyscallRecord> records;
  std::string source;

  bool operator==(const TraceLog &) const = default;
};

// "[<off>:0x<hex>,...]". ParsePointee throws Error(kMalformedLine, line).
Pointee ParsePointee(std::string_view text, std::size_t line = 0);
std::string FormatPointee(const Pointee &pointee);

// Throws Error(kMalformedLine / kDuplicateSeq / kNonMonotonicSeq).
TraceLog ParseTrace(std::string_view text);
std::string SerializeTrace(const TraceLog &log);
std::string SerializeRecord(const SyscallRecord &record);

enum class ViolationKind {
  kArityMismatch,
  kDirectionMismatch,
  kKindMismatch,
  kPointeeOnScalar,
  kMissingPointee,
  kOutputOnInputSlot,
  kOutputSlotMissing,
  kSlotGap,
};

std::string_view ViolationKindName(ViolationKind kind);

struct Violation {
  uint64_t seq = 0;
  uint32_t slot = 0;
  ViolationKind kind = ViolationKind::kArityMismatch;
  std::string reason;
};

// Empty iff every record agrees with the type DB. Throws
// Error(kUnknownSyscall) for names without a signature.
std::vector<Violation> ValidateTrace(const TraceLog &log, const TypeDb &types);

}  // namespace tracesynth

#endif  // TRACESYNTH_TRACE_MODEL_H_
