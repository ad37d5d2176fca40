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

#ifndef TRACESYNTH_DEP_ANALYSIS_H_
#define TRACESYNTH_DEP_ANALYSIS_H_

// Dependency inference over a single trace.
//
// The trace is scanned front to back. Each record first has its input
// arguments matched against the output table (newest entry first), then its
// own outputs are appended: one entry per recorded output slot holding the
// pointer value and the word stored at it, followed by one entry for the
// return value when it is positive. An input is only looked up when its slot
// is handle-typed or its value looks like an address (six or more hex
// digits).
//
// Edge dump format, one edge per line:
//   D|<producer_seq>:<src>|<consumer_seq>:<slot>|<mode>
// where <src> is `ret` or `out<slot>` and <mode> is AddressReuse,
// ContentUse or ReturnUse.

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tracesynth/trace_model.h"
#include "tracesynth/type_db.h"

namespace tracesynth {

// Where a dependent value came from: the return value or an output slot.
struct ProducerSource {
  bool is_return = false;
  uint32_t slot = 0;  // ignored when is_return

  static ProducerSource Return() { return {true, 0}; }
  static ProducerSource Output(uint32_t slot) { return {false, slot}; }

  std::string ToString() const;
  static std::optional<ProducerSource> Parse(std::string_view text);

  auto operator<=>(const ProducerSource &) const = default;
};

enum class DepMode : uint8_t { kAddressReuse, kContentUse, kReturnUse };

std::string_view DepModeName(DepMode mode);
std::optional<DepMode> ParseDepMode(std::string_view text);

struct OutputTableEntry {
  std::size_t ordinal = 0;
  uint64_t producer_seq = 0;
  ProducerSource source;
  std::optional<uint64_t> address;
  std::optional<uint64_t> content;
  std::optional<int64_t> ret;
};

class OutputTable {
 public:
  const std::vector<OutputTableEntry> &entries() const { return entries_; }
  void Append(OutputTableEntry entry);

 private:
  std::vector<OutputTableEntry> entries_;
};

struct DependencyEdge {
  uint64_t producer_seq = 0;
  ProducerSource producer_source;
  uint64_t consumer_seq = 0;
  uint32_t consumer_slot = 0;
  DepMode mode = DepMode::kAddressReuse;

  auto operator<=>(const DependencyEdge &) const = default;
};

inline constexpr uint64_t kAddressLikeMin = 0x100000;

inline bool IsAddressLike(uint64_t value) { return value >= kAddressLikeMin; }

void RecordOutputs(OutputTable &table, const SyscallRecord &record,
                   const TypeDb &types);

struct ArgMatch {
  const OutputTableEntry *entry = nullptr;
  DepMode mode = DepMode::kAddressReuse;
};

// Newest-first scan; the first entry that matches by address, content or
// return value (tested in that order) wins.
std::optional<ArgMatch> MatchArgument(const OutputTable &table,
                                      const ArgValue &arg,
                                      const ArgTypeDescriptor &desc);

// Edges in trace order (consumer seq, then slot). Throws kUnknownSyscall.
std::vector<DependencyEdge> AnalyzeDependencies(const TraceLog &log,
                                                const TypeDb &types);

std::string SerializeEdges(const std::vector<DependencyEdge> &edges);
std::vector<DependencyEdge> ParseEdges(std::string_view text);

}  // namespace tracesynth

#endif  // TRACESYNTH_DEP_ANALYSIS_H_
