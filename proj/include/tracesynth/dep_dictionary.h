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

#ifndef TRACESYNTH_DEP_DICTIONARY_H_
#define TRACESYNTH_DEP_DICTIONARY_H_

// The dependency dictionary: for each producer syscall name, the dependent
// successor calls seen consuming its outputs in successful executions.
//
// Dump format:
//   K|<producer>|<child>|<child_slot>|<mode>|<producer_source>|<taught_by>|<ret>
//   F|<slot>=0x<hex>[=[<off>:0x<hex>,...]][|bound]
// F lines follow their K line and list the teaching occurrence's other
// arguments. `bound` marks a slot that was itself a dependency in the
// teaching occurrence; its value is copied verbatim.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tracesynth/dep_analysis.h"
#include "tracesynth/trace_model.h"

namespace tracesynth {

struct FixedArg {
  uint64_t raw = 0;
  std::optional<Pointee> pointee;  // In-direction pointee, when captured
  bool bound = false;

  bool operator==(const FixedArg &) const = default;
};

struct DependentTemplate {
  std::string child_name;
  uint32_t child_slot = 0;
  DepMode mode = DepMode::kAddressReuse;
  ProducerSource producer_source;
  std::map<uint32_t, FixedArg> fixed_args;
  uint64_t taught_by = 0;
  int64_t taught_ret = 0;

  bool operator==(const DependentTemplate &) const = default;
};

struct LearnOptions {
  // Status zero is the common success status, so it counts by default.
  bool zero_is_success = true;
};

bool IsSuccess(const SyscallRecord &record, const LearnOptions &opts = {});

class DependencyDictionary {
 public:
  // Adds unless a template with the same (child_name, child_slot, mode,
  // producer_source) already exists under `producer`. Returns true if added.
  bool Add(const std::string &producer, DependentTemplate tmpl);

  const std::map<std::string, std::vector<DependentTemplate>, std::less<>> &
  entries() const {
    return entries_;
  }
  std::size_t TemplateCount() const;
  bool empty() const { return entries_.empty(); }

  bool operator==(const DependencyDictionary &) const = default;

 private:
  std::map<std::string, std::vector<DependentTemplate>, std::less<>> entries_;
};

DependencyDictionary LearnDictionary(const TraceLog &log,
                                     const std::vector<DependencyEdge> &edges,
                                     const LearnOptions &opts = {});

// Ordered by taught_by, then child slot. Empty when the name is absent.
std::vector<DependentTemplate> QueryChildren(const DependencyDictionary &dict,
                                             std::string_view name);

std::string SerializeDictionary(const DependencyDictionary &dict);
DependencyDictionary ParseDictionary(std::string_view text);

}  // namespace tracesynth

#endif  // TRACESYNTH_DEP_DICTIONARY_H_
