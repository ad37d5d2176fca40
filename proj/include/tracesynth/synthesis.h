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

#ifndef TRACESYNTH_SYNTHESIS_H_
#define TRACESYNTH_SYNTHESIS_H_

// Dependent-call insertion over a recovered script, and automated fault
// localization and rectification of scripts that do not run to completion.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tracesynth/dep_analysis.h"
#include "tracesynth/dep_dictionary.h"
#include "tracesynth/script_ir.h"
#include "tracesynth/sim_kernel.h"
#include "tracesynth/type_db.h"

namespace tracesynth {

struct InsertableSite {
  std::string call_id;
  std::string producer_name;
  std::vector<DependentTemplate> missing;  // in taught_by order
};

// Recovered calls whose name keys the dictionary and that lack at least one
// taught (child, slot, mode) triple as a dependent successor.
std::vector<InsertableSite> FindInsertableSites(
    const Script &script, const DependencyDictionary &dict,
    const std::vector<DependencyEdge> &edges);

// Calls inserted at `level`, each offering every template of its name.
std::vector<InsertableSite> FindInsertedSites(const Script &script,
                                              const DependencyDictionary &dict,
                                              int level);

struct LevelResult {
  Script script;
  std::vector<std::string> inserted;  // call ids, in script order
  // Templates whose producer output is not staged at the site.
  std::size_t skipped = 0;
};

// Throws Error(kUnknownTemplateSlot) when a template names a slot beyond the
// child's arity, and kUnknownSyscall for children without a signature.
LevelResult InsertLevel(const Script &script,
                        const std::vector<InsertableSite> &sites,
                        const TypeDb &types, int level);

struct SynthesisPlan {
  int levels = 0;
  std::size_t recovered_calls = 0;
  std::vector<std::vector<std::string>> per_level;  // index 0 is L1
  std::vector<std::size_t> skipped_per_level;

  std::size_t total_inserted() const;
};

struct SynthesisResult {
  Script script;
  SynthesisPlan plan;
};

SynthesisResult Synthesize(const Script &script,
                           const DependencyDictionary &dict,
                           const std::vector<DependencyEdge> &edges,
                           const TypeDb &types, int max_level);

// `SYNTH|...` lines: recovered count, per-level counts and ratios, total.
std::string FormatPlan(const SynthesisPlan &plan);

// ---- Localization and rectification ---------------------------------------

enum class FailureKind : uint8_t { kBadInput, kOutputTooSmall, kHang, kCrash };

std::string_view FailureKindName(FailureKind kind);
std::optional<FailureKind> ParseFailureKind(std::string_view text);

// What a localizer learns from one run: whether it was fatal, and of which
// kind, but not where.
struct Verdict {
  bool fatal = false;
  FailureKind kind = FailureKind::kCrash;
};

using Executor = std::function<Verdict(const Script &)>;

// `specs` and `types` must outlive the executor.
Executor SimExecutor(const SimSpecSet &specs, const TypeDb &types,
                     ExecOptions opts = {});

// The script cut after its k-th call (1-based), keeping that call's BINDRET.
Script InvokePrefix(const Script &script, std::size_t k);

struct Localization {
  std::string call_id;
  FailureKind kind = FailureKind::kCrash;
  std::size_t executions = 0;
};

// Binary search over call prefixes for the first call whose prefix is fatal.
// Throws Error(kNotReproducible) when the full script is healthy. Returns
// nullopt if the script has no calls.
std::optional<Localization> LocalizeFaultyCall(const Script &script,
                                               const Executor &executor);

inline constexpr uint64_t kEnlargeFactor = 8;

// BadInput, Hang and Crash remove the call and, transitively, every call
// bound to its outputs or return. OutputTooSmall multiplies the call's
// output allocations by `factor`. Unknown call ids leave the script as is.
Script Rectify(const Script &script, const std::string &call_id,
               FailureKind kind, uint64_t factor = kEnlargeFactor);

struct RectifyAction {
  std::string call_id;
  FailureKind kind = FailureKind::kCrash;
  std::string action;  // "enlarge x8", "enlarge x64", "discard"
};

struct RectifyResult {
  Script script;
  bool completed = false;
  std::size_t rounds = 0;
  std::size_t executions = 0;
  std::vector<RectifyAction> actions;
};

// Localize and rectify until the script runs to completion or `max_rounds`
// rectifications were applied. A call that keeps reporting OutputTooSmall
// is enlarged twice (x8, then x64 overall) and discarded the third time.
RectifyResult RectifyLoop(const Script &script, const Executor &executor,
                          std::size_t max_rounds = 64);

}  // namespace tracesynth

#endif  // TRACESYNTH_SYNTHESIS_H_
