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

#ifndef TRACESYNTH_MUTATION_H_
#define TRACESYNTH_MUTATION_H_

// Type-aware argument mutation. Handles and dependency bindings are never
// touched; scalars and pointee words are mutated with a configurable
// probability once enough calls have executed.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tracesynth/rng.h"
#include "tracesynth/script_ir.h"
#include "tracesynth/type_db.h"

namespace tracesynth {

enum class Strategy : uint8_t { kBitFlip, kArithmetic, kBoundary, kRandom };

std::string_view StrategyName(Strategy s);

inline constexpr std::array<uint64_t, 6> kBoundaryValues = {
    0x0,        0x1,
    0x7FFFFFFF, 0xFFFFFFFF,
    0x7FFFFFFFFFFFFFFF, 0xFFFFFFFFFFFFFFFF,
};
inline constexpr int64_t kArithmeticMaxDelta = 16;

struct MutationConfig {
  double rate = 0.1;
  uint64_t threshold = 0;
  uint64_t seed = 1;
  // bitflip : arith : boundary : random
  std::array<double, 4> weights = {1, 1, 1, 1};

  // Throws Error(kMalformedConfig).
  void Validate() const;
};

struct MutationEvent {
  std::string call_id;
  std::optional<uint32_t> slot;  // argument mutation
  std::string var;               // pointee mutation
  uint64_t offset = 0;
  Strategy strategy = Strategy::kRandom;
  uint64_t before = 0;
  uint64_t after = 0;

  bool operator==(const MutationEvent &) const = default;
};

std::string FormatEvent(const MutationEvent &e);

uint64_t MutateConstant(uint64_t value, Strategy strategy, Rng &rng);
Strategy PickStrategy(const std::array<double, 4> &weights, Rng &rng);

struct PlanState;

// Indexes a script once so that planning each of its calls does not rescan
// it. `script` and `types` must outlive the planner.
class MutationPlanner {
 public:
  MutationPlanner(const Script &script, const TypeDb &types,
                  const MutationConfig &cfg);

  // Same contract as PlanCallMutation(). Throws kDanglingEvent for calls
  // that are not in the indexed script.
  std::vector<MutationEvent> Plan(const InvokeOp &invoke,
                                  uint64_t executed_count, Rng &rng) const;

 private:
  const Operand *WordBefore(const std::string &var, uint64_t offset,
                            std::size_t pos) const;
  bool IsEarlierOutput(const std::string &var, std::size_t pos) const;
  const std::vector<FlatField> &Layout(const std::string &id) const;
  void Maybe(PlanState &st, MutationEvent e, uint64_t before) const;
  void Word(PlanState &st, const std::string &var, uint64_t offset) const;
  void Fields(PlanState &st, const std::string &var,
              const std::vector<FlatField> *layout) const;

  const TypeDb &types_;
  MutationConfig cfg_;
  std::map<std::string, uint64_t> alloc_size_;
  std::map<std::pair<std::string, uint64_t>,
           std::vector<std::pair<std::size_t, Operand>>>
      words_;  // SETWs in op order
  std::map<std::string, std::size_t> call_pos_;
  std::map<std::string, std::size_t> out_pos_;  // first call writing the var
  mutable std::map<std::string, std::vector<FlatField>> layouts_;
};

// Events for one call of `script`. `executed_count` is the number of calls
// executed before this one; nothing is planned below the threshold.
std::vector<MutationEvent> PlanCallMutation(const Script &script,
                                            const InvokeOp &invoke,
                                            const TypeDb &types,
                                            const MutationConfig &cfg,
                                            uint64_t executed_count, Rng &rng);

// Rewrites literal arguments and SETW literals. Throws Error(kDanglingEvent)
// for events naming missing calls or allocations, or bound values.
Script ApplyMutations(const Script &script,
                      const std::vector<MutationEvent> &events);

}  // namespace tracesynth

#endif  // TRACESYNTH_MUTATION_H_
