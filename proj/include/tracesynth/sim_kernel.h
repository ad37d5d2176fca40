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

#ifndef TRACESYNTH_SIM_KERNEL_H_
#define TRACESYNTH_SIM_KERNEL_H_

// Deterministic simulated kernel. It executes Script IR against a handle
// table and word-addressed memory, generates ground-truth traces from call
// plans, and hosts plantable crash bugs.
//
// Spec file format:
//   Y|<name>|req:<slot>=<H|A|C|->;...|eff:<slot>=<handle|write:<bytes>>;...|ret:<0x<hex>|handle>|minout:<slot>=<bytes>;...
//   B|<name>|<pred>[&<pred>...]|<kind>
// Requirements: H live handle, A valid allocation, C live handle that the
// call closes, - anything. A predicate is <slot>[@<offset>]<op>0x<hex> with
// op one of == != < >; `@offset` reads the word at that byte offset of the
// slot's pointee.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tracesynth/dep_analysis.h"
#include "tracesynth/script_ir.h"
#include "tracesynth/trace_model.h"
#include "tracesynth/type_db.h"

namespace tracesynth {

// Negative statuses returned in-band for failed requirements.
inline constexpr int64_t kStatusAccessViolation = -0x5;
inline constexpr int64_t kStatusInvalidHandle = -0x8;

enum class Requirement : uint8_t {
  kAny,
  kLiveHandle,
  kValidAllocation,
  kCloseHandle,
};

struct OutputEffect {
  enum class Kind : uint8_t { kHandle, kWrite };
  uint32_t slot = 0;
  Kind kind = Kind::kWrite;
  uint64_t bytes = 0;  // kWrite only

  bool operator==(const OutputEffect &) const = default;
};

struct CrashPredicate {
  enum class Op : uint8_t { kEq, kNe, kLt, kGt };
  uint32_t slot = 0;
  std::optional<uint64_t> offset;
  Op op = Op::kEq;
  uint64_t value = 0;

  bool operator==(const CrashPredicate &) const = default;
};

struct CrashCondition {
  std::vector<CrashPredicate> all;  // conjunction
  std::string kind;

  bool operator==(const CrashCondition &) const = default;
};

struct SimSyscallSpec {
  std::string name;
  std::map<uint32_t, Requirement> requirements;
  std::vector<OutputEffect> effects;
  bool returns_handle = false;
  int64_t success_ret = 0;
  std::map<uint32_t, uint64_t> min_out_bytes;
  std::vector<CrashCondition> crash_conditions;

  bool operator==(const SimSyscallSpec &) const = default;
};

class SimSpecSet {
 public:
  void Add(SimSyscallSpec spec);
  const SimSyscallSpec *Find(std::string_view name) const;
  SimSyscallSpec *FindMutable(std::string_view name);
  const std::map<std::string, SimSyscallSpec, std::less<>> &specs() const {
    return specs_;
  }
  // Every spec must have a signature whose slots cover its requirements,
  // effects and minimums; effects must target Out slots.
  void CheckAgainst(const TypeDb &types) const;

  bool operator==(const SimSpecSet &) const = default;

 private:
  std::map<std::string, SimSyscallSpec, std::less<>> specs_;
};

SimSpecSet LoadSimSpecs(std::string_view text);
std::string SerializeSimSpecs(const SimSpecSet &specs);
CrashCondition ParseCrashCondition(std::string_view preds,
                                   std::string_view kind);

// Returns a copy with the condition added. Throws kUnknownSyscall.
SimSpecSet PlantBug(const SimSpecSet &specs, std::string_view name,
                    CrashCondition condition);

// Value windows. Trace generation and script execution number handles the
// same way, so a faithful replay reproduces handle-valued returns, but they
// allocate from disjoint address windows: a pointer copied verbatim from a
// trace never lands inside a script's allocation.
struct ValueWindows {
  uint64_t handle_base = 0;
  uint64_t address_base = 0;
  uint64_t cookie_base = 0;

  static ValueWindows Trace();
  static ValueWindows Execution();
};

struct Allocation {
  uint64_t base = 0;
  uint64_t size = 0;
  std::vector<uint64_t> words;
};

// Handle table + memory. One per execution; never shared.
class KernelState {
 public:
  explicit KernelState(ValueWindows windows, uint64_t salt = 0);

  uint64_t NewHandle();
  bool IsLive(uint64_t handle) const;
  void Close(uint64_t handle);
  uint64_t NewCookie();

  uint64_t Allocate(uint64_t size);
  // Allocation containing `address`, or nullptr.
  Allocation *Find(uint64_t address);
  const Allocation *Find(uint64_t address) const;
  // Word read; 0 outside any allocation.
  uint64_t ReadWord(uint64_t address) const;
  bool WriteWord(uint64_t address, uint64_t value);
  // Bytes from `address` to the end of its allocation (0 if none).
  uint64_t BytesAvailable(uint64_t address) const;

  std::size_t live_handle_count() const;

 private:
  ValueWindows windows_;
  uint64_t salt_;
  uint64_t next_handle_ = 0;
  uint64_t next_cookie_ = 0;
  uint64_t next_address_;
  std::map<uint64_t, bool> handles_;
  std::map<uint64_t, Allocation> memory_;  // keyed by base
};

enum class CallFate : uint8_t { kReturned, kCrashed, kOutputTooSmall };

struct CallOutcome {
  CallFate fate = CallFate::kReturned;
  int64_t ret = 0;
  std::string crash_kind;
};

// One call against `state`. Arguments are already-resolved words.
CallOutcome ExecuteCall(const SimSyscallSpec &spec,
                        const std::vector<uint64_t> &args, KernelState &state,
                        bool check_crashes = true);

enum class FaultKind : uint8_t { kBadInput, kHang };

enum class ExecStatus : uint8_t {
  kCompleted,
  kCrashed,
  kHung,
  kOutputTooSmall,
  kBadInput,
};

std::string_view ExecStatusName(ExecStatus status);

struct ExecOptions {
  // Virtual step budget; 0 means unlimited.
  uint64_t step_budget = 0;
  // Calls that misbehave no matter their arguments (models arguments whose
  // inferred type does not fit the occurrence).
  std::map<std::string, FaultKind> faults;
};

struct CallReturn {
  std::string call_id;
  int64_t ret = 0;
  bool operator==(const CallReturn &) const = default;
};

struct ExecResult {
  ExecStatus status = ExecStatus::kCompleted;
  std::vector<CallReturn> returns;  // calls that returned, in order
  std::string failing_call;         // set unless completed
  std::string crash_kind;           // kCrashed only
  uint64_t exec_steps = 0;          // call execution
  uint64_t setup_steps = 0;         // struct/alloc/setw/bindret
  std::size_t calls_executed = 0;

  bool completed() const { return status == ExecStatus::kCompleted; }
};

// Step costs.
inline constexpr uint64_t kSetupOpSteps = 1;
inline uint64_t CallSteps(std::size_t argc) { return 1 + argc; }

// Sequential interpretation of a script on a fresh kernel state. Throws
// Error(kUnknownSyscall) for calls without a spec or signature.
ExecResult ExecuteScript(const SimSpecSet &specs, const TypeDb &types,
                         const Script &script, const ExecOptions &opts = {});

// ---- Trace generation ----------------------------------------------------

struct WorkloadArg {
  enum class Kind : uint8_t {
    kLiteral,
    kNull,
    kFreshBuffer,
    kOutAddress,  // address of an earlier call's output buffer
    kOutContent,  // word 0 of an earlier call's output buffer
    kReturn,      // an earlier call's return value
  };
  Kind kind = Kind::kLiteral;
  uint64_t literal = 0;
  Pointee contents;                      // kFreshBuffer
  std::optional<uint64_t> size_override;  // kFreshBuffer
  std::size_t call = 0;                  // 1-based plan index for references
  uint32_t slot = 0;

  bool operator==(const WorkloadArg &) const = default;
};

struct WorkloadCall {
  std::string name;
  // Slots not listed default to a fresh buffer (Pointer/Array) or 0x0.
  std::map<uint32_t, WorkloadArg> args;

  bool operator==(const WorkloadCall &) const = default;
};

using Workload = std::vector<WorkloadCall>;

// Line format: W|<name>|<slot>=<arg>;...
// <arg>: 0x<hex> | null | new[/<bytes>][[<off>:0x<hex>,...]] | @<k>.ret |
//        @<k>.out<slot> | @<k>.out<slot>*
Workload ParseWorkload(std::string_view text);
std::string SerializeWorkload(const Workload &workload);

struct GeneratedTrace {
  TraceLog log;
  // Dependencies the plan actually realized, in trace order.
  std::vector<DependencyEdge> truth;
};

// Runs the plan, logging every call. Throws kEmptyWorkload,
// kUnknownSyscall, and kMalformedLine for references that do not point
// backwards.
GeneratedTrace GenerateTrace(const TypeDb &types, const SimSpecSet &specs,
                             const Workload &workload, uint64_t seed);

struct RandomTraceOptions {
  std::size_t length = 50;
  // Probability that an eligible input is given a colliding literal: a value
  // already present in the output table but not a real dependency.
  double collision_rate = 0.0;
  uint64_t seed = 1;
};

struct GeneratedRun {
  Workload workload;
  GeneratedTrace trace;
};

GeneratedRun GenerateRandomTrace(const TypeDb &types, const SimSpecSet &specs,
                                 const RandomTraceOptions &opts);

struct Universe {
  TypeDb types;
  SimSpecSet specs;
};

// A random but self-consistent set of signatures and specs: every output
// slot has an effect, and at least one call produces handles.
Universe MakeRandomUniverse(uint64_t seed, std::size_t syscall_count = 12);

}  // namespace tracesynth

#endif  // TRACESYNTH_SIM_KERNEL_H_
