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

#ifndef TRACESYNTH_SCRIPT_IR_H_
#define TRACESYNTH_SCRIPT_IR_H_

// Language-agnostic script IR: struct definitions, named allocations, word
// writes, call invocations and return bindings. Scripts are executed by the
// simulated kernel and rewritten by synthesis, rectification and mutation.
//
// Text format (header `SCRIPT v1`, one op per line):
//   STRUCT st0
//   ALLOC var1 16
//   SETW var1 0 0x694
//   CALL c1 syscall1 args=0x2,0x0,0x0,&var1 out=3:var1 exp=0x0 from=r1
//   BINDRET var2 c1
// Operands: 0x<hex> literal, &varK address of an allocation, *varK word at
// offset 0 of an allocation, $varK a bound return value.
// `from=` is r<seq> for calls recovered from the trace and L<n>:<parent> for
// calls inserted at level n after <parent>.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tracesynth/dep_analysis.h"
#include "tracesynth/trace_model.h"
#include "tracesynth/type_db.h"

namespace tracesynth {

struct Operand {
  enum class Kind : uint8_t { kLiteral, kAddressOf, kContentOf, kReturnOf };

  Kind kind = Kind::kLiteral;
  uint64_t literal = 0;
  std::string var;

  static Operand Literal(uint64_t v) { return {Kind::kLiteral, v, {}}; }
  static Operand AddressOf(std::string v) {
    return {Kind::kAddressOf, 0, std::move(v)};
  }
  static Operand ContentOf(std::string v) {
    return {Kind::kContentOf, 0, std::move(v)};
  }
  static Operand ReturnOf(std::string v) {
    return {Kind::kReturnOf, 0, std::move(v)};
  }

  bool is_literal() const { return kind == Kind::kLiteral; }
  std::string ToString() const;
  static std::optional<Operand> Parse(std::string_view text);

  bool operator==(const Operand &) const = default;
};

struct DefineStructOp {
  std::string struct_id;
  bool operator==(const DefineStructOp &) const = default;
};

struct AllocOp {
  std::string var;
  uint64_t size = 0;
  bool operator==(const AllocOp &) const = default;
};

struct SetWordOp {
  std::string var;
  uint64_t offset = 0;
  Operand value;
  bool operator==(const SetWordOp &) const = default;
};

struct OutBinding {
  uint32_t slot = 0;
  std::string var;
  bool operator==(const OutBinding &) const = default;
};

struct InvokeOp {
  std::string call_id;
  std::string name;
  std::vector<Operand> args;
  std::vector<OutBinding> outs;
  int64_t expected_ret = 0;

  const OutBinding *FindOut(uint32_t slot) const;
  bool operator==(const InvokeOp &) const = default;
};

struct BindReturnOp {
  std::string var;
  std::string call_id;
  bool operator==(const BindReturnOp &) const = default;
};

using ScriptOp =
    std::variant<DefineStructOp, AllocOp, SetWordOp, InvokeOp, BindReturnOp>;

struct Provenance {
  bool inserted = false;
  uint64_t seq = 0;    // recovered calls
  int level = 0;       // inserted calls
  std::string parent;  // inserted calls

  static Provenance Recovered(uint64_t seq) { return {false, seq, 0, {}}; }
  static Provenance Inserted(int level, std::string parent) {
    return {true, 0, level, std::move(parent)};
  }
  std::string ToString() const;
  static std::optional<Provenance> Parse(std::string_view text);

  bool operator==(const Provenance &) const = default;
};

struct Script {
  std::vector<ScriptOp> ops;
  std::map<std::string, Provenance> provenance;

  // Index into `ops` of the call, or nullopt.
  std::optional<std::size_t> FindInvoke(std::string_view call_id) const;
  std::vector<std::size_t> InvokePositions() const;
  std::size_t InvokeCount() const;

  bool operator==(const Script &) const = default;
};

// Structural problems: duplicate call ids or var definitions, use before
// definition, provenance gaps, out-of-order recovered calls, and (when
// `types` is given) arity, direction and struct-reference mismatches. Empty
// means the script is valid.
std::vector<std::string> CheckScript(const Script &script,
                                     const TypeDb *types = nullptr);

// Fresh names that do not collide with anything in `script`.
class NameAllocator {
 public:
  explicit NameAllocator(const Script &script);
  std::string NextVar();
  std::string NextCall();

 private:
  uint64_t next_var_ = 1;
  uint64_t next_call_ = 1;
};

// Builds the replay script of a trace: every record becomes one call in
// trace order, pointer arguments are staged in named allocations, and slots
// covered by an edge are bound to the producer's staged output or return.
// Throws Error(kInconsistentEdge) when an edge does not fit the type DB.
Script RecoverModelScript(const TraceLog &log,
                          const std::vector<DependencyEdge> &edges,
                          const TypeDb &types);

// Allocation (plus nested allocations for typed pointer fields) staging one
// pointer argument. Appends ops to `out` and returns the top-level var.
std::string StagePointer(const TypeDb &types, const ArgTypeDescriptor &desc,
                         const std::optional<Pointee> &contents,
                         NameAllocator &names, std::vector<ScriptOp> &out);

std::string EmitScriptText(const Script &script);
// Throws Error(kMalformedScript).
Script LoadScript(std::string_view text);

}  // namespace tracesynth

#endif  // TRACESYNTH_SCRIPT_IR_H_
