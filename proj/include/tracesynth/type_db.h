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

#ifndef TRACESYNTH_TYPE_DB_H_
#define TRACESYNTH_TYPE_DB_H_

// Per-syscall argument signatures and structure templates.
//
// Text format, one item per line ('#' comments and blank lines ignored):
//   S|<name>|<argc>|<slot>:<DirKind>[:<structid>];...
//   T|<structid>|<offset>:<Kind>[:<structid>];...;size=<bytes>
// DirKind is a direction char (I/O) followed by a kind char (S/H/P/A/F).
// `size=` may be omitted, in which case it is last offset + 8.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tracesynth {

// Values are modeled as 64-bit words; struct fields are word-granular.
inline constexpr uint64_t kWordBytes = 8;

enum class Direction : uint8_t { kIn, kOut };

enum class ArgKind : uint8_t {
  kScalar,
  kHandle,
  kPointer,
  kArray,
  kFunctionPointer,
};

char DirectionChar(Direction dir);
char KindChar(ArgKind kind);
std::optional<Direction> DirectionFromChar(char c);
std::optional<ArgKind> KindFromChar(char c);

// Pointer and Array slots carry pointee memory; nothing else does.
inline bool HasPointee(ArgKind kind) {
  return kind == ArgKind::kPointer || kind == ArgKind::kArray;
}

struct ArgTypeDescriptor {
  Direction direction = Direction::kIn;
  ArgKind kind = ArgKind::kScalar;
  std::string pointee;  // struct id; empty when the pointee is untyped

  bool operator==(const ArgTypeDescriptor &) const = default;
};

struct StructField {
  uint64_t offset = 0;
  ArgKind kind = ArgKind::kScalar;
  std::string nested;  // struct id of the pointed-to allocation, if any

  bool operator==(const StructField &) const = default;
};

struct StructTemplate {
  std::string id;
  std::vector<StructField> fields;
  uint64_t size = 0;

  bool operator==(const StructTemplate &) const = default;
};

using Signature = std::vector<ArgTypeDescriptor>;

// One field of a flattened layout. A field that points at another struct
// keeps that struct's layout in `nested` as a separate allocation plan; the
// nested words are never inlined into the parent's offsets.
struct FlatField {
  uint64_t offset = 0;
  ArgKind kind = ArgKind::kScalar;
  std::string nested_id;
  std::vector<FlatField> nested;

  bool operator==(const FlatField &) const = default;
};

class TypeDb {
 public:
  TypeDb() = default;

  // Throws Error(kDuplicateSignature / kMalformedLine). Call Resolve() after
  // all signatures and structs are in.
  void AddSignature(std::string name, Signature signature);
  void AddStruct(StructTemplate st);
  // Verifies every struct reference resolves and the struct graph is
  // acyclic. Throws kUnresolvedStruct / kCyclicStruct.
  void Resolve() const;

  // nullptr when absent.
  const Signature *Find(std::string_view name) const;
  const StructTemplate *FindStruct(std::string_view id) const;

  const std::map<std::string, Signature, std::less<>> &signatures() const {
    return signatures_;
  }
  const std::map<std::string, StructTemplate, std::less<>> &structs() const {
    return structs_;
  }

  bool operator==(const TypeDb &) const = default;

 private:
  std::map<std::string, Signature, std::less<>> signatures_;
  std::map<std::string, StructTemplate, std::less<>> structs_;
};

TypeDb LoadTypeDb(std::string_view text);
std::string SerializeTypeDb(const TypeDb &db);

// Throws Error(kNotFound) for unknown names.
const Signature &LookupSignature(const TypeDb &db, std::string_view name);

// Depth-first layout of a struct; see FlatField. Throws kUnresolvedStruct.
std::vector<FlatField> FlattenStruct(const TypeDb &db, std::string_view id);

// Total number of fields across all levels of a flattened layout.
std::size_t CountFields(const std::vector<FlatField> &layout);

// Bytes to allocate when staging memory for a Pointer/Array slot: the struct
// size when typed, one word otherwise.
uint64_t StagingSize(const TypeDb &db, const ArgTypeDescriptor &desc);

}  // namespace tracesynth

#endif  // TRACESYNTH_TYPE_DB_H_
