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

#include "tracesynth/type_db.h"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tracesynth/error.h"
#include "tracesynth/text.h"

namespace tracesynth {

char DirectionChar(Direction dir) { return dir == Direction::kIn ? 'I' : 'O'; }

char KindChar(ArgKind kind) {
  switch (kind) {
    case ArgKind::kScalar: return 'S';
    case ArgKind::kHandle: return 'H';
    case ArgKind::kPointer: return 'P';
    case ArgKind::kArray: return 'A';
    case ArgKind::kFunctionPointer: return 'F';
  }
  return '?';
}

std::optional<Direction> DirectionFromChar(char c) {
  if (c == 'I') return Direction::kIn;
  if (c == 'O') return Direction::kOut;
  return std::nullopt;
}

std::optional<ArgKind> KindFromChar(char c) {
  switch (c) {
    case 'S': return ArgKind::kScalar;
    case 'H': return ArgKind::kHandle;
    case 'P': return ArgKind::kPointer;
    case 'A': return ArgKind::kArray;
    case 'F': return ArgKind::kFunctionPointer;
    default: return std::nullopt;
  }
}

void TypeDb::AddSignature(std::string name, Signature signature) {
  for (const auto &desc : signature) {
    if (!desc.pointee.empty() && !HasPointee(desc.kind)) {
      throw Error(ErrorCode::kMalformedLine,
                  name + ": struct reference on a non-pointer slot");
    }
    if (desc.direction == Direction::kOut && !HasPointee(desc.kind)) {
      throw Error(ErrorCode::kMalformedLine,
                  name + ": output slots must be Pointer or Array");
    }
  }
  if (signatures_.count(name) != 0) {
    throw Error(ErrorCode::kDuplicateSignature, name);
  }
  signatures_.emplace(std::move(name), std::move(signature));
}

void TypeDb::AddStruct(StructTemplate st) {
  if (st.size == 0) {
    throw Error(ErrorCode::kMalformedLine, st.id + ": zero-sized struct");
  }
  if (st.size % kWordBytes != 0) {
    throw Error(ErrorCode::kMalformedLine, st.id + ": size not word aligned");
  }
  for (std::size_t i = 0; i < st.fields.size(); ++i) {
    const auto &f = st.fields[i];
    if (f.offset % kWordBytes != 0) {
      throw Error(ErrorCode::kMalformedLine,
                  st.id + ": field offset not word aligned");
    }
    if (i > 0 && f.offset <= st.fields[i - 1].offset) {
      throw Error(ErrorCode::kMalformedLine,
                  st.id + ": field offsets must strictly increase");
    }
    if (!f.nested.empty() && !HasPointee(f.kind)) {
      throw Error(ErrorCode::kMalformedLine,
                  st.id + ": nested struct on a non-pointer field");
    }
  }
  if (!st.fields.empty() && st.size < st.fields.back().offset + kWordBytes) {
    throw Error(ErrorCode::kMalformedLine, st.id + ": size below last field");
  }
  if (structs_.count(st.id) != 0) {
    throw Error(ErrorCode::kMalformedLine, "duplicate struct " + st.id);
  }
  std::string id = st.id;
  structs_.emplace(std::move(id), std::move(st));
}

void TypeDb::Resolve() const {
  for (const auto &[name, sig] : signatures_) {
    for (const auto &desc : sig) {
      if (!desc.pointee.empty() && structs_.count(desc.pointee) == 0) {
        throw Error(ErrorCode::kUnresolvedStruct, desc.pointee);
      }
    }
  }
  // 0 = unvisited, 1 = on the DFS stack, 2 = done.
  std::map<std::string_view, int> color;
  auto visit = [&](auto &&self, const StructTemplate &st) -> void {
    color[st.id] = 1;
    for (const auto &f : st.fields) {
      if (f.nested.empty()) continue;
      auto it = structs_.find(f.nested);
      if (it == structs_.end()) {
        throw Error(ErrorCode::kUnresolvedStruct, f.nested);
      }
      int c = color[it->second.id];
      if (c == 1) throw Error(ErrorCode::kCyclicStruct, it->second.id);
      if (c == 0) self(self, it->second);
    }
    color[st.id] = 2;
  };
  for (const auto &[id, st] : structs_) {
    if (color[st.id] == 0) visit(visit, st);
  }
}

const Signature *TypeDb::Find(std::string_view name) const {
  auto it = signatures_.find(name);
  return it == signatures_.end() ? nullptr : &it->second;
}

const StructTemplate *TypeDb::FindStruct(std::string_view id) const {
  auto it = structs_.find(id);
  return it == structs_.end() ? nullptr : &it->second;
}

namespace {

[[noreturn]] void Malformed(std::size_t line, const std::string &why) {
  throw Error(ErrorCode::kMalformedLine, why, line);
}

void ParseSignatureLine(TypeDb &db, const std::vector<std::string_view> &f,
                        std::size_t line) {
  if (f.size() != 4) Malformed(line, "signature needs 4 fields");
  auto argc = ParseDecimal(f[2]);
  if (!argc) Malformed(line, "bad argc");
  Signature sig;
  if (!f[3].empty()) {
    for (auto item : Split(f[3], ';')) {
      auto parts = Split(item, ':');
      if (parts.size() < 2 || parts.size() > 3) Malformed(line, "bad slot");
      auto slot = ParseDecimal(parts[0]);
      if (!slot || *slot != sig.size()) {
        Malformed(line, "slots must be contiguous from 0");
      }
      if (parts[1].size() != 2) Malformed(line, "bad DirKind");
      auto dir = DirectionFromChar(parts[1][0]);
      auto kind = KindFromChar(parts[1][1]);
      if (!dir || !kind) Malformed(line, "bad DirKind");
      ArgTypeDescriptor desc{*dir, *kind, {}};
      if (parts.size() == 3) desc.pointee = std::string(parts[2]);
      sig.push_back(std::move(desc));
    }
  }
  if (sig.size() != *argc) Malformed(line, "argc does not match slot count");
  try {
    db.AddSignature(std::string(f[1]), std::move(sig));
  } catch (const Error &e) {
    if (e.code() == ErrorCode::kMalformedLine) Malformed(line, e.detail());
    throw;
  }
}

void ParseStructLine(TypeDb &db, const std::vector<std::string_view> &f,
                     std::size_t line) {
  if (f.size() != 3) Malformed(line, "struct needs 3 fields");
  StructTemplate st;
  st.id = std::string(f[1]);
  std::optional<uint64_t> size;
  if (!f[2].empty()) {
    for (auto item : Split(f[2], ';')) {
      if (item.substr(0, 5) == "size=") {
        size = ParseDecimal(item.substr(5));
        if (!size) Malformed(line, "bad size");
        continue;
      }
      if (size) Malformed(line, "size= must come last");
      auto parts = Split(item, ':');
      if (parts.size() < 2 || parts.size() > 3) Malformed(line, "bad field");
      auto offset = ParseDecimal(parts[0]);
      if (!offset || parts[1].size() != 1) Malformed(line, "bad field");
      auto kind = KindFromChar(parts[1][0]);
      if (!kind) Malformed(line, "bad field kind");
      StructField field{*offset, *kind, {}};
      if (parts.size() == 3) field.nested = std::string(parts[2]);
      st.fields.push_back(std::move(field));
    }
  }
  st.size = size ? *size
                 : (st.fields.empty() ? 0 : st.fields.back().offset + kWordBytes);
  try {
    db.AddStruct(std::move(st));
  } catch (const Error &e) {
    if (e.code() == ErrorCode::kMalformedLine) Malformed(line, e.detail());
    throw;
  }
}

}  // namespace

TypeDb LoadTypeDb(std::string_view text) {
  TypeDb db;
  std::size_t lineno = 0;
  for (auto raw : Lines(text)) {
    ++lineno;
    auto line = Trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto fields = Split(line, '|');
    if (fields[0] == "S") {
      ParseSignatureLine(db, fields, lineno);
    } else if (fields[0] == "T") {
      ParseStructLine(db, fields, lineno);
    } else {
      Malformed(lineno, "unknown record tag");
    }
  }
  db.Resolve();
  return db;
}

std::string SerializeTypeDb(const TypeDb &db) {
  std::string out;
  for (const auto &[id, st] : db.structs()) {
    out += "T|" + id + "|";
    for (const auto &f : st.fields) {
      out += std::to_string(f.offset) + ":" + KindChar(f.kind);
      if (!f.nested.empty()) out += ":" + f.nested;
      out += ";";
    }
    out += "size=" + std::to_string(st.size) + "\n";
  }
  for (const auto &[name, sig] : db.signatures()) {
    out += "S|" + name + "|" + std::to_string(sig.size()) + "|";
    for (std::size_t i = 0; i < sig.size(); ++i) {
      if (i > 0) out += ";";
      out += std::to_string(i) + ":" + DirectionChar(sig[i].direction) +
             KindChar(sig[i].kind);
      if (!sig[i].pointee.empty()) out += ":" + sig[i].pointee;
    }
    out += "\n";
  }
  return out;
}

const Signature &LookupSignature(const TypeDb &db, std::string_view name) {
  const Signature *sig = db.Find(name);
  if (sig == nullptr) throw Error(ErrorCode::kNotFound, std::string(name));
  return *sig;
}

std::vector<FlatField> FlattenStruct(const TypeDb &db, std::string_view id) {
  const StructTemplate *st = db.FindStruct(id);
  if (st == nullptr) throw Error(ErrorCode::kUnresolvedStruct, std::string(id));
  std::vector<FlatField> out;
  out.reserve(st->fields.size());
  for (const auto &f : st->fields) {
    FlatField flat{f.offset, f.kind, f.nested, {}};
    if (!f.nested.empty()) flat.nested = FlattenStruct(db, f.nested);
    out.push_back(std::move(flat));
  }
  return out;
}

std::size_t CountFields(const std::vector<FlatField> &layout) {
  std::size_t n = 0;
  for (const auto &f : layout) n += 1 + CountFields(f.nested);
  return n;
}

uint64_t StagingSize(const TypeDb &db, const ArgTypeDescriptor &desc) {
  if (!desc.pointee.empty()) {
    if (const StructTemplate *st = db.FindStruct(desc.pointee)) return st->size;
  }
  return kWordBytes;
}

}  // namespace tracesynth
