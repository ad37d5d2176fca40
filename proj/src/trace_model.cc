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

#include "tracesynth/trace_model.h"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tracesynth/error.h"
#include "tracesynth/text.h"

namespace tracesynth {

namespace {

constexpr std::string_view kSourcePrefix = "# source: ";

[[noreturn]] void Malformed(std::size_t line, const std::string &why) {
  throw Error(ErrorCode::kMalformedLine, why, line);
}

ArgValue ParseArg(std::string_view item, std::optional<uint32_t> prev_slot,
                  std::size_t line) {
  ArgValue arg;
  std::string_view head = item;
  std::string_view pointee;
  if (auto eq = item.find('='); eq != std::string_view::npos) {
    head = item.substr(0, eq);
    pointee = item.substr(eq + 1);
  }
  auto parts = Split(head, ':');
  if (parts.size() != 3) Malformed(line, "argument needs slot:DirKind:value");
  auto slot = ParseDecimal(parts[0]);
  if (!slot || *slot > UINT32_MAX) Malformed(line, "bad argument slot");
  if (prev_slot && *slot <= *prev_slot) {
    Malformed(line, "argument slots must strictly increase");
  }
  arg.slot = static_cast<uint32_t>(*slot);
  if (parts[1].size() != 2) Malformed(line, "bad DirKind");
  auto dir = DirectionFromChar(parts[1][0]);
  auto kind = KindFromChar(parts[1][1]);
  if (!dir || !kind) Malformed(line, "bad DirKind");
  arg.direction = *dir;
  arg.kind = *kind;
  auto raw = ParseHex(parts[2]);
  if (!raw) Malformed(line, "bad argument value");
  arg.raw = *raw;
  if (item.find('=') != std::string_view::npos) {
    arg.pointee = ParsePointee(pointee, line);
  }
  return arg;
}

OutputValue ParseOutput(std::string_view item, std::size_t line) {
  if (item.substr(0, 4) != "out:") Malformed(line, "output must start out:");
  item.remove_prefix(4);
  OutputValue out;
  std::string_view slot_text = item;
  if (auto eq = item.find('='); eq != std::string_view::npos) {
    slot_text = item.substr(0, eq);
    out.pointee = ParsePointee(item.substr(eq + 1), line);
  }
  auto slot = ParseDecimal(slot_text);
  if (!slot || *slot > UINT32_MAX) Malformed(line, "bad output slot");
  out.slot = static_cast<uint32_t>(*slot);
  return out;
}

SyscallRecord ParseRecord(std::string_view line_text, std::size_t line) {
  auto f = SplitTopLevel(line_text, '|');
  if (f.size() != 6 || f[0] != "C") Malformed(line, "record needs 6 fields");
  SyscallRecord rec;
  auto seq = ParseDecimal(f[1]);
  if (!seq || *seq == 0) Malformed(line, "bad seq");
  rec.seq = *seq;
  if (f[2].empty()) Malformed(line, "empty syscall name");
  rec.name = std::string(f[2]);
  if (!f[3].empty()) {
    for (auto item : SplitTopLevel(f[3], ';')) {
      std::optional<uint32_t> prev;
      if (!rec.args.empty()) prev = rec.args.back().slot;
      rec.args.push_back(ParseArg(item, prev, line));
    }
  }
  if (f[4] != "-") {
    for (auto item : SplitTopLevel(f[4], ',')) {
      auto out = ParseOutput(item, line);
      if (!rec.outputs.empty() && out.slot <= rec.outputs.back().slot) {
        Malformed(line, "output slots must strictly increase");
      }
      rec.outputs.push_back(std::move(out));
    }
  }
  if (f[5].substr(0, 4) != "ret:") Malformed(line, "missing ret:");
  auto ret = ParseSignedHex(f[5].substr(4));
  if (!ret) Malformed(line, "bad return value");
  rec.ret = *ret;
  return rec;
}

}  // namespace

Pointee ParsePointee(std::string_view text, std::size_t line) {
  if (text.size() < 2 || text.front() != '[' || text.back() != ']') {
    Malformed(line, "pointee must be bracketed");
  }
  text = text.substr(1, text.size() - 2);
  Pointee out;
  if (text.empty()) return out;
  for (auto item : Split(text, ',')) {
    auto colon = item.find(':');
    if (colon == std::string_view::npos) Malformed(line, "bad pointee word");
    auto off = ParseDecimal(item.substr(0, colon));
    auto val = ParseHex(item.substr(colon + 1));
    if (!off || !val) Malformed(line, "bad pointee word");
    if (!out.empty() && *off <= out.back().offset) {
      Malformed(line, "pointee offsets must strictly increase");
    }
    out.push_back({*off, *val});
  }
  return out;
}

std::string FormatPointee(const Pointee &p) {
  std::string out = "[";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(p[i].offset) + ":" + Hex(p[i].value);
  }
  out += "]";
  return out;
}

const ArgValue *SyscallRecord::FindArg(uint32_t slot) const {
  for (const auto &a : args) {
    if (a.slot == slot) return &a;
  }
  return nullptr;
}

const OutputValue *SyscallRecord::FindOutput(uint32_t slot) const {
  for (const auto &o : outputs) {
    if (o.slot == slot) return &o;
  }
  return nullptr;
}

std::optional<uint64_t> SyscallRecord::OutputContent(uint32_t slot) const {
  const OutputValue *o = FindOutput(slot);
  if (o == nullptr || !o->pointee) return std::nullopt;
  for (const auto &w : *o->pointee) {
    if (w.offset == 0) return w.value;
  }
  return std::nullopt;
}

TraceLog ParseTrace(std::string_view text) {
  TraceLog log;
  std::size_t lineno = 0;
  bool first_content = true;
  for (auto line : Lines(text)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (first_content && log.records.empty() &&
          line.substr(0, kSourcePrefix.size()) == kSourcePrefix) {
        log.source = std::string(line.substr(kSourcePrefix.size()));
      }
      first_content = false;
      continue;
    }
    first_content = false;
    SyscallRecord rec = ParseRecord(line, lineno);
    if (!log.records.empty()) {
      uint64_t prev = log.records.back().seq;
      if (rec.seq == prev) {
        throw Error(ErrorCode::kDuplicateSeq,
                    "seq " + std::to_string(rec.seq), lineno);
      }
      if (rec.seq != prev + 1) {
        throw Error(ErrorCode::kNonMonotonicSeq,
                    "seq " + std::to_string(rec.seq) + " after " +
                        std::to_string(prev),
                    lineno);
      }
    } else if (rec.seq != 1) {
      throw Error(ErrorCode::kNonMonotonicSeq, "trace must start at seq 1",
                  lineno);
    }
    log.records.push_back(std::move(rec));
  }
  if (log.records.empty()) Malformed(0, "empty trace");
  return log;
}

std::string SerializeRecord(const SyscallRecord &rec) {
  std::string out = "C|" + std::to_string(rec.seq) + "|" + rec.name + "|";
  for (std::size_t i = 0; i < rec.args.size(); ++i) {
    const ArgValue &a = rec.args[i];
    if (i > 0) out += ";";
    out += std::to_string(a.slot) + ":" + DirectionChar(a.direction) +
           KindChar(a.kind) + ":" + Hex(a.raw);
    if (a.pointee) out += "=" + FormatPointee(*a.pointee);
  }
  out += "|";
  if (rec.outputs.empty()) {
    out += "-";
  } else {
    for (std::size_t i = 0; i < rec.outputs.size(); ++i) {
      if (i > 0) out += ",";
      out += "out:" + std::to_string(rec.outputs[i].slot);
      if (rec.outputs[i].pointee) out += "=" + FormatPointee(*rec.outputs[i].pointee);
    }
  }
  out += "|ret:" + SignedHex(rec.ret);
  return out;
}

std::string SerializeTrace(const TraceLog &log) {
  std::string out;
  if (!log.source.empty()) {
    out += kSourcePrefix;
    out += log.source;
    out += "\n";
  }
  for (const auto &rec : log.records) {
    out += SerializeRecord(rec);
    out += "\n";
  }
  return out;
}

std::string_view ViolationKindName(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kArityMismatch: return "ArityMismatch";
    case ViolationKind::kDirectionMismatch: return "DirectionMismatch";
    case ViolationKind::kKindMismatch: return "KindMismatch";
    case ViolationKind::kPointeeOnScalar: return "PointeeOnScalar";
    case ViolationKind::kMissingPointee: return "MissingPointee";
    case ViolationKind::kOutputOnInputSlot: return "OutputOnInputSlot";
    case ViolationKind::kOutputSlotMissing: return "OutputSlotMissing";
    case ViolationKind::kSlotGap: return "SlotGap";
  }
  return "Unknown";
}

std::vector<Violation> ValidateTrace(const TraceLog &log, const TypeDb &types) {
  std::vector<Violation> out;
  auto add = [&](uint64_t seq, uint32_t slot, ViolationKind kind,
                 std::string reason) {
    out.push_back({seq, slot, kind, std::move(reason)});
  };
  for (const auto &rec : log.records) {
    const Signature *sig = types.Find(rec.name);
    if (sig == nullptr) throw Error(ErrorCode::kUnknownSyscall, rec.name);
    if (rec.args.size() != sig->size()) {
      add(rec.seq, 0, ViolationKind::kArityMismatch,
          "expected " + std::to_string(sig->size()) + " args, got " +
              std::to_string(rec.args.size()));
    }
    for (std::size_t i = 0; i < rec.args.size(); ++i) {
      const ArgValue &a = rec.args[i];
      if (a.slot != i) {
        add(rec.seq, a.slot, ViolationKind::kSlotGap,
            "slots must be contiguous from 0");
      }
      if (a.slot >= sig->size()) continue;
      const ArgTypeDescriptor &d = (*sig)[a.slot];
      if (a.direction != d.direction) {
        add(rec.seq, a.slot, ViolationKind::kDirectionMismatch, "direction");
      }
      if (a.kind != d.kind) {
        add(rec.seq, a.slot, ViolationKind::kKindMismatch, "kind");
      }
      if (a.pointee && !HasPointee(d.kind)) {
        add(rec.seq, a.slot, ViolationKind::kPointeeOnScalar,
            "pointee on a non-pointer slot");
      }
      if (!a.pointee && HasPointee(d.kind)) {
        add(rec.seq, a.slot, ViolationKind::kMissingPointee,
            "pointer slot without pointee");
      }
    }
    for (const auto &o : rec.outputs) {
      if (o.slot >= sig->size()) {
        add(rec.seq, o.slot, ViolationKind::kOutputSlotMissing,
            "output slot beyond arity");
      } else if ((*sig)[o.slot].direction != Direction::kOut) {
        add(rec.seq, o.slot, ViolationKind::kOutputOnInputSlot,
            "output recorded for an input slot");
      }
    }
  }
  return out;
}

}  // namespace tracesynth
