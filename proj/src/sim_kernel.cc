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

#include "tracesynth/sim_kernel.h"

#include <algorithm>
#include <utility>

#include "tracesynth/error.h"
#include "tracesynth/rng.h"
#include "tracesynth/text.h"

namespace tracesynth {
namespace {

uint64_t RoundUp(uint64_t v, uint64_t to) { return (v + to - 1) / to * to; }

char RequirementChar(Requirement r) {
  switch (r) {
    case Requirement::kLiveHandle: return 'H';
    case Requirement::kValidAllocation: return 'A';
    case Requirement::kCloseHandle: return 'C';
    case Requirement::kAny: break;
  }
  return '-';
}

std::optional<Requirement> RequirementFromText(std::string_view t) {
  if (t == "H") return Requirement::kLiveHandle;
  if (t == "A") return Requirement::kValidAllocation;
  if (t == "C") return Requirement::kCloseHandle;
  if (t == "-") return Requirement::kAny;
  return std::nullopt;
}

std::string_view OpText(CrashPredicate::Op op) {
  switch (op) {
    case CrashPredicate::Op::kEq: return "==";
    case CrashPredicate::Op::kNe: return "!=";
    case CrashPredicate::Op::kLt: return "<";
    case CrashPredicate::Op::kGt: return ">";
  }
  return "==";
}

uint32_t ParseSlot(std::string_view text, std::size_t line) {
  auto v = ParseDecimal(Trim(text));
  if (!v || *v > UINT32_MAX) {
    throw Error(ErrorCode::kMalformedLine, "bad slot '" + std::string(text) + "'",
                line);
  }
  return static_cast<uint32_t>(*v);
}

// Splits "key:rest" sections of a spec line.
std::optional<std::string_view> Section(std::string_view field,
                                        std::string_view key) {
  if (field.size() > key.size() && field.substr(0, key.size()) == key &&
      field[key.size()] == ':') {
    return field.substr(key.size() + 1);
  }
  if (field == key) return std::string_view{};
  return std::nullopt;
}

std::vector<std::pair<uint32_t, std::string_view>> ParseSlotList(
    std::string_view body, std::size_t line) {
  std::vector<std::pair<uint32_t, std::string_view>> out;
  for (auto item : Split(body, ';')) {
    item = Trim(item);
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kMalformedLine,
                  "expected slot=value, got '" + std::string(item) + "'", line);
    }
    out.emplace_back(ParseSlot(item.substr(0, eq), line), item.substr(eq + 1));
  }
  return out;
}

CrashPredicate ParsePredicate(std::string_view text, std::size_t line) {
  static constexpr std::pair<std::string_view, CrashPredicate::Op> kOps[] = {
      {"==", CrashPredicate::Op::kEq},
      {"!=", CrashPredicate::Op::kNe},
      {"<", CrashPredicate::Op::kLt},
      {">", CrashPredicate::Op::kGt},
  };
  for (const auto &[tok, op] : kOps) {
    auto pos = text.find(tok);
    if (pos == std::string_view::npos) continue;
    CrashPredicate p;
    p.op = op;
    std::string_view lhs = Trim(text.substr(0, pos));
    auto at = lhs.find('@');
    if (at != std::string_view::npos) {
      auto off = ParseDecimal(lhs.substr(at + 1));
      if (!off) {
        throw Error(ErrorCode::kMalformedLine,
                    "bad offset in '" + std::string(text) + "'", line);
      }
      p.offset = *off;
      lhs = lhs.substr(0, at);
    }
    p.slot = ParseSlot(lhs, line);
    auto v = ParseHex(Trim(text.substr(pos + tok.size())));
    if (!v) {
      throw Error(ErrorCode::kMalformedLine,
                  "bad value in '" + std::string(text) + "'", line);
    }
    p.value = *v;
    return p;
  }
  throw Error(ErrorCode::kMalformedLine,
              "no operator in predicate '" + std::string(text) + "'", line);
}

CrashCondition ParseCondition(std::string_view preds, std::string_view kind,
                              std::size_t line) {
  CrashCondition c;
  for (auto p : Split(preds, '&')) {
    if (Trim(p).empty()) continue;
    c.all.push_back(ParsePredicate(p, line));
  }
  if (c.all.empty()) {
    throw Error(ErrorCode::kMalformedLine, "crash condition has no predicate",
                line);
  }
  c.kind = std::string(Trim(kind));
  if (c.kind.empty()) {
    throw Error(ErrorCode::kMalformedLine, "crash condition has no kind", line);
  }
  return c;
}

std::string FormatCondition(const CrashCondition &c) {
  std::string out;
  for (std::size_t i = 0; i < c.all.size(); ++i) {
    const CrashPredicate &p = c.all[i];
    if (i > 0) out += "&";
    out += std::to_string(p.slot);
    if (p.offset) out += "@" + std::to_string(*p.offset);
    out += OpText(p.op);
    out += Hex(p.value);
  }
  return out;
}

bool Holds(const CrashPredicate &p, const std::vector<uint64_t> &args,
           const KernelState &state) {
  uint64_t v = p.slot < args.size() ? args[p.slot] : 0;
  if (p.offset) v = state.ReadWord(v + *p.offset);
  switch (p.op) {
    case CrashPredicate::Op::kEq: return v == p.value;
    case CrashPredicate::Op::kNe: return v != p.value;
    case CrashPredicate::Op::kLt: return v < p.value;
    case CrashPredicate::Op::kGt: return v > p.value;
  }
  return false;
}

}  // namespace

// ---- Spec sets -------------------------------------------------------------

void SimSpecSet::Add(SimSyscallSpec spec) {
  std::string name = spec.name;
  specs_[name] = std::move(spec);
}

const SimSyscallSpec *SimSpecSet::Find(std::string_view name) const {
  auto it = specs_.find(name);
  return it == specs_.end() ? nullptr : &it->second;
}

SimSyscallSpec *SimSpecSet::FindMutable(std::string_view name) {
  auto it = specs_.find(name);
  return it == specs_.end() ? nullptr : &it->second;
}

void SimSpecSet::CheckAgainst(const TypeDb &types) const {
  for (const auto &[name, spec] : specs_) {
    const Signature *sig = types.Find(name);
    if (sig == nullptr) {
      throw Error(ErrorCode::kUnknownSyscall, "spec for unknown syscall " + name);
    }
    auto check_slot = [&](uint32_t slot, std::string_view what) {
      if (slot >= sig->size()) {
        throw Error(ErrorCode::kMalformedConfig,
                    name + ": " + std::string(what) + " on missing slot " +
                        std::to_string(slot));
      }
    };
    for (const auto &[slot, req] : spec.requirements) check_slot(slot, "requirement");
    for (const auto &e : spec.effects) {
      check_slot(e.slot, "effect");
      if ((*sig)[e.slot].direction != Direction::kOut) {
        throw Error(ErrorCode::kMalformedConfig,
                    name + ": effect on input slot " + std::to_string(e.slot));
      }
    }
    for (const auto &[slot, bytes] : spec.min_out_bytes) check_slot(slot, "minout");
  }
}

SimSpecSet LoadSimSpecs(std::string_view text) {
  SimSpecSet set;
  std::size_t line_no = 0;
  for (auto raw : Lines(text)) {
    ++line_no;
    std::string_view line = Trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto fields = Split(line, '|');
    if (fields[0] == "Y") {
      if (fields.size() < 2 || Trim(fields[1]).empty()) {
        throw Error(ErrorCode::kMalformedLine, "spec line without a name", line_no);
      }
      SimSyscallSpec spec;
      spec.name = std::string(Trim(fields[1]));
      if (set.Find(spec.name)) {
        throw Error(ErrorCode::kDuplicateSignature, "duplicate spec " + spec.name,
                    line_no);
      }
      for (std::size_t i = 2; i < fields.size(); ++i) {
        std::string_view f = Trim(fields[i]);
        if (auto body = Section(f, "req")) {
          for (auto [slot, v] : ParseSlotList(*body, line_no)) {
            auto r = RequirementFromText(Trim(v));
            if (!r) {
              throw Error(ErrorCode::kMalformedLine,
                          "bad requirement '" + std::string(v) + "'", line_no);
            }
            if (*r != Requirement::kAny) spec.requirements[slot] = *r;
          }
        } else if (auto body = Section(f, "eff")) {
          for (auto [slot, v] : ParseSlotList(*body, line_no)) {
            OutputEffect e;
            e.slot = slot;
            v = Trim(v);
            if (v == "handle") {
              e.kind = OutputEffect::Kind::kHandle;
            } else if (auto w = Section(v, "write"); w && !w->empty()) {
              auto bytes = ParseDecimal(*w);
              if (!bytes || *bytes == 0) {
                throw Error(ErrorCode::kMalformedLine,
                            "bad write size '" + std::string(v) + "'", line_no);
              }
              e.kind = OutputEffect::Kind::kWrite;
              e.bytes = *bytes;
            } else {
              throw Error(ErrorCode::kMalformedLine,
                          "bad effect '" + std::string(v) + "'", line_no);
            }
            spec.effects.push_back(e);
          }
        } else if (auto body = Section(f, "ret")) {
          if (Trim(*body) == "handle") {
            spec.returns_handle = true;
          } else if (auto v = ParseSignedHex(Trim(*body))) {
            spec.success_ret = *v;
          } else {
            throw Error(ErrorCode::kMalformedLine,
                        "bad ret '" + std::string(*body) + "'", line_no);
          }
        } else if (auto body = Section(f, "minout")) {
          for (auto [slot, v] : ParseSlotList(*body, line_no)) {
            auto bytes = ParseDecimal(Trim(v));
            if (!bytes) {
              throw Error(ErrorCode::kMalformedLine,
                          "bad minout '" + std::string(v) + "'", line_no);
            }
            spec.min_out_bytes[slot] = *bytes;
          }
        } else if (!f.empty()) {
          throw Error(ErrorCode::kMalformedLine,
                      "unknown spec field '" + std::string(f) + "'", line_no);
        }
      }
      set.Add(std::move(spec));
    } else if (fields[0] == "B") {
      if (fields.size() != 4) {
        throw Error(ErrorCode::kMalformedLine, "bug line needs 4 fields", line_no);
      }
      SimSyscallSpec *spec = set.FindMutable(Trim(fields[1]));
      if (spec == nullptr) {
        throw Error(ErrorCode::kUnknownSyscall,
                    "bug for undeclared spec " + std::string(fields[1]), line_no);
      }
      spec->crash_conditions.push_back(
          ParseCondition(fields[2], fields[3], line_no));
    } else {
      throw Error(ErrorCode::kMalformedLine,
                  "unknown record '" + std::string(fields[0]) + "'", line_no);
    }
  }
  return set;
}

std::string SerializeSimSpecs(const SimSpecSet &specs) {
  std::string out;
  for (const auto &[name, spec] : specs.specs()) {
    out += "Y|" + name + "|req:";
    bool first = true;
    for (const auto &[slot, req] : spec.requirements) {
      if (!first) out += ";";
      first = false;
      out += std::to_string(slot) + "=" + RequirementChar(req);
    }
    out += "|eff:";
    first = true;
    for (const auto &e : spec.effects) {
      if (!first) out += ";";
      first = false;
      out += std::to_string(e.slot) + "=";
      out += e.kind == OutputEffect::Kind::kHandle
                 ? std::string("handle")
                 : "write:" + std::to_string(e.bytes);
    }
    out += "|ret:";
    out += spec.returns_handle ? std::string("handle") : SignedHex(spec.success_ret);
    out += "|minout:";
    first = true;
    for (const auto &[slot, bytes] : spec.min_out_bytes) {
      if (!first) out += ";";
      first = false;
      out += std::to_string(slot) + "=" + std::to_string(bytes);
    }
    out += "\n";
  }
  for (const auto &[name, spec] : specs.specs()) {
    for (const auto &c : spec.crash_conditions) {
      out += "B|" + name + "|" + FormatCondition(c) + "|" + c.kind + "\n";
    }
  }
  return out;
}

CrashCondition ParseCrashCondition(std::string_view preds,
                                   std::string_view kind) {
  return ParseCondition(preds, kind, 0);
}

SimSpecSet PlantBug(const SimSpecSet &specs, std::string_view name,
                    CrashCondition condition) {
  SimSpecSet copy = specs;
  SimSyscallSpec *spec = copy.FindMutable(name);
  if (spec == nullptr) {
    throw Error(ErrorCode::kUnknownSyscall,
                "cannot plant bug in " + std::string(name));
  }
  spec->crash_conditions.push_back(std::move(condition));
  return copy;
}

// ---- Kernel state ----------------------------------------------------------

ValueWindows ValueWindows::Trace() {
  return {0x100, 0x100000, 0x7f0000000000};
}

ValueWindows ValueWindows::Execution() {
  return {0x100, 0x10000000, 0x7e0000000000};
}

KernelState::KernelState(ValueWindows windows, uint64_t salt)
    : windows_(windows), salt_(salt), next_address_(windows.address_base) {}

uint64_t KernelState::NewHandle() {
  uint64_t h = windows_.handle_base + 4 * next_handle_++;
  handles_[h] = true;
  return h;
}

bool KernelState::IsLive(uint64_t handle) const {
  auto it = handles_.find(handle);
  return it != handles_.end() && it->second;
}

void KernelState::Close(uint64_t handle) {
  auto it = handles_.find(handle);
  if (it != handles_.end()) it->second = false;
}

uint64_t KernelState::NewCookie() {
  return windows_.cookie_base + ((salt_ & 0xffff) << 24) + 8 * next_cookie_++;
}

uint64_t KernelState::Allocate(uint64_t size) {
  uint64_t bytes = RoundUp(std::max<uint64_t>(size, kWordBytes), kWordBytes);
  Allocation a;
  a.base = next_address_;
  a.size = bytes;
  a.words.assign(bytes / kWordBytes, 0);
  // A guard gap keeps adjacent allocations from touching.
  next_address_ += RoundUp(bytes, 16) + 16;
  uint64_t base = a.base;
  memory_.emplace(base, std::move(a));
  return base;
}

Allocation *KernelState::Find(uint64_t address) {
  auto it = memory_.upper_bound(address);
  if (it == memory_.begin()) return nullptr;
  --it;
  return address < it->second.base + it->second.size ? &it->second : nullptr;
}

const Allocation *KernelState::Find(uint64_t address) const {
  auto it = memory_.upper_bound(address);
  if (it == memory_.begin()) return nullptr;
  --it;
  return address < it->second.base + it->second.size ? &it->second : nullptr;
}

uint64_t KernelState::ReadWord(uint64_t address) const {
  const Allocation *a = Find(address);
  if (a == nullptr) return 0;
  return a->words[(address - a->base) / kWordBytes];
}

bool KernelState::WriteWord(uint64_t address, uint64_t value) {
  Allocation *a = Find(address);
  if (a == nullptr) return false;
  a->words[(address - a->base) / kWordBytes] = value;
  return true;
}

uint64_t KernelState::BytesAvailable(uint64_t address) const {
  const Allocation *a = Find(address);
  return a == nullptr ? 0 : a->base + a->size - address;
}

std::size_t KernelState::live_handle_count() const {
  return static_cast<std::size_t>(
      std::count_if(handles_.begin(), handles_.end(),
                    [](const auto &kv) { return kv.second; }));
}

// ---- Execution -------------------------------------------------------------

CallOutcome ExecuteCall(const SimSyscallSpec &spec,
                        const std::vector<uint64_t> &args, KernelState &state,
                        bool check_crashes) {
  auto arg = [&](uint32_t slot) -> uint64_t {
    return slot < args.size() ? args[slot] : 0;
  };
  if (check_crashes) {
    for (const auto &c : spec.crash_conditions) {
      bool all = std::all_of(c.all.begin(), c.all.end(), [&](const auto &p) {
        return Holds(p, args, state);
      });
      if (all) return {CallFate::kCrashed, 0, c.kind};
    }
  }
  for (const auto &[slot, req] : spec.requirements) {
    uint64_t v = arg(slot);
    switch (req) {
      case Requirement::kLiveHandle:
      case Requirement::kCloseHandle:
        if (!state.IsLive(v)) return {CallFate::kReturned, kStatusInvalidHandle, {}};
        break;
      case Requirement::kValidAllocation:
        if (state.Find(v) == nullptr) {
          return {CallFate::kReturned, kStatusAccessViolation, {}};
        }
        break;
      case Requirement::kAny:
        break;
    }
  }
  for (const auto &e : spec.effects) {
    if (state.Find(arg(e.slot)) == nullptr) {
      return {CallFate::kReturned, kStatusAccessViolation, {}};
    }
  }
  for (const auto &[slot, bytes] : spec.min_out_bytes) {
    if (state.BytesAvailable(arg(slot)) < bytes) {
      return {CallFate::kOutputTooSmall, 0, {}};
    }
  }
  for (const auto &e : spec.effects) {
    uint64_t addr = arg(e.slot);
    if (e.kind == OutputEffect::Kind::kHandle) {
      state.WriteWord(addr, state.NewHandle());
    } else {
      uint64_t avail = state.BytesAvailable(addr);
      for (uint64_t off = 0; off + kWordBytes <= std::min(e.bytes, avail);
           off += kWordBytes) {
        state.WriteWord(addr + off, state.NewCookie());
      }
    }
  }
  int64_t ret = spec.returns_handle ? static_cast<int64_t>(state.NewHandle())
                                    : spec.success_ret;
  for (const auto &[slot, req] : spec.requirements) {
    if (req == Requirement::kCloseHandle) state.Close(arg(slot));
  }
  return {CallFate::kReturned, ret, {}};
}

std::string_view ExecStatusName(ExecStatus status) {
  switch (status) {
    case ExecStatus::kCompleted: return "Completed";
    case ExecStatus::kCrashed: return "Crash";
    case ExecStatus::kHung: return "Hang";
    case ExecStatus::kOutputTooSmall: return "OutputTooSmall";
    case ExecStatus::kBadInput: return "BadInput";
  }
  return "?";
}

ExecResult ExecuteScript(const SimSpecSet &specs, const TypeDb &types,
                         const Script &script, const ExecOptions &opts) {
  ExecResult result;
  KernelState state(ValueWindows::Execution());
  std::map<std::string, uint64_t> vars;
  std::map<std::string, int64_t> bound;
  std::map<std::string, int64_t> call_ret;

  auto resolve = [&](const Operand &o) -> uint64_t {
    switch (o.kind) {
      case Operand::Kind::kLiteral:
        return o.literal;
      case Operand::Kind::kAddressOf: {
        auto it = vars.find(o.var);
        return it == vars.end() ? 0 : it->second;
      }
      case Operand::Kind::kContentOf: {
        auto it = vars.find(o.var);
        return it == vars.end() ? 0 : state.ReadWord(it->second);
      }
      case Operand::Kind::kReturnOf: {
        auto it = bound.find(o.var);
        return it == bound.end() ? 0 : static_cast<uint64_t>(it->second);
      }
    }
    return 0;
  };
  auto over_budget = [&](uint64_t cost) {
    return opts.step_budget != 0 &&
           result.exec_steps + result.setup_steps + cost > opts.step_budget;
  };

  for (const auto &op : script.ops) {
    if (const auto *inv = std::get_if<InvokeOp>(&op)) {
      const SimSyscallSpec *spec = specs.Find(inv->name);
      if (spec == nullptr || types.Find(inv->name) == nullptr) {
        throw Error(ErrorCode::kUnknownSyscall, inv->name);
      }
      auto fault = opts.faults.find(inv->call_id);
      if (fault != opts.faults.end()) {
        result.status = fault->second == FaultKind::kHang ? ExecStatus::kHung
                                                          : ExecStatus::kBadInput;
        result.failing_call = inv->call_id;
        return result;
      }
      uint64_t cost = CallSteps(inv->args.size());
      if (over_budget(cost)) {
        result.status = ExecStatus::kHung;
        result.failing_call = inv->call_id;
        return result;
      }
      std::vector<uint64_t> args;
      args.reserve(inv->args.size());
      for (const auto &a : inv->args) args.push_back(resolve(a));
      CallOutcome outcome = ExecuteCall(*spec, args, state);
      result.exec_steps += cost;
      ++result.calls_executed;
      if (outcome.fate == CallFate::kCrashed) {
        result.status = ExecStatus::kCrashed;
        result.failing_call = inv->call_id;
        result.crash_kind = outcome.crash_kind;
        return result;
      }
      if (outcome.fate == CallFate::kOutputTooSmall) {
        result.status = ExecStatus::kOutputTooSmall;
        result.failing_call = inv->call_id;
        return result;
      }
      call_ret[inv->call_id] = outcome.ret;
      result.returns.push_back({inv->call_id, outcome.ret});
      continue;
    }
    if (over_budget(kSetupOpSteps)) {
      result.status = ExecStatus::kHung;
      return result;
    }
    result.setup_steps += kSetupOpSteps;
    if (const auto *a = std::get_if<AllocOp>(&op)) {
      vars[a->var] = state.Allocate(a->size);
    } else if (const auto *w = std::get_if<SetWordOp>(&op)) {
      auto it = vars.find(w->var);
      if (it != vars.end()) state.WriteWord(it->second + w->offset, resolve(w->value));
    } else if (const auto *b = std::get_if<BindReturnOp>(&op)) {
      auto it = call_ret.find(b->call_id);
      bound[b->var] = it == call_ret.end() ? 0 : it->second;
    }
  }
  return result;
}

// ---- Workloads -------------------------------------------------------------

namespace {

WorkloadArg ParseWorkloadArg(std::string_view t, std::size_t line) {
  t = Trim(t);
  WorkloadArg a;
  auto bad = [&]() {
    return Error(ErrorCode::kMalformedLine,
                 "bad workload argument '" + std::string(t) + "'", line);
  };
  if (t == "null") {
    a.kind = WorkloadArg::Kind::kNull;
  } else if (t.substr(0, 3) == "new") {
    a.kind = WorkloadArg::Kind::kFreshBuffer;
    std::string_view rest = t.substr(3);
    auto bracket = rest.find('[');
    std::string_view size_part = rest.substr(0, bracket);
    if (!size_part.empty()) {
      if (size_part[0] != '/') throw bad();
      auto bytes = ParseDecimal(size_part.substr(1));
      if (!bytes || *bytes == 0) throw bad();
      a.size_override = *bytes;
    }
    if (bracket != std::string_view::npos) {
      a.contents = ParsePointee(rest.substr(bracket), line);
    }
  } else if (t[0] == '@') {
    auto dot = t.find('.');
    if (dot == std::string_view::npos) throw bad();
    auto k = ParseDecimal(t.substr(1, dot - 1));
    if (!k || *k == 0) throw bad();
    a.call = *k;
    std::string_view src = t.substr(dot + 1);
    if (src == "ret") {
      a.kind = WorkloadArg::Kind::kReturn;
    } else if (src.substr(0, 3) == "out") {
      src = src.substr(3);
      a.kind = WorkloadArg::Kind::kOutAddress;
      if (!src.empty() && src.back() == '*') {
        a.kind = WorkloadArg::Kind::kOutContent;
        src.remove_suffix(1);
      }
      auto slot = ParseDecimal(src);
      if (!slot) throw bad();
      a.slot = static_cast<uint32_t>(*slot);
    } else {
      throw bad();
    }
  } else {
    auto v = ParseHex(t);
    if (!v) throw bad();
    a.literal = *v;
  }
  return a;
}

std::string FormatWorkloadArg(const WorkloadArg &a) {
  switch (a.kind) {
    case WorkloadArg::Kind::kLiteral: return Hex(a.literal);
    case WorkloadArg::Kind::kNull: return "null";
    case WorkloadArg::Kind::kFreshBuffer: {
      std::string s = "new";
      if (a.size_override) s += "/" + std::to_string(*a.size_override);
      if (!a.contents.empty()) s += FormatPointee(a.contents);
      return s;
    }
    case WorkloadArg::Kind::kOutAddress:
      return "@" + std::to_string(a.call) + ".out" + std::to_string(a.slot);
    case WorkloadArg::Kind::kOutContent:
      return "@" + std::to_string(a.call) + ".out" + std::to_string(a.slot) + "*";
    case WorkloadArg::Kind::kReturn:
      return "@" + std::to_string(a.call) + ".ret";
  }
  return "?";
}

}  // namespace

Workload ParseWorkload(std::string_view text) {
  Workload w;
  std::size_t line_no = 0;
  for (auto raw : Lines(text)) {
    ++line_no;
    std::string_view line = Trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto fields = Split(line, '|');
    if (fields.size() < 2 || fields.size() > 3 || fields[0] != "W" ||
        Trim(fields[1]).empty()) {
      throw Error(ErrorCode::kMalformedLine, "expected W|<name>|<args>", line_no);
    }
    WorkloadCall call;
    call.name = std::string(Trim(fields[1]));
    if (fields.size() == 3) {
      for (auto [slot, v] : ParseSlotList(fields[2], line_no)) {
        WorkloadArg a = ParseWorkloadArg(v, line_no);
        if (a.call >= w.size() + 1 && a.kind != WorkloadArg::Kind::kLiteral &&
            a.kind != WorkloadArg::Kind::kNull &&
            a.kind != WorkloadArg::Kind::kFreshBuffer) {
          throw Error(ErrorCode::kMalformedLine,
                      "reference to call " + std::to_string(a.call) +
                          " does not point backwards",
                      line_no);
        }
        call.args[slot] = std::move(a);
      }
    }
    w.push_back(std::move(call));
  }
  return w;
}

std::string SerializeWorkload(const Workload &workload) {
  std::string out;
  for (const auto &call : workload) {
    out += "W|" + call.name + "|";
    bool first = true;
    for (const auto &[slot, a] : call.args) {
      if (!first) out += ";";
      first = false;
      out += std::to_string(slot) + "=" + FormatWorkloadArg(a);
    }
    out += "\n";
  }
  return out;
}

// ---- Trace generation ------------------------------------------------------

namespace {

struct ProducedOutput {
  uint64_t address = 0;
  uint64_t content = 0;
  OutputEffect::Kind effect = OutputEffect::Kind::kWrite;
};

struct ProducedCall {
  int64_t ret = 0;
  bool ret_is_handle = false;
  std::map<uint32_t, ProducedOutput> outputs;  // logged outputs only
};

// Runs workload calls one at a time against a trace-window kernel.
class TraceBuilder {
 public:
  TraceBuilder(const TypeDb &types, const SimSpecSet &specs, uint64_t seed)
      : types_(types), specs_(specs), state_(ValueWindows::Trace(), seed) {}

  void Step(const WorkloadCall &call) {
    const std::size_t index = produced_.size() + 1;
    const Signature *sig = types_.Find(call.name);
    const SimSyscallSpec *spec = specs_.Find(call.name);
    if (sig == nullptr || spec == nullptr) {
      throw Error(ErrorCode::kUnknownSyscall, call.name, index);
    }
    SyscallRecord rec;
    rec.seq = index;
    rec.name = call.name;
    std::vector<uint64_t> args;
    for (uint32_t slot = 0; slot < sig->size(); ++slot) {
      const ArgTypeDescriptor &desc = (*sig)[slot];
      WorkloadArg a;
      auto it = call.args.find(slot);
      if (it != call.args.end()) {
        a = it->second;
      } else if (HasPointee(desc.kind)) {
        a.kind = WorkloadArg::Kind::kFreshBuffer;
      }
      args.push_back(Resolve(a, desc, index, slot));
    }
    for (uint32_t slot = 0; slot < sig->size(); ++slot) {
      const ArgTypeDescriptor &desc = (*sig)[slot];
      ArgValue av{slot, desc.direction, desc.kind, args[slot], std::nullopt};
      if (HasPointee(desc.kind)) av.pointee = Capture(args[slot], desc);
      rec.args.push_back(std::move(av));
    }
    CallOutcome outcome = ExecuteCall(*spec, args, state_, false);
    if (outcome.fate != CallFate::kReturned) {
      throw Error(ErrorCode::kMalformedConfig,
                  call.name + ": output buffer below the declared minimum",
                  index);
    }
    rec.ret = outcome.ret;
    ProducedCall produced;
    produced.ret = outcome.ret;
    produced.ret_is_handle = spec->returns_handle;
    if (outcome.ret >= 0) {
      for (uint32_t slot = 0; slot < sig->size(); ++slot) {
        const ArgTypeDescriptor &desc = (*sig)[slot];
        if (desc.direction != Direction::kOut || args[slot] == 0) continue;
        if (state_.Find(args[slot]) == nullptr) continue;
        Pointee p = Capture(args[slot], desc);
        rec.outputs.push_back({slot, p});
        ProducedOutput po;
        po.address = args[slot];
        po.content = state_.ReadWord(args[slot]);
        for (const auto &e : spec->effects) {
          if (e.slot == slot) po.effect = e.kind;
        }
        produced.outputs[slot] = po;
      }
    }
    produced_.push_back(std::move(produced));
    trace_.log.records.push_back(std::move(rec));
  }

  const std::vector<ProducedCall> &produced() const { return produced_; }
  GeneratedTrace Take() { return std::move(trace_); }

 private:
  uint64_t Resolve(const WorkloadArg &a, const ArgTypeDescriptor &desc,
                   std::size_t index, uint32_t slot) {
    auto producer = [&]() -> const ProducedCall & {
      if (a.call == 0 || a.call >= index) {
        throw Error(ErrorCode::kMalformedLine,
                    "reference to call " + std::to_string(a.call) +
                        " does not point backwards",
                    index);
      }
      return produced_[a.call - 1];
    };
    auto edge = [&](ProducerSource src, DepMode mode) {
      trace_.truth.push_back({a.call, src, index, slot, mode});
    };
    switch (a.kind) {
      case WorkloadArg::Kind::kLiteral:
        return a.literal;
      case WorkloadArg::Kind::kNull:
        return 0;
      case WorkloadArg::Kind::kFreshBuffer:
        return Stage(desc.pointee,
                     a.size_override.value_or(StagingSize(types_, desc)),
                     a.contents);
      case WorkloadArg::Kind::kOutAddress:
      case WorkloadArg::Kind::kOutContent: {
        const ProducedCall &p = producer();
        auto it = p.outputs.find(a.slot);
        if (it == p.outputs.end()) return 0;
        bool address = a.kind == WorkloadArg::Kind::kOutAddress;
        edge(ProducerSource::Output(a.slot),
             address ? DepMode::kAddressReuse : DepMode::kContentUse);
        return address ? it->second.address : it->second.content;
      }
      case WorkloadArg::Kind::kReturn: {
        const ProducedCall &p = producer();
        if (p.ret > 0) edge(ProducerSource::Return(), DepMode::kReturnUse);
        return static_cast<uint64_t>(p.ret);
      }
    }
    return 0;
  }

  uint64_t Stage(const std::string &struct_id, uint64_t size,
                 const Pointee &contents) {
    uint64_t base = state_.Allocate(size);
    std::set<uint64_t> nested_written;
    if (!struct_id.empty()) {
      const StructTemplate *st = types_.FindStruct(struct_id);
      if (st == nullptr) throw Error(ErrorCode::kUnresolvedStruct, struct_id);
      for (const auto &f : st->fields) {
        if (f.nested.empty() || f.offset + kWordBytes > size) continue;
        bool given = std::any_of(contents.begin(), contents.end(),
                                 [&](const auto &w) { return w.offset == f.offset; });
        if (given) continue;
        const StructTemplate *inner = types_.FindStruct(f.nested);
        if (inner == nullptr) throw Error(ErrorCode::kUnresolvedStruct, f.nested);
        state_.WriteWord(base + f.offset, Stage(f.nested, inner->size, {}));
      }
    }
    for (const auto &w : contents) {
      if (w.offset + kWordBytes <= size) state_.WriteWord(base + w.offset, w.value);
    }
    return base;
  }

  Pointee Capture(uint64_t address, const ArgTypeDescriptor &desc) const {
    Pointee p;
    if (address == 0) return p;
    uint64_t window = std::min(StagingSize(types_, desc), state_.BytesAvailable(address));
    for (uint64_t off = 0; off + kWordBytes <= window; off += kWordBytes) {
      p.push_back({off, state_.ReadWord(address + off)});
    }
    return p;
  }

  const TypeDb &types_;
  const SimSpecSet &specs_;
  KernelState state_;
  std::vector<ProducedCall> produced_;
  GeneratedTrace trace_;
};

}  // namespace

GeneratedTrace GenerateTrace(const TypeDb &types, const SimSpecSet &specs,
                             const Workload &workload, uint64_t seed) {
  if (workload.empty()) throw Error(ErrorCode::kEmptyWorkload, "empty workload");
  TraceBuilder builder(types, specs, seed);
  for (const auto &call : workload) builder.Step(call);
  GeneratedTrace out = builder.Take();
  out.log.source = "sim:" + std::to_string(seed);
  return out;
}

GeneratedRun GenerateRandomTrace(const TypeDb &types, const SimSpecSet &specs,
                                 const RandomTraceOptions &opts) {
  if (opts.length == 0) throw Error(ErrorCode::kEmptyWorkload, "length 0");
  std::vector<std::string> names;
  for (const auto &[name, sig] : types.signatures()) {
    if (specs.Find(name)) names.push_back(name);
  }
  if (names.empty()) throw Error(ErrorCode::kEmptyWorkload, "no runnable syscalls");

  Rng rng(opts.seed);
  TraceBuilder builder(types, specs, opts.seed);
  GeneratedRun run;
  auto ref = [](WorkloadArg::Kind kind, std::size_t call, uint32_t slot) {
    WorkloadArg a;
    a.kind = kind;
    a.call = call;
    a.slot = slot;
    return a;
  };
  auto literal = [](uint64_t v) {
    WorkloadArg a;
    a.literal = v;
    return a;
  };

  for (std::size_t i = 0; i < opts.length; ++i) {
    // Sources available from the calls made so far.
    std::vector<WorkloadArg> handles, cookies, buffers;
    std::vector<uint64_t> table_values, small_rets;
    const auto &produced = builder.produced();
    for (std::size_t k = 0; k < produced.size(); ++k) {
      const ProducedCall &p = produced[k];
      if (p.ret > 0 && p.ret_is_handle) {
        handles.push_back(ref(WorkloadArg::Kind::kReturn, k + 1, 0));
      } else if (p.ret > 0) {
        small_rets.push_back(static_cast<uint64_t>(p.ret));
      }
      for (const auto &[slot, o] : p.outputs) {
        buffers.push_back(ref(WorkloadArg::Kind::kOutAddress, k + 1, slot));
        table_values.push_back(o.address);
        if (o.effect == OutputEffect::Kind::kHandle) {
          handles.push_back(ref(WorkloadArg::Kind::kOutContent, k + 1, slot));
        } else if (IsAddressLike(o.content)) {
          cookies.push_back(ref(WorkloadArg::Kind::kOutContent, k + 1, slot));
          table_values.push_back(o.content);
        }
      }
    }
    auto pick = [&](const std::vector<WorkloadArg> &v) {
      return v[rng.Below(v.size())];
    };
    auto collide = [&]() {
      return opts.collision_rate > 0 && rng.Bernoulli(opts.collision_rate);
    };

    WorkloadCall call;
    call.name = names[rng.Below(names.size())];
    const Signature &sig = *types.Find(call.name);
    for (uint32_t slot = 0; slot < sig.size(); ++slot) {
      const ArgTypeDescriptor &desc = sig[slot];
      WorkloadArg a;
      if (desc.direction == Direction::kOut) {
        if (rng.Bernoulli(0.05)) {
          a.kind = WorkloadArg::Kind::kNull;
        } else {
          a.kind = WorkloadArg::Kind::kFreshBuffer;
        }
      } else if (desc.kind == ArgKind::kHandle) {
        if (!small_rets.empty() && collide()) {
          a = literal(small_rets[rng.Below(small_rets.size())]);
        } else if (!handles.empty() && rng.Bernoulli(0.85)) {
          a = pick(handles);
        } else {
          a = literal(0);
        }
      } else if (HasPointee(desc.kind)) {
        double u = rng.Uniform01();
        if (!buffers.empty() && u < 0.25) {
          a = pick(buffers);
        } else if (u < 0.30) {
          a.kind = WorkloadArg::Kind::kNull;
        } else {
          a.kind = WorkloadArg::Kind::kFreshBuffer;
          uint64_t size = StagingSize(types, desc);
          std::set<uint64_t> nested;
          if (const StructTemplate *st = types.FindStruct(desc.pointee)) {
            for (const auto &f : st->fields) {
              if (!f.nested.empty()) nested.insert(f.offset);
            }
          }
          for (uint64_t off = 0; off < size; off += kWordBytes) {
            if (!nested.count(off)) a.contents.push_back({off, rng.Below(0x100)});
          }
        }
      } else if (desc.kind == ArgKind::kScalar) {
        if (!table_values.empty() && collide()) {
          a = literal(table_values[rng.Below(table_values.size())]);
        } else if (!cookies.empty() && rng.Bernoulli(0.2)) {
          a = pick(cookies);
        } else {
          a = literal(rng.Below(0x1000));
        }
      } else {
        a = literal(rng.Below(0x1000));
      }
      call.args[slot] = std::move(a);
    }
    builder.Step(call);
    run.workload.push_back(std::move(call));
  }
  run.trace = builder.Take();
  run.trace.log.source = "sim:" + std::to_string(opts.seed);
  return run;
}

Universe MakeRandomUniverse(uint64_t seed, std::size_t syscall_count) {
  Rng rng(seed);
  Universe u;
  u.types.AddStruct({"rs_inner", {{0, ArgKind::kScalar, ""}}, 8});
  u.types.AddStruct(
      {"rs_pair", {{0, ArgKind::kScalar, ""}, {8, ArgKind::kScalar, ""}}, 16});
  u.types.AddStruct({"rs_outer",
                     {{0, ArgKind::kScalar, ""},
                      {8, ArgKind::kPointer, "rs_inner"},
                      {16, ArgKind::kScalar, ""}},
                     24});
  static const char *kPointees[] = {"", "rs_pair", "rs_outer"};

  auto name_of = [](std::size_t i) {
    std::string n = std::to_string(i);
    return "sys_" + std::string(n.size() < 2 ? 2 - n.size() : 0, '0') + n;
  };

  // Two fixed handle producers so handle consumers have something to use.
  {
    u.types.AddSignature(name_of(0), {{Direction::kIn, ArgKind::kScalar, ""},
                                      {Direction::kOut, ArgKind::kPointer, ""}});
    SimSyscallSpec s;
    s.name = name_of(0);
    s.effects.push_back({1, OutputEffect::Kind::kHandle, 0});
    u.specs.Add(s);
    u.types.AddSignature(name_of(1), {{Direction::kIn, ArgKind::kScalar, ""}});
    SimSyscallSpec r;
    r.name = name_of(1);
    r.returns_handle = true;
    u.specs.Add(r);
  }
  for (std::size_t i = 2; i < std::max<std::size_t>(syscall_count, 2); ++i) {
    Signature sig;
    SimSyscallSpec spec;
    spec.name = name_of(i);
    std::size_t argc = 1 + rng.Below(5);
    for (uint32_t slot = 0; slot < argc; ++slot) {
      uint64_t r = rng.Below(100);
      ArgTypeDescriptor d;
      if (r < 35) {
        d = {Direction::kIn, ArgKind::kScalar, ""};
      } else if (r < 55) {
        d = {Direction::kIn, ArgKind::kHandle, ""};
        spec.requirements[slot] = rng.Bernoulli(0.15) ? Requirement::kCloseHandle
                                                      : Requirement::kLiveHandle;
      } else if (r < 70) {
        d = {Direction::kIn, ArgKind::kPointer, kPointees[rng.Below(3)]};
        if (rng.Bernoulli(0.5)) spec.requirements[slot] = Requirement::kValidAllocation;
      } else if (r < 90) {
        d = {Direction::kOut, ArgKind::kPointer, kPointees[rng.Below(3)]};
        if (rng.Bernoulli(0.35)) {
          spec.effects.push_back({slot, OutputEffect::Kind::kHandle, 0});
        } else {
          spec.effects.push_back(
              {slot, OutputEffect::Kind::kWrite, kWordBytes * (1 + rng.Below(2))});
        }
      } else if (r < 95) {
        d = {Direction::kIn, ArgKind::kFunctionPointer, ""};
      } else {
        d = {Direction::kIn, ArgKind::kArray, ""};
        if (rng.Bernoulli(0.5)) spec.requirements[slot] = Requirement::kValidAllocation;
      }
      sig.push_back(d);
    }
    uint64_t r = rng.Below(100);
    if (r < 10) {
      spec.returns_handle = true;
    } else if (r >= 70) {
      spec.success_ret = rng.Range(1, 0xff);
    }
    u.types.AddSignature(spec.name, std::move(sig));
    u.specs.Add(std::move(spec));
  }
  u.types.Resolve();
  return u;
}

}  // namespace tracesynth
