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

#include "tracesynth/script_ir.h"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "tracesynth/error.h"
#include "tracesynth/text.h"

namespace tracesynth {

std::string Operand::ToString() const {
  switch (kind) {
    case Kind::kLiteral: return Hex(literal);
    case Kind::kAddressOf: return "&" + var;
    case Kind::kContentOf: return "*" + var;
    case Kind::kReturnOf: return "$" + var;
  }
  return "?";
}

std::optional<Operand> Operand::Parse(std::string_view text) {
  if (text.empty()) return std::nullopt;
  auto name = text.substr(1);
  switch (text[0]) {
    case '&':
      if (name.empty()) return std::nullopt;
      return AddressOf(std::string(name));
    case '*':
      if (name.empty()) return std::nullopt;
      return ContentOf(std::string(name));
    case '$':
      if (name.empty()) return std::nullopt;
      return ReturnOf(std::string(name));
    default:
      if (auto v = ParseHex(text)) return Literal(*v);
      return std::nullopt;
  }
}

const OutBinding *InvokeOp::FindOut(uint32_t slot) const {
  for (const auto &o : outs) {
    if (o.slot == slot) return &o;
  }
  return nullptr;
}

std::string Provenance::ToString() const {
  if (!inserted) return "r" + std::to_string(seq);
  return "L" + std::to_string(level) + ":" + parent;
}

std::optional<Provenance> Provenance::Parse(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text[0] == 'r') {
    auto seq = ParseDecimal(text.substr(1));
    if (!seq) return std::nullopt;
    return Recovered(*seq);
  }
  if (text[0] == 'L') {
    auto colon = text.find(':');
    if (colon == std::string_view::npos) return std::nullopt;
    auto level = ParseDecimal(text.substr(1, colon - 1));
    auto parent = text.substr(colon + 1);
    if (!level || *level == 0 || parent.empty()) return std::nullopt;
    return Inserted(static_cast<int>(*level), std::string(parent));
  }
  return std::nullopt;
}

std::optional<std::size_t> Script::FindInvoke(std::string_view call_id) const {
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (const auto *inv = std::get_if<InvokeOp>(&ops[i])) {
      if (inv->call_id == call_id) return i;
    }
  }
  return std::nullopt;
}

std::vector<std::size_t> Script::InvokePositions() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (std::holds_alternative<InvokeOp>(ops[i])) out.push_back(i);
  }
  return out;
}

std::size_t Script::InvokeCount() const {
  return static_cast<std::size_t>(
      std::count_if(ops.begin(), ops.end(), [](const ScriptOp &op) {
        return std::holds_alternative<InvokeOp>(op);
      }));
}

std::vector<std::string> CheckScript(const Script &script,
                                     const TypeDb *types) {
  std::vector<std::string> problems;
  std::set<std::string, std::less<>> allocated;
  std::set<std::string, std::less<>> returns;
  std::set<std::string, std::less<>> calls;
  std::set<std::string, std::less<>> defined_structs;
  std::optional<uint64_t> last_recovered_seq;

  auto define_var = [&](const std::string &var, bool is_alloc) {
    if (allocated.count(var) || returns.count(var)) {
      problems.push_back("var " + var + " defined twice");
    }
    (is_alloc ? allocated : returns).insert(var);
  };
  auto check_operand = [&](const Operand &op, const std::string &where) {
    switch (op.kind) {
      case Operand::Kind::kLiteral:
        return;
      case Operand::Kind::kAddressOf:
      case Operand::Kind::kContentOf:
        if (!allocated.count(op.var)) {
          problems.push_back(where + ": " + op.ToString() +
                             " used before allocation");
        }
        return;
      case Operand::Kind::kReturnOf:
        if (!returns.count(op.var)) {
          problems.push_back(where + ": " + op.ToString() +
                             " used before binding");
        }
        return;
    }
  };

  for (const auto &op : script.ops) {
    if (const auto *d = std::get_if<DefineStructOp>(&op)) {
      if (types && types->FindStruct(d->struct_id) == nullptr) {
        problems.push_back("STRUCT " + d->struct_id + " unknown");
      }
      defined_structs.insert(d->struct_id);
    } else if (const auto *a = std::get_if<AllocOp>(&op)) {
      define_var(a->var, true);
    } else if (const auto *w = std::get_if<SetWordOp>(&op)) {
      if (!allocated.count(w->var)) {
        problems.push_back("SETW to unallocated " + w->var);
      }
      check_operand(w->value, "SETW " + w->var);
    } else if (const auto *inv = std::get_if<InvokeOp>(&op)) {
      if (!calls.insert(inv->call_id).second) {
        problems.push_back("duplicate call id " + inv->call_id);
      }
      for (const auto &arg : inv->args) check_operand(arg, inv->call_id);
      for (const auto &o : inv->outs) {
        if (!allocated.count(o.var)) {
          problems.push_back(inv->call_id + ": out var " + o.var +
                             " not allocated");
        }
        if (o.slot >= inv->args.size()) {
          problems.push_back(inv->call_id + ": out slot beyond arity");
        }
      }
      auto prov = script.provenance.find(inv->call_id);
      if (prov == script.provenance.end()) {
        problems.push_back(inv->call_id + ": no provenance");
      } else if (!prov->second.inserted) {
        if (last_recovered_seq && prov->second.seq <= *last_recovered_seq) {
          problems.push_back(inv->call_id + ": recovered calls out of order");
        }
        last_recovered_seq = prov->second.seq;
      } else if (!calls.count(prov->second.parent)) {
        problems.push_back(inv->call_id + ": parent " + prov->second.parent +
                           " not before child");
      }
      if (types) {
        const Signature *sig = types->Find(inv->name);
        if (sig == nullptr) {
          problems.push_back(inv->call_id + ": unknown syscall " + inv->name);
        } else {
          if (sig->size() != inv->args.size()) {
            problems.push_back(inv->call_id + ": arity mismatch");
          }
          for (const auto &o : inv->outs) {
            if (o.slot < sig->size() &&
                (*sig)[o.slot].direction != Direction::kOut) {
              problems.push_back(inv->call_id + ": out binding on input slot");
            }
          }
        }
      }
    } else if (const auto *b = std::get_if<BindReturnOp>(&op)) {
      if (!calls.count(b->call_id)) {
        problems.push_back("BINDRET " + b->var + " before call " + b->call_id);
      }
      define_var(b->var, false);
    }
  }
  for (const auto &[id, prov] : script.provenance) {
    if (!calls.count(id)) problems.push_back("provenance for missing " + id);
  }
  return problems;
}

namespace {

// Largest N among names "<prefix>N", or 0.
uint64_t MaxNumbered(std::string_view name, std::string_view prefix) {
  if (name.substr(0, prefix.size()) != prefix) return 0;
  auto n = ParseDecimal(name.substr(prefix.size()));
  return n ? *n : 0;
}

}  // namespace

NameAllocator::NameAllocator(const Script &script) {
  uint64_t max_var = 0;
  uint64_t max_call = 0;
  for (const auto &op : script.ops) {
    if (const auto *a = std::get_if<AllocOp>(&op)) {
      max_var = std::max(max_var, MaxNumbered(a->var, "var"));
    } else if (const auto *b = std::get_if<BindReturnOp>(&op)) {
      max_var = std::max(max_var, MaxNumbered(b->var, "var"));
    } else if (const auto *inv = std::get_if<InvokeOp>(&op)) {
      max_call = std::max(max_call, MaxNumbered(inv->call_id, "c"));
    }
  }
  next_var_ = max_var + 1;
  next_call_ = max_call + 1;
}

std::string NameAllocator::NextVar() {
  return "var" + std::to_string(next_var_++);
}

std::string NameAllocator::NextCall() {
  return "c" + std::to_string(next_call_++);
}

namespace {

// Allocates a struct (or untyped word buffer) and, for typed pointer fields,
// the allocations they point at. Traced words are written as literals
// except where a nested allocation takes the field.
std::string StageAllocation(const TypeDb &types, const std::string &struct_id,
                            uint64_t size, const std::optional<Pointee> &contents,
                            NameAllocator &names, std::vector<ScriptOp> &out) {
  std::string var = names.NextVar();
  out.push_back(AllocOp{var, size});
  std::map<uint64_t, std::string> nested_fields;
  if (!struct_id.empty()) {
    const StructTemplate *st = types.FindStruct(struct_id);
    if (st == nullptr) throw Error(ErrorCode::kUnresolvedStruct, struct_id);
    for (const auto &f : st->fields) {
      if (f.nested.empty()) continue;
      // A traced null stays null; otherwise (or when nothing was traced)
      // the nested struct gets its own zeroed allocation.
      bool traced_null = false;
      if (contents) {
        for (const auto &w : *contents) {
          if (w.offset == f.offset && w.value == 0) traced_null = true;
        }
      }
      if (traced_null) continue;
      const StructTemplate *inner = types.FindStruct(f.nested);
      if (inner == nullptr) throw Error(ErrorCode::kUnresolvedStruct, f.nested);
      nested_fields[f.offset] =
          StageAllocation(types, f.nested, inner->size, std::nullopt, names, out);
    }
  }
  if (contents) {
    for (const auto &w : *contents) {
      if (w.offset + kWordBytes > size) continue;
      if (nested_fields.count(w.offset)) continue;
      out.push_back(SetWordOp{var, w.offset, Operand::Literal(w.value)});
    }
  }
  for (const auto &[offset, inner_var] : nested_fields) {
    out.push_back(SetWordOp{var, offset, Operand::AddressOf(inner_var)});
  }
  return var;
}

void DefineStructsPostOrder(const TypeDb &types, const std::string &id,
                            std::set<std::string> &seen,
                            std::vector<ScriptOp> &out) {
  if (!seen.insert(id).second) return;
  const StructTemplate *st = types.FindStruct(id);
  if (st == nullptr) throw Error(ErrorCode::kUnresolvedStruct, id);
  for (const auto &f : st->fields) {
    if (!f.nested.empty()) DefineStructsPostOrder(types, f.nested, seen, out);
  }
  out.push_back(DefineStructOp{id});
}

}  // namespace

std::string StagePointer(const TypeDb &types, const ArgTypeDescriptor &desc,
                         const std::optional<Pointee> &contents,
                         NameAllocator &names, std::vector<ScriptOp> &out) {
  return StageAllocation(types, desc.pointee, StagingSize(types, desc),
                         desc.direction == Direction::kIn ? contents
                                                          : std::nullopt,
                         names, out);
}

Script RecoverModelScript(const TraceLog &log,
                          const std::vector<DependencyEdge> &edges,
                          const TypeDb &types) {
  auto record_at = [&](uint64_t seq) -> const SyscallRecord & {
    if (seq == 0 || seq > log.records.size()) {
      throw Error(ErrorCode::kInconsistentEdge,
                  "seq " + std::to_string(seq) + " not in trace");
    }
    return log.records[seq - 1];
  };

  std::map<std::pair<uint64_t, uint32_t>, const DependencyEdge *> by_consumer;
  std::set<uint64_t> return_used;
  for (const auto &e : edges) {
    const SyscallRecord &consumer = record_at(e.consumer_seq);
    const SyscallRecord &producer = record_at(e.producer_seq);
    const Signature &csig = LookupSignature(types, consumer.name);
    const Signature &psig = LookupSignature(types, producer.name);
    if (e.producer_seq >= e.consumer_seq) {
      throw Error(ErrorCode::kInconsistentEdge, "edge does not point forward");
    }
    if (e.consumer_slot >= csig.size()) {
      throw Error(ErrorCode::kInconsistentEdge,
                  consumer.name + " has no slot " +
                      std::to_string(e.consumer_slot));
    }
    if (e.producer_source.is_return) {
      if (e.mode != DepMode::kReturnUse) {
        throw Error(ErrorCode::kInconsistentEdge, "return edge with non-return mode");
      }
      return_used.insert(e.producer_seq);
    } else if (e.producer_source.slot >= psig.size() ||
               psig[e.producer_source.slot].direction != Direction::kOut ||
               e.mode == DepMode::kReturnUse) {
      throw Error(ErrorCode::kInconsistentEdge,
                  producer.name + " has no output slot " +
                      std::to_string(e.producer_source.slot));
    }
    by_consumer[{e.consumer_seq, e.consumer_slot}] = &e;
  }

  Script script;
  std::set<std::string> seen_structs;
  for (const auto &rec : log.records) {
    for (const auto &desc : LookupSignature(types, rec.name)) {
      if (!desc.pointee.empty()) {
        DefineStructsPostOrder(types, desc.pointee, seen_structs, script.ops);
      }
    }
  }

  NameAllocator names(script);
  std::map<std::pair<uint64_t, uint32_t>, std::string> out_var;
  std::map<uint64_t, std::string> ret_var;
  for (const auto &rec : log.records) {
    const Signature &sig = LookupSignature(types, rec.name);
    InvokeOp inv;
    inv.call_id = "c" + std::to_string(rec.seq);
    inv.name = rec.name;
    inv.expected_ret = rec.ret;
    for (uint32_t slot = 0; slot < sig.size(); ++slot) {
      const ArgTypeDescriptor &desc = sig[slot];
      const ArgValue *arg = rec.FindArg(slot);
      uint64_t raw = arg ? arg->raw : 0;
      auto edge_it = by_consumer.find({rec.seq, slot});
      if (edge_it != by_consumer.end()) {
        const DependencyEdge &e = *edge_it->second;
        if (e.mode == DepMode::kReturnUse) {
          inv.args.push_back(Operand::ReturnOf(ret_var.at(e.producer_seq)));
          continue;
        }
        auto v = out_var.find({e.producer_seq, e.producer_source.slot});
        if (v != out_var.end()) {
          inv.args.push_back(e.mode == DepMode::kAddressReuse
                                 ? Operand::AddressOf(v->second)
                                 : Operand::ContentOf(v->second));
          continue;
        }
        // The producer passed null for that slot; nothing to bind to.
        inv.args.push_back(Operand::Literal(raw));
        continue;
      }
      if (HasPointee(desc.kind) && raw != 0) {
        std::optional<Pointee> contents;
        if (arg) contents = arg->pointee;
        std::string var = StagePointer(types, desc, contents, names, script.ops);
        inv.args.push_back(Operand::AddressOf(var));
        if (desc.direction == Direction::kOut) {
          inv.outs.push_back({slot, var});
          out_var[{rec.seq, slot}] = var;
        }
        continue;
      }
      inv.args.push_back(Operand::Literal(raw));
    }
    script.provenance[inv.call_id] = Provenance::Recovered(rec.seq);
    std::string call_id = inv.call_id;
    script.ops.push_back(std::move(inv));
    if (return_used.count(rec.seq)) {
      std::string var = names.NextVar();
      script.ops.push_back(BindReturnOp{var, call_id});
      ret_var[rec.seq] = var;
    }
  }
  return script;
}

std::string EmitScriptText(const Script &script) {
  std::string out = "SCRIPT v1\n";
  for (const auto &op : script.ops) {
    if (const auto *d = std::get_if<DefineStructOp>(&op)) {
      out += "STRUCT " + d->struct_id + "\n";
    } else if (const auto *a = std::get_if<AllocOp>(&op)) {
      out += "ALLOC " + a->var + " " + std::to_string(a->size) + "\n";
    } else if (const auto *w = std::get_if<SetWordOp>(&op)) {
      out += "SETW " + w->var + " " + std::to_string(w->offset) + " " +
             w->value.ToString() + "\n";
    } else if (const auto *inv = std::get_if<InvokeOp>(&op)) {
      out += "CALL " + inv->call_id + " " + inv->name + " args=";
      for (std::size_t i = 0; i < inv->args.size(); ++i) {
        if (i > 0) out += ",";
        out += inv->args[i].ToString();
      }
      out += " out=";
      if (inv->outs.empty()) out += "-";
      for (std::size_t i = 0; i < inv->outs.size(); ++i) {
        if (i > 0) out += ",";
        out += std::to_string(inv->outs[i].slot) + ":" + inv->outs[i].var;
      }
      out += " exp=" + SignedHex(inv->expected_ret);
      auto prov = script.provenance.find(inv->call_id);
      if (prov != script.provenance.end()) {
        out += " from=" + prov->second.ToString();
      }
      out += "\n";
    } else if (const auto *b = std::get_if<BindReturnOp>(&op)) {
      out += "BINDRET " + b->var + " " + b->call_id + "\n";
    }
  }
  return out;
}

namespace {

std::string_view Field(const std::vector<std::string_view> &tokens,
                       std::size_t i, std::string_view key, std::size_t line) {
  if (i >= tokens.size() || tokens[i].substr(0, key.size()) != key) {
    throw Error(ErrorCode::kMalformedScript,
                "expected " + std::string(key), line);
  }
  return tokens[i].substr(key.size());
}

}  // namespace

Script LoadScript(std::string_view text) {
  Script script;
  auto lines = Lines(text);
  if (lines.empty() || Trim(lines[0]) != "SCRIPT v1") {
    throw Error(ErrorCode::kMalformedScript, "missing SCRIPT v1 header", 1);
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::size_t lineno = i + 1;
    auto line = Trim(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    auto bad = [&](const std::string &why) {
      return Error(ErrorCode::kMalformedScript, why, lineno);
    };
    auto tok = Split(line, ' ');
    tok.erase(std::remove(tok.begin(), tok.end(), std::string_view()),
              tok.end());
    const auto &op = tok[0];
    if (op == "STRUCT") {
      if (tok.size() != 2) throw bad("STRUCT takes one id");
      script.ops.push_back(DefineStructOp{std::string(tok[1])});
    } else if (op == "ALLOC") {
      if (tok.size() != 3) throw bad("ALLOC takes var and size");
      auto size = ParseDecimal(tok[2]);
      if (!size) throw bad("bad ALLOC size");
      script.ops.push_back(AllocOp{std::string(tok[1]), *size});
    } else if (op == "SETW") {
      if (tok.size() != 4) throw bad("SETW takes var, offset, value");
      auto off = ParseDecimal(tok[2]);
      auto val = Operand::Parse(tok[3]);
      if (!off || !val) throw bad("bad SETW operand");
      script.ops.push_back(SetWordOp{std::string(tok[1]), *off, *val});
    } else if (op == "CALL") {
      if (tok.size() < 6 || tok.size() > 7) throw bad("bad CALL arity");
      InvokeOp inv;
      inv.call_id = std::string(tok[1]);
      inv.name = std::string(tok[2]);
      auto args = Field(tok, 3, "args=", lineno);
      if (!args.empty()) {
        for (auto a : Split(args, ',')) {
          auto operand = Operand::Parse(a);
          if (!operand) throw bad("bad CALL argument");
          inv.args.push_back(*operand);
        }
      }
      auto outs = Field(tok, 4, "out=", lineno);
      if (outs != "-") {
        for (auto o : Split(outs, ',')) {
          auto colon = o.find(':');
          if (colon == std::string_view::npos) throw bad("bad out binding");
          auto slot = ParseDecimal(o.substr(0, colon));
          if (!slot || *slot > UINT32_MAX || colon + 1 == o.size()) {
            throw bad("bad out binding");
          }
          inv.outs.push_back({static_cast<uint32_t>(*slot),
                              std::string(o.substr(colon + 1))});
        }
      }
      auto exp = ParseSignedHex(Field(tok, 5, "exp=", lineno));
      if (!exp) throw bad("bad exp=");
      inv.expected_ret = *exp;
      if (tok.size() == 7) {
        auto prov = Provenance::Parse(Field(tok, 6, "from=", lineno));
        if (!prov) throw bad("bad from=");
        script.provenance[inv.call_id] = *prov;
      } else {
        throw bad("CALL without from=");
      }
      script.ops.push_back(std::move(inv));
    } else if (op == "BINDRET") {
      if (tok.size() != 3) throw bad("BINDRET takes var and call id");
      script.ops.push_back(
          BindReturnOp{std::string(tok[1]), std::string(tok[2])});
    } else {
      throw bad("unknown op " + std::string(op));
    }
  }
  auto problems = CheckScript(script);
  if (!problems.empty()) {
    throw Error(ErrorCode::kMalformedScript, problems.front());
  }
  return script;
}

}  // namespace tracesynth
