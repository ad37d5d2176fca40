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

#include "tracesynth/synthesis.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <tuple>
#include <utility>

#include "tracesynth/error.h"

namespace tracesynth {
namespace {

using Triple = std::tuple<std::string, uint32_t, DepMode>;

Triple KeyOf(const DependentTemplate &t) {
  return {t.child_name, t.child_slot, t.mode};
}

void DefineStructPostOrder(const TypeDb &types, const std::string &id,
                           std::set<std::string> &defined,
                           std::vector<ScriptOp> &out) {
  if (id.empty() || !defined.insert(id).second) return;
  const StructTemplate *st = types.FindStruct(id);
  if (st == nullptr) throw Error(ErrorCode::kUnresolvedStruct, id);
  for (const auto &f : st->fields) DefineStructPostOrder(types, f.nested, defined, out);
  out.push_back(DefineStructOp{id});
}

bool References(const Operand &o, const std::set<std::string> &vars) {
  return !o.is_literal() && vars.count(o.var) > 0;
}

}  // namespace

std::vector<InsertableSite> FindInsertableSites(
    const Script &script, const DependencyDictionary &dict,
    const std::vector<DependencyEdge> &edges) {
  std::vector<InsertableSite> sites;
  if (dict.empty()) return sites;

  std::map<uint64_t, std::string> name_of_seq;
  for (const auto &op : script.ops) {
    const auto *inv = std::get_if<InvokeOp>(&op);
    if (inv == nullptr) continue;
    auto prov = script.provenance.find(inv->call_id);
    if (prov != script.provenance.end() && !prov->second.inserted) {
      name_of_seq[prov->second.seq] = inv->name;
    }
  }
  std::map<uint64_t, std::set<Triple>> attached;
  for (const auto &e : edges) {
    auto consumer = name_of_seq.find(e.consumer_seq);
    if (consumer == name_of_seq.end()) continue;
    attached[e.producer_seq].insert({consumer->second, e.consumer_slot, e.mode});
  }

  for (const auto &op : script.ops) {
    const auto *inv = std::get_if<InvokeOp>(&op);
    if (inv == nullptr) continue;
    auto prov = script.provenance.find(inv->call_id);
    if (prov == script.provenance.end() || prov->second.inserted) continue;
    std::vector<DependentTemplate> children = QueryChildren(dict, inv->name);
    if (children.empty()) continue;
    const std::set<Triple> &have = attached[prov->second.seq];
    InsertableSite site{inv->call_id, inv->name, {}};
    for (auto &t : children) {
      if (!have.count(KeyOf(t))) site.missing.push_back(std::move(t));
    }
    if (!site.missing.empty()) sites.push_back(std::move(site));
  }
  return sites;
}

std::vector<InsertableSite> FindInsertedSites(const Script &script,
                                              const DependencyDictionary &dict,
                                              int level) {
  std::vector<InsertableSite> sites;
  for (const auto &op : script.ops) {
    const auto *inv = std::get_if<InvokeOp>(&op);
    if (inv == nullptr) continue;
    auto prov = script.provenance.find(inv->call_id);
    if (prov == script.provenance.end() || !prov->second.inserted ||
        prov->second.level != level) {
      continue;
    }
    std::vector<DependentTemplate> children = QueryChildren(dict, inv->name);
    if (!children.empty()) {
      sites.push_back({inv->call_id, inv->name, std::move(children)});
    }
  }
  return sites;
}

LevelResult InsertLevel(const Script &script,
                        const std::vector<InsertableSite> &sites,
                        const TypeDb &types, int level) {
  LevelResult result;
  std::map<std::string, const InsertableSite *> by_call;
  for (const auto &s : sites) by_call[s.call_id] = &s;

  NameAllocator names(script);
  std::set<std::string> defined;
  for (const auto &op : script.ops) {
    if (const auto *d = std::get_if<DefineStructOp>(&op)) defined.insert(d->struct_id);
  }
  std::vector<ScriptOp> new_structs;
  Script &out = result.script;
  out.provenance = script.provenance;

  for (std::size_t i = 0; i < script.ops.size(); ++i) {
    out.ops.push_back(script.ops[i]);
    const auto *site_inv = std::get_if<InvokeOp>(&script.ops[i]);
    if (site_inv == nullptr) continue;
    auto site_it = by_call.find(site_inv->call_id);
    if (site_it == by_call.end()) continue;
    const InsertableSite &site = *site_it->second;
    const InvokeOp site_call = *site_inv;

    std::optional<std::string> ret_var;
    while (i + 1 < script.ops.size()) {
      const auto *b = std::get_if<BindReturnOp>(&script.ops[i + 1]);
      if (b == nullptr || b->call_id != site_call.call_id) break;
      if (!ret_var) ret_var = b->var;
      out.ops.push_back(script.ops[++i]);
    }

    for (const DependentTemplate &t : site.missing) {
      const Signature &sig = LookupSignature(types, t.child_name);
      if (t.child_slot >= sig.size()) {
        throw Error(ErrorCode::kUnknownTemplateSlot,
                    t.child_name + " has no slot " + std::to_string(t.child_slot));
      }
      for (const auto &[slot, fa] : t.fixed_args) {
        if (slot >= sig.size()) {
          throw Error(ErrorCode::kUnknownTemplateSlot,
                      t.child_name + " has no slot " + std::to_string(slot));
        }
      }

      Operand dependent;
      if (t.producer_source.is_return) {
        if (site_call.expected_ret <= 0) {
          ++result.skipped;
          continue;
        }
        if (!ret_var) {
          ret_var = names.NextVar();
          out.ops.push_back(BindReturnOp{*ret_var, site_call.call_id});
        }
        dependent = Operand::ReturnOf(*ret_var);
      } else {
        const OutBinding *ob = site_call.FindOut(t.producer_source.slot);
        if (ob == nullptr) {
          ++result.skipped;
          continue;
        }
        dependent = t.mode == DepMode::kAddressReuse ? Operand::AddressOf(ob->var)
                                                     : Operand::ContentOf(ob->var);
      }

      InvokeOp child;
      child.call_id = names.NextCall();
      child.name = t.child_name;
      child.expected_ret = t.taught_ret;
      for (uint32_t slot = 0; slot < sig.size(); ++slot) {
        const ArgTypeDescriptor &desc = sig[slot];
        if (slot == t.child_slot) {
          child.args.push_back(dependent);
          continue;
        }
        auto fa = t.fixed_args.find(slot);
        const bool has_fixed = fa != t.fixed_args.end();
        if (has_fixed && fa->second.bound) {
          child.args.push_back(Operand::Literal(fa->second.raw));
          continue;
        }
        if (HasPointee(desc.kind) && (!has_fixed || fa->second.raw != 0)) {
          DefineStructPostOrder(types, desc.pointee, defined, new_structs);
          std::optional<Pointee> contents;
          if (has_fixed) contents = fa->second.pointee;
          std::string var = StagePointer(types, desc, contents, names, out.ops);
          child.args.push_back(Operand::AddressOf(var));
          if (desc.direction == Direction::kOut) child.outs.push_back({slot, var});
          continue;
        }
        child.args.push_back(Operand::Literal(has_fixed ? fa->second.raw : 0));
      }
      out.provenance[child.call_id] = Provenance::Inserted(level, site_call.call_id);
      result.inserted.push_back(child.call_id);
      out.ops.push_back(std::move(child));
    }
  }

  if (!new_structs.empty()) {
    // Struct definitions stay grouped ahead of everything else.
    auto first_non_struct = std::find_if(out.ops.begin(), out.ops.end(), [](const auto &op) {
      return !std::holds_alternative<DefineStructOp>(op);
    });
    out.ops.insert(first_non_struct, new_structs.begin(), new_structs.end());
  }
  return result;
}

std::size_t SynthesisPlan::total_inserted() const {
  std::size_t n = 0;
  for (const auto &l : per_level) n += l.size();
  return n;
}

SynthesisResult Synthesize(const Script &script,
                           const DependencyDictionary &dict,
                           const std::vector<DependencyEdge> &edges,
                           const TypeDb &types, int max_level) {
  if (max_level < 1) {
    throw Error(ErrorCode::kMalformedConfig, "levels must be at least 1");
  }
  SynthesisResult result;
  result.script = script;
  result.plan.levels = max_level;
  result.plan.recovered_calls = script.InvokeCount();
  std::set<std::string> seen;
  for (int level = 1; level <= max_level; ++level) {
    std::vector<InsertableSite> sites =
        level == 1 ? FindInsertableSites(result.script, dict, edges)
                   : FindInsertedSites(result.script, dict, level - 1);
    LevelResult lr = InsertLevel(result.script, sites, types, level);
    for (const auto &id : lr.inserted) {
      if (!seen.insert(id).second) {
        throw Error(ErrorCode::kMalformedScript, "call " + id + " inserted twice");
      }
    }
    result.script = std::move(lr.script);
    result.plan.per_level.push_back(std::move(lr.inserted));
    result.plan.skipped_per_level.push_back(lr.skipped);
  }
  return result;
}

std::string FormatPlan(const SynthesisPlan &plan) {
  auto ratio = [&](std::size_t n) {
    char buf[32];
    double r = plan.recovered_calls == 0
                   ? 0.0
                   : static_cast<double>(n) / static_cast<double>(plan.recovered_calls);
    std::snprintf(buf, sizeof(buf), "%.4f", r);
    return std::string(buf);
  };
  std::string out = "SYNTH|recovered|" + std::to_string(plan.recovered_calls) + "\n";
  for (std::size_t i = 0; i < plan.per_level.size(); ++i) {
    out += "SYNTH|L" + std::to_string(i + 1) + "|" +
           std::to_string(plan.per_level[i].size()) + "|" +
           ratio(plan.per_level[i].size()) + "|skipped=" +
           std::to_string(plan.skipped_per_level[i]) + "\n";
  }
  out += "SYNTH|total|" + std::to_string(plan.total_inserted()) + "|" +
         ratio(plan.total_inserted()) + "\n";
  return out;
}

// ---- Localization and rectification ---------------------------------------

std::string_view FailureKindName(FailureKind kind) {
  switch (kind) {
    case FailureKind::kBadInput: return "BadInput";
    case FailureKind::kOutputTooSmall: return "OutputTooSmall";
    case FailureKind::kHang: return "Hang";
    case FailureKind::kCrash: return "Crash";
  }
  return "?";
}

std::optional<FailureKind> ParseFailureKind(std::string_view text) {
  for (FailureKind k : {FailureKind::kBadInput, FailureKind::kOutputTooSmall,
                        FailureKind::kHang, FailureKind::kCrash}) {
    if (FailureKindName(k) == text) return k;
  }
  return std::nullopt;
}

Executor SimExecutor(const SimSpecSet &specs, const TypeDb &types,
                     ExecOptions opts) {
  return [&specs, &types, opts = std::move(opts)](const Script &s) {
    ExecResult r = ExecuteScript(specs, types, s, opts);
    Verdict v;
    v.fatal = !r.completed();
    switch (r.status) {
      case ExecStatus::kCompleted:
      case ExecStatus::kCrashed: v.kind = FailureKind::kCrash; break;
      case ExecStatus::kHung: v.kind = FailureKind::kHang; break;
      case ExecStatus::kOutputTooSmall: v.kind = FailureKind::kOutputTooSmall; break;
      case ExecStatus::kBadInput: v.kind = FailureKind::kBadInput; break;
    }
    return v;
  };
}

Script InvokePrefix(const Script &script, std::size_t k) {
  Script out;
  out.provenance = script.provenance;
  std::size_t seen = 0;
  std::string last_call;
  for (const auto &op : script.ops) {
    if (const auto *inv = std::get_if<InvokeOp>(&op)) {
      if (seen == k) break;
      ++seen;
      last_call = inv->call_id;
    } else if (seen == k) {
      const auto *b = std::get_if<BindReturnOp>(&op);
      if (b == nullptr || b->call_id != last_call) break;
    }
    out.ops.push_back(op);
  }
  return out;
}

std::optional<Localization> LocalizeFaultyCall(const Script &script,
                                               const Executor &executor) {
  const std::size_t n = script.InvokeCount();
  if (n == 0) return std::nullopt;
  Localization loc;
  Verdict full = executor(script);
  loc.executions = 1;
  if (!full.fatal) {
    throw Error(ErrorCode::kNotReproducible, "script runs to completion");
  }
  std::size_t lo = 1;
  std::size_t hi = n;
  FailureKind kind = full.kind;
  while (lo < hi) {
    std::size_t mid = lo + (hi - lo) / 2;
    Verdict v = executor(InvokePrefix(script, mid));
    ++loc.executions;
    if (v.fatal) {
      hi = mid;
      kind = v.kind;
    } else {
      lo = mid + 1;
    }
  }
  const auto positions = script.InvokePositions();
  loc.call_id = std::get<InvokeOp>(script.ops[positions[hi - 1]]).call_id;
  loc.kind = kind;
  return loc;
}

Script Rectify(const Script &script, const std::string &call_id,
               FailureKind kind, uint64_t factor) {
  auto pos = script.FindInvoke(call_id);
  if (!pos) return script;
  Script out;
  out.provenance = script.provenance;

  if (kind == FailureKind::kOutputTooSmall) {
    std::set<std::string> out_vars;
    for (const auto &o : std::get<InvokeOp>(script.ops[*pos]).outs) {
      out_vars.insert(o.var);
    }
    out.ops = script.ops;
    for (auto &op : out.ops) {
      if (auto *a = std::get_if<AllocOp>(&op); a && out_vars.count(a->var)) {
        a->size *= factor;
      }
    }
    return out;
  }

  std::set<std::string> removed_calls = {call_id};
  std::set<std::string> dead_vars;
  for (const auto &o : std::get<InvokeOp>(script.ops[*pos]).outs) dead_vars.insert(o.var);
  for (const auto &op : script.ops) {
    if (const auto *inv = std::get_if<InvokeOp>(&op)) {
      bool dead = removed_calls.count(inv->call_id) > 0 ||
                  std::any_of(inv->args.begin(), inv->args.end(),
                              [&](const Operand &a) { return References(a, dead_vars); });
      if (dead) {
        removed_calls.insert(inv->call_id);
        for (const auto &o : inv->outs) dead_vars.insert(o.var);
        out.provenance.erase(inv->call_id);
        continue;
      }
    } else if (const auto *b = std::get_if<BindReturnOp>(&op)) {
      if (removed_calls.count(b->call_id)) {
        dead_vars.insert(b->var);
        continue;
      }
    } else if (const auto *w = std::get_if<SetWordOp>(&op)) {
      if (References(w->value, dead_vars)) continue;
    }
    out.ops.push_back(op);
  }
  return out;
}

RectifyResult RectifyLoop(const Script &script, const Executor &executor,
                          std::size_t max_rounds) {
  RectifyResult result;
  result.script = script;
  std::map<std::string, int> too_small;
  while (true) {
    std::optional<Localization> loc;
    try {
      loc = LocalizeFaultyCall(result.script, executor);
    } catch (const Error &e) {
      if (e.code() != ErrorCode::kNotReproducible) throw;
      ++result.executions;
      result.completed = true;
      return result;
    }
    if (!loc) {
      ++result.executions;
      result.completed = !executor(result.script).fatal;
      return result;
    }
    result.executions += loc->executions;
    if (result.rounds >= max_rounds) return result;
    ++result.rounds;
    RectifyAction act{loc->call_id, loc->kind, "discard"};
    if (loc->kind == FailureKind::kOutputTooSmall && ++too_small[loc->call_id] <= 2) {
      act.action = too_small[loc->call_id] == 1 ? "enlarge x8" : "enlarge x64";
      result.script = Rectify(result.script, loc->call_id, loc->kind);
    } else {
      result.script = Rectify(result.script, loc->call_id, FailureKind::kBadInput);
    }
    result.actions.push_back(std::move(act));
  }
}

}  // namespace tracesynth
