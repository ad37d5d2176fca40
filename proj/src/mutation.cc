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

#include "tracesynth/mutation.h"

#include <map>
#include <set>
#include <utility>

#include "tracesynth/error.h"
#include "tracesynth/text.h"

namespace tracesynth {

std::string_view StrategyName(Strategy s) {
  switch (s) {
    case Strategy::kBitFlip: return "BitFlip";
    case Strategy::kArithmetic: return "Arithmetic";
    case Strategy::kBoundary: return "Boundary";
    case Strategy::kRandom: return "Random";
  }
  return "?";
}

void MutationConfig::Validate() const {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw Error(ErrorCode::kMalformedConfig, "mutation.rate must be in [0,1]");
  }
  double sum = 0;
  for (double w : weights) {
    if (!(w >= 0.0)) {
      throw Error(ErrorCode::kMalformedConfig, "mutation weights must be >= 0");
    }
    sum += w;
  }
  if (sum <= 0.0) {
    throw Error(ErrorCode::kMalformedConfig, "mutation weights are all zero");
  }
}

std::string FormatEvent(const MutationEvent &e) {
  std::string target = e.slot ? "slot" + std::to_string(*e.slot)
                              : e.var + "@" + std::to_string(e.offset);
  return e.call_id + ":" + target + ":" + std::string(StrategyName(e.strategy)) +
         ":" + Hex(e.before) + "->" + Hex(e.after);
}

uint64_t MutateConstant(uint64_t value, Strategy strategy, Rng &rng) {
  switch (strategy) {
    case Strategy::kBitFlip:
      return value ^ (uint64_t{1} << rng.Below(64));
    case Strategy::kArithmetic: {
      int64_t delta = rng.Range(-kArithmeticMaxDelta, kArithmeticMaxDelta - 1);
      if (delta >= 0) ++delta;
      return value + static_cast<uint64_t>(delta);
    }
    case Strategy::kBoundary: {
      std::vector<uint64_t> choices;
      for (uint64_t b : kBoundaryValues) {
        if (b != value) choices.push_back(b);
      }
      return choices[rng.Below(choices.size())];
    }
    case Strategy::kRandom:
      return rng.Next();
  }
  return value;
}

Strategy PickStrategy(const std::array<double, 4> &weights, Rng &rng) {
  double total = 0;
  for (double w : weights) total += w;
  double x = rng.Uniform01() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0) continue;
    if (x < weights[i]) return static_cast<Strategy>(i);
    x -= weights[i];
  }
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0) return static_cast<Strategy>(i);
  }
  return Strategy::kRandom;
}

MutationPlanner::MutationPlanner(const Script &script, const TypeDb &types,
                                 const MutationConfig &cfg)
    : types_(types), cfg_(cfg) {
  for (std::size_t i = 0; i < script.ops.size(); ++i) {
    const ScriptOp &op = script.ops[i];
    if (const auto *a = std::get_if<AllocOp>(&op)) {
      alloc_size_[a->var] = a->size;
    } else if (const auto *w = std::get_if<SetWordOp>(&op)) {
      words_[{w->var, w->offset}].push_back({i, w->value});
    } else if (const auto *inv = std::get_if<InvokeOp>(&op)) {
      call_pos_[inv->call_id] = i;
      for (const auto &o : inv->outs) out_pos_.emplace(o.var, i);
    }
  }
}

const Operand *MutationPlanner::WordBefore(const std::string &var,
                                           uint64_t offset,
                                           std::size_t pos) const {
  auto it = words_.find({var, offset});
  if (it == words_.end()) return nullptr;
  const Operand *last = nullptr;
  for (const auto &[at, value] : it->second) {
    if (at >= pos) break;
    last = &value;
  }
  return last;
}

bool MutationPlanner::IsEarlierOutput(const std::string &var,
                                      std::size_t pos) const {
  auto it = out_pos_.find(var);
  return it != out_pos_.end() && it->second < pos;
}

struct PlanState {
  const InvokeOp *invoke;
  std::size_t pos;
  Rng *rng;
  std::set<std::string> visited;
  std::vector<MutationEvent> events;
};

void MutationPlanner::Maybe(PlanState &st, MutationEvent e,
                            uint64_t before) const {
  if (!st.rng->Bernoulli(cfg_.rate)) return;
  e.call_id = st.invoke->call_id;
  e.strategy = PickStrategy(cfg_.weights, *st.rng);
  e.before = before;
  e.after = MutateConstant(before, e.strategy, *st.rng);
  st.events.push_back(std::move(e));
}

void MutationPlanner::Word(PlanState &st, const std::string &var,
                           uint64_t offset) const {
  uint64_t before = 0;
  if (const Operand *w = WordBefore(var, offset, st.pos)) {
    if (!w->is_literal()) return;
    before = w->literal;
  }
  MutationEvent e;
  e.var = var;
  e.offset = offset;
  Maybe(st, std::move(e), before);
}

void MutationPlanner::Fields(PlanState &st, const std::string &var,
                             const std::vector<FlatField> *layout) const {
  if (!st.visited.insert(var).second) return;
  auto size = alloc_size_.find(var);
  if (size == alloc_size_.end()) return;
  if (layout == nullptr) {
    for (uint64_t off = 0; off + kWordBytes <= size->second; off += kWordBytes) {
      Word(st, var, off);
    }
    return;
  }
  for (const auto &f : *layout) {
    if (f.offset + kWordBytes > size->second) continue;
    if (f.kind == ArgKind::kHandle) continue;
    if (!f.nested_id.empty()) {
      const Operand *link = WordBefore(var, f.offset, st.pos);
      if (link != nullptr && link->kind == Operand::Kind::kAddressOf &&
          !IsEarlierOutput(link->var, st.pos)) {
        Fields(st, link->var, &f.nested);
      }
      continue;
    }
    Word(st, var, f.offset);
  }
}

std::vector<MutationEvent> MutationPlanner::Plan(const InvokeOp &invoke,
                                                 uint64_t executed_count,
                                                 Rng &rng) const {
  if (executed_count < cfg_.threshold || cfg_.rate <= 0.0) return {};
  auto pos = call_pos_.find(invoke.call_id);
  if (pos == call_pos_.end()) {
    throw Error(ErrorCode::kDanglingEvent, "no call " + invoke.call_id);
  }
  PlanState st{&invoke, pos->second, &rng, {}, {}};
  const Signature &sig = LookupSignature(types_, invoke.name);
  for (uint32_t slot = 0; slot < sig.size() && slot < invoke.args.size(); ++slot) {
    const ArgTypeDescriptor &desc = sig[slot];
    const Operand &arg = invoke.args[slot];
    if (desc.kind == ArgKind::kHandle) continue;
    if (HasPointee(desc.kind)) {
      if (desc.direction != Direction::kIn) continue;
      if (arg.kind != Operand::Kind::kAddressOf || IsEarlierOutput(arg.var, st.pos)) {
        continue;
      }
      st.visited.clear();
      if (desc.pointee.empty()) {
        Fields(st, arg.var, nullptr);
      } else {
        const auto &layout = Layout(desc.pointee);
        Fields(st, arg.var, &layout);
      }
      continue;
    }
    if (!arg.is_literal()) continue;
    MutationEvent e;
    e.slot = slot;
    Maybe(st, std::move(e), arg.literal);
  }
  return std::move(st.events);
}

const std::vector<FlatField> &MutationPlanner::Layout(const std::string &id) const {
  auto it = layouts_.find(id);
  if (it == layouts_.end()) it = layouts_.emplace(id, FlattenStruct(types_, id)).first;
  return it->second;
}

std::vector<MutationEvent> PlanCallMutation(const Script &script,
                                            const InvokeOp &invoke,
                                            const TypeDb &types,
                                            const MutationConfig &cfg,
                                            uint64_t executed_count, Rng &rng) {
  if (executed_count < cfg.threshold || cfg.rate <= 0.0) return {};
  return MutationPlanner(script, types, cfg).Plan(invoke, executed_count, rng);
}

Script ApplyMutations(const Script &script,
                      const std::vector<MutationEvent> &events) {
  Script out = script;
  std::map<std::string, std::size_t> call_pos, alloc_pos;
  std::map<std::pair<std::string, uint64_t>, std::size_t> setw_pos;
  for (std::size_t i = 0; i < out.ops.size(); ++i) {
    if (const auto *inv = std::get_if<InvokeOp>(&out.ops[i])) {
      call_pos[inv->call_id] = i;
    } else if (const auto *a = std::get_if<AllocOp>(&out.ops[i])) {
      alloc_pos[a->var] = i;
    } else if (const auto *w = std::get_if<SetWordOp>(&out.ops[i])) {
      setw_pos[{w->var, w->offset}] = i;
    }
  }
  // New words go right after their ALLOC, in offset order.
  std::map<std::size_t, std::map<uint64_t, SetWordOp>> added;
  for (const auto &e : events) {
    if (e.slot) {
      auto pos = call_pos.find(e.call_id);
      if (pos == call_pos.end()) throw Error(ErrorCode::kDanglingEvent, "no call " + e.call_id);
      auto &inv = std::get<InvokeOp>(out.ops[pos->second]);
      if (*e.slot >= inv.args.size() || !inv.args[*e.slot].is_literal()) {
        throw Error(ErrorCode::kDanglingEvent,
                    e.call_id + " slot " + std::to_string(*e.slot) +
                        " is not a literal");
      }
      inv.args[*e.slot].literal = e.after;
      continue;
    }
    auto alloc = alloc_pos.find(e.var);
    if (alloc == alloc_pos.end() ||
        e.offset + kWordBytes > std::get<AllocOp>(out.ops[alloc->second]).size) {
      throw Error(ErrorCode::kDanglingEvent,
                  "no allocation word " + e.var + "@" + std::to_string(e.offset));
    }
    auto setw = setw_pos.find({e.var, e.offset});
    if (setw != setw_pos.end()) {
      auto &w = std::get<SetWordOp>(out.ops[setw->second]);
      if (!w.value.is_literal()) {
        throw Error(ErrorCode::kDanglingEvent,
                    e.var + "@" + std::to_string(e.offset) + " is bound");
      }
      w.value.literal = e.after;
    } else {
      added[alloc->second][e.offset] = SetWordOp{e.var, e.offset, Operand::Literal(e.after)};
    }
  }
  if (added.empty()) return out;
  std::vector<ScriptOp> ops;
  ops.reserve(out.ops.size() + added.size());
  for (std::size_t i = 0; i < out.ops.size(); ++i) {
    ops.push_back(std::move(out.ops[i]));
    auto it = added.find(i);
    if (it == added.end()) continue;
    for (auto &[off, w] : it->second) ops.push_back(std::move(w));
  }
  out.ops = std::move(ops);
  return out;
}

}  // namespace tracesynth
