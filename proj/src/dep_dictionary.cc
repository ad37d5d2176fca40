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

#include "tracesynth/dep_dictionary.h"

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "tracesynth/error.h"
#include "tracesynth/text.h"

namespace tracesynth {

bool IsSuccess(const SyscallRecord &record, const LearnOptions &opts) {
  if (record.ret == 0) return opts.zero_is_success;
  return record.ret > 0;
}

bool DependencyDictionary::Add(const std::string &producer,
                               DependentTemplate tmpl) {
  auto &list = entries_[producer];
  for (const auto &t : list) {
    if (t.child_name == tmpl.child_name && t.child_slot == tmpl.child_slot &&
        t.mode == tmpl.mode && t.producer_source == tmpl.producer_source) {
      return false;
    }
  }
  list.push_back(std::move(tmpl));
  return true;
}

std::size_t DependencyDictionary::TemplateCount() const {
  std::size_t n = 0;
  for (const auto &[name, list] : entries_) n += list.size();
  return n;
}

DependencyDictionary LearnDictionary(const TraceLog &log,
                                     const std::vector<DependencyEdge> &edges,
                                     const LearnOptions &opts) {
  auto record_at = [&](uint64_t seq) -> const SyscallRecord & {
    if (seq == 0 || seq > log.records.size()) {
      throw Error(ErrorCode::kInconsistentEdge,
                  "edge references seq " + std::to_string(seq));
    }
    return log.records[seq - 1];
  };
  // Slots of each consumer that are themselves dependencies.
  std::map<uint64_t, std::set<uint32_t>> bound_slots;
  for (const auto &e : edges) bound_slots[e.consumer_seq].insert(e.consumer_slot);

  // Process in consumer order so the earliest occurrence teaches.
  std::vector<const DependencyEdge *> ordered;
  ordered.reserve(edges.size());
  for (const auto &e : edges) ordered.push_back(&e);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const DependencyEdge *a, const DependencyEdge *b) {
                     return std::tie(a->consumer_seq, a->consumer_slot) <
                            std::tie(b->consumer_seq, b->consumer_slot);
                   });

  DependencyDictionary dict;
  for (const DependencyEdge *e : ordered) {
    const SyscallRecord &consumer = record_at(e->consumer_seq);
    if (!IsSuccess(consumer, opts)) continue;
    const SyscallRecord &producer = record_at(e->producer_seq);
    DependentTemplate tmpl;
    tmpl.child_name = consumer.name;
    tmpl.child_slot = e->consumer_slot;
    tmpl.mode = e->mode;
    tmpl.producer_source = e->producer_source;
    tmpl.taught_by = consumer.seq;
    tmpl.taught_ret = consumer.ret;
    const auto &bound = bound_slots[consumer.seq];
    for (const auto &arg : consumer.args) {
      if (arg.slot == e->consumer_slot) continue;
      FixedArg fixed;
      fixed.raw = arg.raw;
      fixed.bound = bound.count(arg.slot) != 0;
      if (arg.direction == Direction::kIn) fixed.pointee = arg.pointee;
      tmpl.fixed_args.emplace(arg.slot, std::move(fixed));
    }
    dict.Add(producer.name, std::move(tmpl));
  }
  return dict;
}

std::vector<DependentTemplate> QueryChildren(const DependencyDictionary &dict,
                                             std::string_view name) {
  auto it = dict.entries().find(name);
  if (it == dict.entries().end()) return {};
  std::vector<DependentTemplate> out = it->second;
  std::stable_sort(out.begin(), out.end(),
                   [](const DependentTemplate &a, const DependentTemplate &b) {
                     return std::tie(a.taught_by, a.child_slot) <
                            std::tie(b.taught_by, b.child_slot);
                   });
  return out;
}


std::string SerializeDictionary(const DependencyDictionary &dict) {
  std::string out;
  for (const auto &[producer, list] : dict.entries()) {
    for (const auto &t : list) {
      out += "K|" + producer + "|" + t.child_name + "|" +
             std::to_string(t.child_slot) + "|" +
             std::string(DepModeName(t.mode)) + "|" +
             t.producer_source.ToString() + "|" + std::to_string(t.taught_by) +
             "|" + SignedHex(t.taught_ret) + "\n";
      for (const auto &[slot, fixed] : t.fixed_args) {
        out += "F|" + std::to_string(slot) + "=" + Hex(fixed.raw);
        if (fixed.pointee) out += "=" + FormatPointee(*fixed.pointee);
        if (fixed.bound) out += "|bound";
        out += "\n";
      }
    }
  }
  return out;
}

DependencyDictionary ParseDictionary(std::string_view text) {
  DependencyDictionary dict;
  std::string producer;
  std::optional<DependentTemplate> pending;
  auto flush = [&] {
    if (pending) dict.Add(producer, std::move(*pending));
    pending.reset();
  };
  std::size_t lineno = 0;
  for (auto raw : Lines(text)) {
    ++lineno;
    auto line = Trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto bad = [&](const char *why) {
      return Error(ErrorCode::kMalformedLine, why, lineno);
    };
    auto f = Split(line, '|');
    if (f[0] == "K") {
      flush();
      if (f.size() != 8) throw bad("K line needs 8 fields");
      DependentTemplate t;
      t.child_name = std::string(f[2]);
      auto slot = ParseDecimal(f[3]);
      auto mode = ParseDepMode(f[4]);
      auto src = ProducerSource::Parse(f[5]);
      auto taught = ParseDecimal(f[6]);
      auto ret = ParseSignedHex(f[7]);
      if (!slot || !mode || !src || !taught || !ret || *slot > UINT32_MAX) {
        throw bad("bad K field");
      }
      t.child_slot = static_cast<uint32_t>(*slot);
      t.mode = *mode;
      t.producer_source = *src;
      t.taught_by = *taught;
      t.taught_ret = *ret;
      producer = std::string(f[1]);
      pending = std::move(t);
    } else if (f[0] == "F") {
      if (!pending) throw bad("F line without K line");
      if (f.size() != 2 && f.size() != 3) throw bad("bad F line");
      FixedArg fixed;
      if (f.size() == 3) {
        if (f[2] != "bound") throw bad("bad F flag");
        fixed.bound = true;
      }
      auto body = f[1];
      auto eq = body.find('=');
      if (eq == std::string_view::npos) throw bad("F needs slot=value");
      auto slot = ParseDecimal(body.substr(0, eq));
      auto rest = body.substr(eq + 1);
      auto eq2 = rest.find('=');
      auto raw_val = ParseHex(rest.substr(0, eq2));
      if (!slot || !raw_val || *slot > UINT32_MAX) throw bad("bad F value");
      fixed.raw = *raw_val;
      if (eq2 != std::string_view::npos) {
        fixed.pointee = ParsePointee(rest.substr(eq2 + 1), lineno);
      }
      pending->fixed_args[static_cast<uint32_t>(*slot)] = std::move(fixed);
    } else {
      throw bad("unknown record tag");
    }
  }
  flush();
  return dict;
}

}  // namespace tracesynth
