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

#include "tracesynth/dep_analysis.h"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tracesynth/error.h"
#include "tracesynth/text.h"

namespace tracesynth {

std::string ProducerSource::ToString() const {
  return is_return ? "ret" : "out" + std::to_string(slot);
}

std::optional<ProducerSource> ProducerSource::Parse(std::string_view text) {
  if (text == "ret") return Return();
  if (text.substr(0, 3) != "out") return std::nullopt;
  auto slot = ParseDecimal(text.substr(3));
  if (!slot || *slot > UINT32_MAX) return std::nullopt;
  return Output(static_cast<uint32_t>(*slot));
}

std::string_view DepModeName(DepMode mode) {
  switch (mode) {
    case DepMode::kAddressReuse: return "AddressReuse";
    case DepMode::kContentUse: return "ContentUse";
    case DepMode::kReturnUse: return "ReturnUse";
  }
  return "?";
}

std::optional<DepMode> ParseDepMode(std::string_view text) {
  if (text == "AddressReuse") return DepMode::kAddressReuse;
  if (text == "ContentUse") return DepMode::kContentUse;
  if (text == "ReturnUse") return DepMode::kReturnUse;
  return std::nullopt;
}

void OutputTable::Append(OutputTableEntry entry) {
  entry.ordinal = entries_.size();
  entries_.push_back(std::move(entry));
}

void RecordOutputs(OutputTable &table, const SyscallRecord &record,
                   const TypeDb &types) {
  const Signature &sig = LookupSignature(types, record.name);
  for (const auto &out : record.outputs) {
    if (out.slot >= sig.size() ||
        sig[out.slot].direction != Direction::kOut) {
      continue;
    }
    const ArgValue *arg = record.FindArg(out.slot);
    if (arg == nullptr) continue;
    OutputTableEntry entry;
    entry.producer_seq = record.seq;
    entry.source = ProducerSource::Output(out.slot);
    entry.address = arg->raw;
    entry.content = record.OutputContent(out.slot);
    table.Append(std::move(entry));
  }
  if (record.ret > 0) {
    OutputTableEntry entry;
    entry.producer_seq = record.seq;
    entry.source = ProducerSource::Return();
    entry.ret = record.ret;
    table.Append(std::move(entry));
  }
}

std::optional<ArgMatch> MatchArgument(const OutputTable &table,
                                      const ArgValue &arg,
                                      const ArgTypeDescriptor &desc) {
  if (desc.kind != ArgKind::kHandle && !IsAddressLike(arg.raw)) {
    return std::nullopt;
  }
  const auto &entries = table.entries();
  for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
    if (it->address && *it->address == arg.raw) {
      return ArgMatch{&*it, DepMode::kAddressReuse};
    }
    if (it->content && *it->content == arg.raw) {
      return ArgMatch{&*it, DepMode::kContentUse};
    }
    if (it->ret && static_cast<uint64_t>(*it->ret) == arg.raw) {
      return ArgMatch{&*it, DepMode::kReturnUse};
    }
  }
  return std::nullopt;
}

std::vector<DependencyEdge> AnalyzeDependencies(const TraceLog &log,
                                                const TypeDb &types) {
  std::vector<DependencyEdge> edges;
  OutputTable table;
  for (const auto &rec : log.records) {
    const Signature *sig = types.Find(rec.name);
    if (sig == nullptr) throw Error(ErrorCode::kUnknownSyscall, rec.name);
    for (const auto &arg : rec.args) {
      if (arg.slot >= sig->size()) continue;
      const ArgTypeDescriptor &desc = (*sig)[arg.slot];
      if (desc.direction != Direction::kIn) continue;
      auto match = MatchArgument(table, arg, desc);
      if (!match) continue;
      edges.push_back({match->entry->producer_seq, match->entry->source,
                       rec.seq, arg.slot, match->mode});
    }
    RecordOutputs(table, rec, types);
  }
  return edges;
}

std::string SerializeEdges(const std::vector<DependencyEdge> &edges) {
  std::string out;
  for (const auto &e : edges) {
    out += "D|" + std::to_string(e.producer_seq) + ":" +
           e.producer_source.ToString() + "|" +
           std::to_string(e.consumer_seq) + ":" +
           std::to_string(e.consumer_slot) + "|" +
           std::string(DepModeName(e.mode)) + "\n";
  }
  return out;
}

std::vector<DependencyEdge> ParseEdges(std::string_view text) {
  std::vector<DependencyEdge> edges;
  std::size_t lineno = 0;
  for (auto raw : Lines(text)) {
    ++lineno;
    auto line = Trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto f = Split(line, '|');
    auto bad = [&](const char *why) {
      return Error(ErrorCode::kMalformedLine, why, lineno);
    };
    if (f.size() != 4 || f[0] != "D") throw bad("edge needs 4 fields");
    auto prod = Split(f[1], ':');
    auto cons = Split(f[2], ':');
    if (prod.size() != 2 || cons.size() != 2) throw bad("bad endpoint");
    auto pseq = ParseDecimal(prod[0]);
    auto src = ProducerSource::Parse(prod[1]);
    auto cseq = ParseDecimal(cons[0]);
    auto cslot = ParseDecimal(cons[1]);
    auto mode = ParseDepMode(f[3]);
    if (!pseq || !src || !cseq || !cslot || !mode || *cslot > UINT32_MAX) {
      throw bad("bad edge field");
    }
    edges.push_back(
        {*pseq, *src, *cseq, static_cast<uint32_t>(*cslot), *mode});
  }
  return edges;
}

}  // namespace tracesynth
