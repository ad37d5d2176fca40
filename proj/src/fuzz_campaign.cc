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

#include "tracesynth/fuzz_campaign.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <set>

#include "tracesynth/error.h"
#include "tracesynth/rng.h"
#include "tracesynth/text.h"

namespace tracesynth {
namespace {

constexpr std::string_view kReportHeader = "# tracesynth report v1";

std::string FormatDouble(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::optional<double> ParseDouble(std::string_view t) {
  double v = 0;
  auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (r.ec != std::errc() || r.ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

double Ratio(uint64_t num, uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

uint64_t RequireUint(std::string_view t, std::size_t line) {
  auto v = ParseDecimal(Trim(t));
  if (!v) {
    throw Error(ErrorCode::kMalformedLine, "expected a count, got '" + std::string(t) + "'",
                line);
  }
  return *v;
}

}  // namespace

// ---- Config ----------------------------------------------------------------

void CampaignConfig::Validate() const {
  if (iterations == 0) {
    throw Error(ErrorCode::kMalformedConfig, "iterations must be at least 1");
  }
  mutation.Validate();
}

CampaignConfig ParseCampaignConfig(std::string_view text) {
  CampaignConfig cfg;
  std::size_t line_no = 0;
  for (auto raw : Lines(text)) {
    ++line_no;
    std::string_view line = Trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kMalformedConfig, "expected key = value", line_no);
    }
    std::string_view key = Trim(line.substr(0, eq));
    std::string_view value = Trim(line.substr(eq + 1));
    auto bad = [&]() {
      return Error(ErrorCode::kMalformedConfig,
                   "bad value for " + std::string(key) + ": '" + std::string(value) + "'",
                   line_no);
    };
    auto uint = [&]() {
      auto v = ParseDecimal(value);
      if (!v) v = ParseHex(value);
      if (!v) throw bad();
      return *v;
    };
    if (key == "iterations") {
      cfg.iterations = uint();
    } else if (key == "step_budget") {
      cfg.step_budget = uint();
    } else if (key == "seed" || key == "mutation.seed") {
      cfg.mutation.seed = uint();
    } else if (key == "top_n") {
      cfg.top_n = uint();
    } else if (key == "continue_on_error") {
      if (value == "true" || value == "1") {
        cfg.continue_on_error = true;
      } else if (value == "false" || value == "0") {
        cfg.continue_on_error = false;
      } else {
        throw bad();
      }
    } else if (key == "mutation.rate") {
      auto v = ParseDouble(value);
      if (!v) throw bad();
      cfg.mutation.rate = *v;
    } else if (key == "mutation.threshold") {
      cfg.mutation.threshold = uint();
    } else if (key == "mutation.weights") {
      auto parts = Split(value, ':');
      if (parts.size() != 4) throw bad();
      for (std::size_t i = 0; i < 4; ++i) {
        auto v = ParseDouble(Trim(parts[i]));
        if (!v) throw bad();
        cfg.mutation.weights[i] = *v;
      }
    } else {
      throw Error(ErrorCode::kMalformedConfig, "unknown key " + std::string(key),
                  line_no);
    }
  }
  cfg.Validate();
  return cfg;
}

std::vector<std::pair<std::string, std::string>> ConfigEntries(
    const CampaignConfig &cfg) {
  const auto &w = cfg.mutation.weights;
  return {
      {"iterations", std::to_string(cfg.iterations)},
      {"step_budget", std::to_string(cfg.step_budget)},
      {"seed", std::to_string(cfg.mutation.seed)},
      {"continue_on_error", cfg.continue_on_error ? "true" : "false"},
      {"top_n", std::to_string(cfg.top_n)},
      {"mutation.rate", FormatDouble(cfg.mutation.rate)},
      {"mutation.threshold", std::to_string(cfg.mutation.threshold)},
      {"mutation.weights", FormatDouble(w[0]) + ":" + FormatDouble(w[1]) + ":" +
                               FormatDouble(w[2]) + ":" + FormatDouble(w[3])},
  };
}

std::string SerializeCampaignConfig(const CampaignConfig &cfg) {
  std::string out;
  for (const auto &[k, v] : ConfigEntries(cfg)) out += k + " = " + v + "\n";
  return out;
}

// ---- Measurement -----------------------------------------------------------

double SuccessRow::rate() const { return Ratio(matched, total); }
double Throughput::instant() const { return Ratio(calls, exec_steps); }
double Throughput::averaged() const { return Ratio(calls, total_steps); }
double TraceStats::avg_children() const { return Ratio(children_sum, successive); }

std::vector<SuccessRow> MeasureSuccessRate(const std::vector<CallReturn> &returns,
                                           const Script &script) {
  std::map<std::string, int64_t> got;
  for (const auto &r : returns) got[r.call_id] = r.ret;
  SuccessRow recovered{"recovered", 0, 0};
  SuccessRow inserted{"inserted", 0, 0};
  std::map<int, SuccessRow> levels;
  for (const auto &op : script.ops) {
    const auto *inv = std::get_if<InvokeOp>(&op);
    if (inv == nullptr) continue;
    auto it = got.find(inv->call_id);
    bool ok = it != got.end() && it->second == inv->expected_ret;
    auto prov = script.provenance.find(inv->call_id);
    if (prov != script.provenance.end() && prov->second.inserted) {
      SuccessRow &row = levels[prov->second.level];
      row.origin = "L" + std::to_string(prov->second.level);
      ++row.total;
      ++inserted.total;
      if (ok) {
        ++row.matched;
        ++inserted.matched;
      }
    } else {
      ++recovered.total;
      if (ok) ++recovered.matched;
    }
  }
  std::vector<SuccessRow> rows = {recovered};
  for (auto &[level, row] : levels) rows.push_back(row);
  if (!levels.empty()) rows.push_back(inserted);
  return rows;
}

uint64_t IterationSeed(uint64_t seed, uint64_t iteration) {
  return SplitMix64(seed + iteration);
}

CampaignResult RunCampaign(const SimSpecSet &specs, const TypeDb &types,
                           const Script &script, const CampaignConfig &cfg) {
  cfg.Validate();
  CampaignResult result;
  ExecOptions opts;
  opts.step_budget = cfg.step_budget;
  ExecResult baseline = ExecuteScript(specs, types, script, opts);
  if (!baseline.completed()) {
    throw Error(ErrorCode::kNeverHealthy,
                "unmutated script stops at " + baseline.failing_call + " (" +
                    std::string(ExecStatusName(baseline.status)) + ")");
  }
  if (opts.step_budget == 0) {
    opts.step_budget = 2 * (baseline.exec_steps + baseline.setup_steps);
  }
  if (opts.step_budget < script.ops.size()) {
    throw Error(ErrorCode::kMalformedConfig, "step_budget below script length");
  }
  CampaignStats &stats = result.stats;
  stats.baseline = MeasureSuccessRate(baseline.returns, script);

  std::vector<const InvokeOp *> invokes;
  for (const auto &op : script.ops) {
    if (const auto *inv = std::get_if<InvokeOp>(&op)) invokes.push_back(inv);
  }
  const MutationPlanner planner(script, types, cfg.mutation);
  std::set<std::pair<std::string, std::string>> unique;
  uint64_t executed_before = 0;
  for (uint64_t it = 0; it < cfg.iterations; ++it) {
    const uint64_t seed = IterationSeed(cfg.mutation.seed, it);
    Rng rng(seed);
    std::vector<MutationEvent> events;
    for (std::size_t k = 0; k < invokes.size(); ++k) {
      auto e = planner.Plan(*invokes[k], executed_before + k, rng);
      events.insert(events.end(), e.begin(), e.end());
    }
    Script mutated = ApplyMutations(script, events);
    ExecResult r = ExecuteScript(specs, types, mutated, opts);
    ++stats.iterations_run;
    executed_before += r.calls_executed;
    Throughput &tp = stats.throughput;
    tp.calls += r.calls_executed;
    tp.exec_steps += r.exec_steps;
    tp.total_steps += r.exec_steps + r.setup_steps + mutated.ops.size();
    if (!r.completed()) {
      uint64_t used = r.exec_steps + r.setup_steps;
      tp.total_steps += opts.step_budget > used ? opts.step_budget - used : 0;
    }
    if (r.status == ExecStatus::kCrashed) {
      CrashReport cr;
      cr.iteration = it;
      cr.call_id = r.failing_call;
      auto pos = mutated.FindInvoke(r.failing_call);
      cr.name = std::get<InvokeOp>(mutated.ops[*pos]).name;
      cr.kind = r.crash_kind;
      cr.events = std::move(events);
      cr.seed = seed;
      unique.insert({cr.name, cr.kind});
      result.crashes.push_back(std::move(cr));
      ++stats.total_crashes;
    } else if (!r.completed()) {
      ++stats.other_fatal;
    }
    stats.unique_crashes = unique.size();
    stats.unique_by_iteration.push_back(unique.size());
    if (!r.completed() && !cfg.continue_on_error) break;
  }
  return result;
}

TraceStats ComputeTraceStats(const TraceLog &log,
                             const std::vector<DependencyEdge> &edges,
                             std::size_t top_n) {
  TraceStats s;
  std::map<std::string, std::size_t> freq;
  std::map<uint64_t, const SyscallRecord *> by_seq;
  for (const auto &r : log.records) {
    ++freq[r.name];
    by_seq[r.seq] = &r;
  }
  s.type_count = freq.size();
  std::map<std::string, std::set<std::string>> children;
  for (const auto &e : edges) {
    auto p = by_seq.find(e.producer_seq);
    auto c = by_seq.find(e.consumer_seq);
    if (p == by_seq.end() || c == by_seq.end()) continue;
    children[p->second->name].insert(c->second->name);
  }
  for (const auto &[name, kids] : children) {
    ++s.successive;
    s.children_sum += kids.size();
    s.max_children = std::max(s.max_children, kids.size());
  }
  s.frequency.assign(freq.begin(), freq.end());
  std::stable_sort(s.frequency.begin(), s.frequency.end(),
                   [](const auto &a, const auto &b) { return a.second > b.second; });
  if (s.frequency.size() > top_n) s.frequency.resize(top_n);
  return s;
}

// ---- Report ----------------------------------------------------------------

bool Report::empty() const {
  return config.empty() && levels.empty() && success.empty() && !throughput &&
         !crash_counts && timeline.empty() && frequency.empty() && !trace &&
         crashes.empty();
}

std::vector<LevelCount> CountLevels(const Script &script) {
  LevelCount recovered{"recovered", 0};
  std::map<int, std::size_t> levels;
  for (const auto &op : script.ops) {
    const auto *inv = std::get_if<InvokeOp>(&op);
    if (inv == nullptr) continue;
    auto prov = script.provenance.find(inv->call_id);
    if (prov != script.provenance.end() && prov->second.inserted) {
      ++levels[prov->second.level];
    } else {
      ++recovered.count;
    }
  }
  std::vector<LevelCount> out = {recovered};
  for (const auto &[level, n] : levels) out.push_back({"L" + std::to_string(level), n});
  return out;
}

Report BuildReport(const CampaignConfig *cfg, const Script *script,
                   const CampaignResult *result, const TraceStats *trace) {
  Report r;
  if (cfg) r.config = ConfigEntries(*cfg);
  if (script) r.levels = CountLevels(*script);
  if (result) {
    const CampaignStats &s = result->stats;
    r.success = s.baseline;
    r.throughput = s.throughput;
    r.crash_counts = {{s.total_crashes, s.unique_crashes}};
    for (std::size_t i = 0; i < s.unique_by_iteration.size(); ++i) {
      bool changed = i == 0 || s.unique_by_iteration[i] != s.unique_by_iteration[i - 1];
      bool last = i + 1 == s.unique_by_iteration.size();
      if (changed || last) r.timeline.push_back({i, s.unique_by_iteration[i]});
    }
    for (const auto &c : result->crashes) {
      r.crashes.push_back({c.iteration, c.name, c.kind, c.seed});
    }
  }
  if (trace) {
    r.trace = *trace;
    r.trace->frequency.clear();
    r.frequency = trace->frequency;
  }
  return r;
}

std::string EmitReport(const Report &report) {
  std::string out(kReportHeader);
  out += "\n";
  for (const auto &[k, v] : report.config) out += "CFG|" + k + "|" + v + "\n";
  std::size_t recovered = 0;
  for (const auto &l : report.levels) {
    if (l.origin == "recovered") recovered = l.count;
  }
  for (const auto &l : report.levels) {
    out += "LEVEL|" + l.origin + "|" + std::to_string(l.count) + "|" +
           Fixed(Ratio(l.count, recovered), 4) + "\n";
  }
  for (const auto &s : report.success) {
    out += "SUCCESS|" + s.origin + "|" + std::to_string(s.matched) + "|" +
           std::to_string(s.total) + "|" + Fixed(s.rate(), 4) + "\n";
  }
  if (report.throughput) {
    const Throughput &t = *report.throughput;
    out += "RATE|" + std::to_string(t.calls) + "|" + std::to_string(t.exec_steps) +
           "|" + std::to_string(t.total_steps) + "|" + Fixed(t.instant(), 6) + "|" +
           Fixed(t.averaged(), 6) + "\n";
  }
  if (report.crash_counts) {
    out += "CRASHES|" + std::to_string(report.crash_counts->first) + "|" +
           std::to_string(report.crash_counts->second) + "\n";
  }
  for (const auto &[it, n] : report.timeline) {
    out += "TIMELINE|" + std::to_string(it) + "|" + std::to_string(n) + "\n";
  }
  for (const auto &[name, n] : report.frequency) {
    out += "FREQ|" + name + "|" + std::to_string(n) + "\n";
  }
  if (report.trace) {
    const TraceStats &t = *report.trace;
    out += "TRACE|" + std::to_string(t.type_count) + "|" +
           std::to_string(t.successive) + "|" + std::to_string(t.max_children) +
           "|" + std::to_string(t.children_sum) + "|" + Fixed(t.avg_children(), 4) +
           "\n";
  }
  for (const auto &c : report.crashes) {
    out += "X|" + std::to_string(c.iteration) + "|" + c.name + "|" + c.kind + "|" +
           Hex(c.seed) + "\n";
  }
  return out;
}

Report ParseReport(std::string_view text) {
  Report r;
  std::size_t line_no = 0;
  for (auto raw : Lines(text)) {
    ++line_no;
    std::string_view line = Trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto f = Split(line, '|');
    auto need = [&](std::size_t n) {
      if (f.size() != n) {
        throw Error(ErrorCode::kMalformedLine,
                    std::string(f[0]) + " line needs " + std::to_string(n) + " fields",
                    line_no);
      }
    };
    auto check = [&](std::string_view got, const std::string &want) {
      if (got != want) {
        throw Error(ErrorCode::kMalformedLine,
                    "derived value " + std::string(got) + " != " + want, line_no);
      }
    };
    std::string_view tag = f[0];
    if (tag == "CFG") {
      need(3);
      r.config.emplace_back(std::string(f[1]), std::string(f[2]));
    } else if (tag == "LEVEL") {
      need(4);
      r.levels.push_back({std::string(f[1]), RequireUint(f[2], line_no)});
    } else if (tag == "SUCCESS") {
      need(5);
      SuccessRow s{std::string(f[1]), RequireUint(f[2], line_no),
                   RequireUint(f[3], line_no)};
      check(f[4], Fixed(s.rate(), 4));
      r.success.push_back(std::move(s));
    } else if (tag == "RATE") {
      need(6);
      Throughput t{RequireUint(f[1], line_no), RequireUint(f[2], line_no),
                   RequireUint(f[3], line_no)};
      check(f[4], Fixed(t.instant(), 6));
      check(f[5], Fixed(t.averaged(), 6));
      r.throughput = t;
    } else if (tag == "CRASHES") {
      need(3);
      r.crash_counts = {{RequireUint(f[1], line_no), RequireUint(f[2], line_no)}};
    } else if (tag == "TIMELINE") {
      need(3);
      r.timeline.emplace_back(RequireUint(f[1], line_no), RequireUint(f[2], line_no));
    } else if (tag == "FREQ") {
      need(3);
      r.frequency.emplace_back(std::string(f[1]), RequireUint(f[2], line_no));
    } else if (tag == "TRACE") {
      need(6);
      TraceStats t;
      t.type_count = RequireUint(f[1], line_no);
      t.successive = RequireUint(f[2], line_no);
      t.max_children = RequireUint(f[3], line_no);
      t.children_sum = RequireUint(f[4], line_no);
      check(f[5], Fixed(t.avg_children(), 4));
      r.trace = t;
    } else if (tag == "X") {
      need(5);
      auto seed = ParseHex(f[4]);
      if (!seed) throw Error(ErrorCode::kMalformedLine, "bad seed", line_no);
      r.crashes.push_back({RequireUint(f[1], line_no), std::string(f[2]),
                           std::string(f[3]), *seed});
    } else {
      throw Error(ErrorCode::kMalformedLine, "unknown report tag " + std::string(tag),
                  line_no);
    }
  }
  // LEVEL ratios depend on the recovered count, so they are checked last.
  std::size_t recovered = 0;
  for (const auto &l : r.levels) {
    if (l.origin == "recovered") recovered = l.count;
  }
  std::size_t level_line = 0;
  line_no = 0;
  for (auto raw : Lines(text)) {
    ++line_no;
    auto f = Split(Trim(raw), '|');
    if (f[0] != "LEVEL") continue;
    const LevelCount &l = r.levels[level_line++];
    if (f[3] != Fixed(Ratio(l.count, recovered), 4)) {
      throw Error(ErrorCode::kMalformedLine, "inconsistent level ratio", line_no);
    }
  }
  return r;
}

}  // namespace tracesynth
