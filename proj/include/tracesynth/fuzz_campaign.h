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

#ifndef TRACESYNTH_FUZZ_CAMPAIGN_H_
#define TRACESYNTH_FUZZ_CAMPAIGN_H_

// Execute-mutate campaign loop, success-rate and throughput measurement,
// trace statistics, and the `|`-delimited campaign report.
//
// Config file: `key = value` lines. Keys: iterations, step_budget, seed,
// continue_on_error, top_n, mutation.rate, mutation.threshold,
// mutation.seed, mutation.weights (bitflip:arith:boundary:random). `seed`
// and `mutation.seed` name the same value; the later line wins.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tracesynth/dep_analysis.h"
#include "tracesynth/mutation.h"
#include "tracesynth/script_ir.h"
#include "tracesynth/sim_kernel.h"
#include "tracesynth/trace_model.h"
#include "tracesynth/type_db.h"

namespace tracesynth {

struct CampaignConfig {
  uint64_t iterations = 100;
  // Virtual steps per run; 0 picks twice the baseline run's steps.
  uint64_t step_budget = 0;
  bool continue_on_error = true;
  std::size_t top_n = 10;
  MutationConfig mutation;

  void Validate() const;
};

CampaignConfig ParseCampaignConfig(std::string_view text);
std::string SerializeCampaignConfig(const CampaignConfig &cfg);
std::vector<std::pair<std::string, std::string>> ConfigEntries(
    const CampaignConfig &cfg);

struct CrashReport {
  uint64_t iteration = 0;
  std::string call_id;
  std::string name;
  std::string kind;
  std::vector<MutationEvent> events;
  uint64_t seed = 0;  // per-iteration RNG seed

  bool operator==(const CrashReport &) const = default;
};

// Success of one provenance class: "recovered", "L1", "L2", ...
struct SuccessRow {
  std::string origin;
  std::size_t matched = 0;
  std::size_t total = 0;

  double rate() const;
  bool operator==(const SuccessRow &) const = default;
};

// Rows for recovered calls, each insertion level present in the script, and
// "inserted" over all levels. A call that did not run counts as a mismatch.
std::vector<SuccessRow> MeasureSuccessRate(const std::vector<CallReturn> &returns,
                                           const Script &script);

struct Throughput {
  uint64_t calls = 0;
  uint64_t exec_steps = 0;
  // exec + setup + per-iteration setup + budget left over by fatal runs
  uint64_t total_steps = 0;

  double instant() const;
  double averaged() const;
  bool operator==(const Throughput &) const = default;
};

struct CampaignStats {
  uint64_t iterations_run = 0;
  std::vector<SuccessRow> baseline;
  Throughput throughput;
  uint64_t total_crashes = 0;
  uint64_t unique_crashes = 0;
  uint64_t other_fatal = 0;  // hangs, bad input, undersized outputs
  std::vector<uint64_t> unique_by_iteration;  // cumulative, per iteration
};

struct CampaignResult {
  std::vector<CrashReport> crashes;
  CampaignStats stats;
};

// Throws Error(kNeverHealthy) when the unmutated script does not complete.
CampaignResult RunCampaign(const SimSpecSet &specs, const TypeDb &types,
                           const Script &script, const CampaignConfig &cfg);

// Per-iteration seed.
uint64_t IterationSeed(uint64_t seed, uint64_t iteration);

struct TraceStats {
  std::size_t type_count = 0;
  std::size_t successive = 0;  // names with at least one dependent child
  std::size_t max_children = 0;
  std::size_t children_sum = 0;
  std::vector<std::pair<std::string, std::size_t>> frequency;  // top N

  double avg_children() const;
  bool operator==(const TraceStats &) const = default;
};

// Children of a name are the distinct names that consume its outputs.
TraceStats ComputeTraceStats(const TraceLog &log,
                             const std::vector<DependencyEdge> &edges,
                             std::size_t top_n = 10);

// ---- Report ---------------------------------------------------------------

struct LevelCount {
  std::string origin;  // "recovered", "L1", ...
  std::size_t count = 0;
  bool operator==(const LevelCount &) const = default;
};

struct CrashLine {
  uint64_t iteration = 0;
  std::string name;
  std::string kind;
  uint64_t seed = 0;
  bool operator==(const CrashLine &) const = default;
};

// Everything a report line carries. Derived numbers (ratios, rates) are
// recomputed on emission and checked on parse.
struct Report {
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<LevelCount> levels;
  std::vector<SuccessRow> success;
  std::optional<Throughput> throughput;
  std::optional<std::pair<uint64_t, uint64_t>> crash_counts;  // total, unique
  std::vector<std::pair<uint64_t, uint64_t>> timeline;  // iteration, unique
  std::vector<std::pair<std::string, std::size_t>> frequency;
  std::optional<TraceStats> trace;  // frequency lives in `frequency`
  std::vector<CrashLine> crashes;

  bool empty() const;
  bool operator==(const Report &) const = default;
};

// Insertion counts per level from the script's provenance.
std::vector<LevelCount> CountLevels(const Script &script);

Report BuildReport(const CampaignConfig *cfg, const Script *script,
                   const CampaignResult *result, const TraceStats *trace);

std::string EmitReport(const Report &report);
// Throws Error(kMalformedLine) on unknown tags or inconsistent derived values.
Report ParseReport(std::string_view text);

}  // namespace tracesynth

#endif  // TRACESYNTH_FUZZ_CAMPAIGN_H_
