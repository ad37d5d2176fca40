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


// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "test_support.h"
#include "tracesynth/error.h"
#include "tracesynth/fuzz_campaign.h"
#include "tracesynth/mutation.h"
#include "tracesynth/text.h"

namespace tracesynth {
namespace {

using testing::ReadFixture;

struct Outcome {
  bool pass = true;
  std::string detail;

  void Require(bool cond, const std::string &what) {
    if (!cond && pass) {
      pass = false;
      detail = what;
    }
  }
};

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::string Fmt(const char *fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

// Random trace parameters shared by the oracle criteria.
GeneratedRun RandomRun(uint64_t seed, double collisions, Universe &u) {
  u = MakeRandomUniverse(seed);
  std::size_t length = 20 + seed % 181;
  return GenerateRandomTrace(u.types, u.specs, {length, collisions, seed});
}

Outcome OracleEquivalence() {
  Outcome o;
  auto start = std::chrono::steady_clock::now();
  std::size_t traces = 0, edges = 0;
  for (uint64_t seed = 1; seed <= 500; ++seed) {
    Universe u;
    GeneratedRun run = RandomRun(seed, seed % 2 ? 0.25 : 0.0, u);
    o.Require(run.trace.log.records.size() <= 200, "trace longer than 200");
    auto got = AnalyzeDependencies(run.trace.log, u.types);
    auto want = testing::BruteForceEdges(run.trace.log, u.types);
    o.Require(got == want, "mismatch at seed " + std::to_string(seed));
    edges += got.size();
    ++traces;
  }
  double secs = Seconds(start);
  o.Require(secs < 30.0, "took " + Fmt("%.1f s", secs));
  if (o.pass) {
    o.detail = std::to_string(traces) + " traces, " + std::to_string(edges) +
               " edges, " + Fmt("%.2f s", secs);
  }
  return o;
}

Outcome GroundTruth() {
  Outcome o;
  std::size_t clean = 0, noisy = 0, false_pos = 0, truth_edges = 0;
  for (uint64_t seed = 1; seed <= 200; ++seed) {
    Universe u;
    GeneratedRun run = RandomRun(seed, 0.0, u);
    auto got = AnalyzeDependencies(run.trace.log, u.types);
    o.Require(got == run.trace.truth,
              "clean trace differs from ground truth at seed " + std::to_string(seed));
    truth_edges += run.trace.truth.size();
    ++clean;
  }
  for (uint64_t seed = 1001; seed <= 1200; ++seed) {
    Universe u;
    GeneratedRun run = RandomRun(seed, 0.4, u);
    auto got = AnalyzeDependencies(run.trace.log, u.types);
    o.Require(got == testing::BruteForceEdges(run.trace.log, u.types),
              "collision trace differs from oracle at seed " + std::to_string(seed));
    std::set<DependencyEdge> truth(run.trace.truth.begin(), run.trace.truth.end());
    for (const auto &e : got) false_pos += truth.count(e) == 0;
    ++noisy;
  }
  o.Require(false_pos > 0, "collision traces produced no false positives");
  if (o.pass) {
    o.detail = std::to_string(clean) + " clean traces exact (" +
               std::to_string(truth_edges) + " edges), " + std::to_string(noisy) +
               " collision traces match oracle with " + std::to_string(false_pos) +
               " false positives";
  }
  return o;
}

bool ReplayMatches(const TypeDb &types, const SimSpecSet &specs,
                   const TraceLog &log, std::string &why) {
  auto edges = AnalyzeDependencies(log, types);
  Script s = RecoverModelScript(log, edges, types);
  ExecResult r = ExecuteScript(specs, types, s);
  if (!r.completed()) {
    why = "did not complete: " + std::string(ExecStatusName(r.status));
    return false;
  }
  if (r.returns.size() != log.records.size()) {
    why = "return count differs";
    return false;
  }
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    if (r.returns[i].ret != log.records[i].ret) {
      why = "seq " + std::to_string(log.records[i].seq) + " returned " +
            SignedHex(r.returns[i].ret) + " vs " + SignedHex(log.records[i].ret);
      return false;
    }
  }
  return true;
}

Outcome ReplayRoundTrip() {
  Outcome o;
  std::size_t fixtures = 0, calls = 0;
  double worst = 0;
  auto check = [&](const TypeDb &types, const SimSpecSet &specs,
                   const TraceLog &log, const std::string &name) {
    auto start = std::chrono::steady_clock::now();
    std::string why;
    o.Require(ReplayMatches(types, specs, log, why), name + ": " + why);
    worst = std::max(worst, Seconds(start));
    calls += log.records.size();
    ++fixtures;
  };
  for (uint64_t seed = 1; seed <= 300; ++seed) {
    Universe u;
    GeneratedRun run = RandomRun(seed, seed % 3 == 0 ? 0.3 : 0.0, u);
    check(u.types, u.specs, run.trace.log, "random seed " + std::to_string(seed));
  }
  struct Fx { const char *types, *specs, *workload; };
  for (const Fx &f : {Fx{"insert30/universe.types", "insert30/universe.specs",
                         "insert30/plan.workload"},
                      Fx{"display/dx.types", "display/dx.specs", "display/dx.workload"},
                      Fx{"rectify/rect.types", "rectify/rect.specs",
                         "rectify/bad_input.workload"}}) {
    TypeDb types = LoadTypeDb(ReadFixture(f.types));
    SimSpecSet specs = LoadSimSpecs(ReadFixture(f.specs));
    GeneratedTrace g = GenerateTrace(types, specs, ParseWorkload(ReadFixture(f.workload)), 1);
    check(types, specs, g.log, f.workload);
  }
  o.Require(worst < 5.0, "slowest fixture " + Fmt("%.2f s", worst));
  if (o.pass) {
    o.detail = std::to_string(fixtures) + " traces, " + std::to_string(calls) +
               " calls replayed exactly, slowest " + Fmt("%.3f s", worst);
  }
  return o;
}

Outcome InsertionCorrectness() {
  Outcome o;
  testing::PipelineRun run = testing::RunPipeline(
      "insert30/universe.types", "insert30/universe.specs", "insert30/plan.workload", 1, 3);
  o.Require(run.log.records.size() == 30, "fixture is not 30 calls");
  auto want = testing::EnumerateLevels(run.log, run.edges, run.dict, run.types, 3);
  std::string counts;
  std::vector<std::set<std::string>> sets;
  for (int l = 0; l < 3; ++l) {
    const auto &ids = run.synth.plan.per_level[l];
    o.Require(ids.size() == want[l],
              "L" + std::to_string(l + 1) + " " + std::to_string(ids.size()) +
                  " vs oracle " + std::to_string(want[l]));
    o.Require(ids.size() > 0, "L" + std::to_string(l + 1) + " is empty");
    sets.emplace_back(ids.begin(), ids.end());
    o.Require(sets.back().size() == ids.size(), "duplicate id within a level");
    counts += (l ? "/" : "") + std::to_string(ids.size());
  }
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      for (const auto &id : sets[a]) {
        o.Require(!sets[b].count(id), "levels overlap on " + id);
      }
    }
  }
  o.Require(CheckScript(run.synth.script, &run.types).empty(), "invalid script");
  if (o.pass) o.detail = "L1/L2/L3 = " + counts + ", oracle agrees, levels disjoint";
  return o;
}

Outcome SuccessRateStructure() {
  Outcome o;
  testing::PipelineRun run = testing::RunPipeline(
      "display/dx.types", "display/dx.specs", "display/dx.workload", 1, 3);
  o.Require(run.rectified.completed, "script does not complete");
  const Script &s = run.rectified.script;
  ExecResult r = ExecuteScript(run.specs, run.types, s);
  auto rows = MeasureSuccessRate(r.returns, s);
  std::map<std::string, SuccessRow> by;
  for (const auto &row : rows) by[row.origin] = row;
  o.Require(by.count("L3") && by["L3"].total > 0, "no L3 calls");
  std::set<std::pair<std::string, uint32_t>> l3_templates;
  for (const auto &[id, p] : s.provenance) {
    if (!p.inserted || p.level != 3) continue;
    const auto &inv = std::get<InvokeOp>(s.ops[*s.FindInvoke(id)]);
    l3_templates.insert({inv.name, 0});
  }
  o.Require(l3_templates.size() == 2, "expected 2 unique L3 templates");
  o.Require(by["L3"].matched == 0, "L3 rate is not 0");
  o.Require(by["L1"].rate() > 0 && by["L2"].rate() > 0, "L1/L2 rate is 0");
  if (o.pass) {
    o.detail = "L1 " + Fmt("%.4f", by["L1"].rate()) + " (" +
               std::to_string(by["L1"].total) + "), L2 " + Fmt("%.4f", by["L2"].rate()) +
               " (" + std::to_string(by["L2"].total) + "), L3 " +
               Fmt("%.4f", by["L3"].rate()) + " (" + std::to_string(by["L3"].total) +
               " calls from 2 templates)";
  }
  return o;
}

Outcome FaultLocalization() {
  Outcome o;
  auto start = std::chrono::steady_clock::now();
  Rng rng(20260);
  std::size_t worst_margin = 0;
  for (int fx = 0; fx < 20; ++fx) {
    Universe u = MakeRandomUniverse(500 + fx);
    std::size_t n = 64 + rng.Below(512 - 64 + 1);
    GeneratedRun run = GenerateRandomTrace(u.types, u.specs, {n, 0.0, 900 + uint64_t(fx)});
    Script s = RecoverModelScript(run.trace.log, run.trace.truth, u.types);
    o.Require(s.InvokeCount() == n, "fixture length mismatch");
    std::size_t pos = 1 + rng.Below(n);
    ExecOptions opts;
    std::string target = std::get<InvokeOp>(s.ops[s.InvokePositions()[pos - 1]]).call_id;
    opts.faults[target] = fx % 2 ? FaultKind::kHang : FaultKind::kBadInput;
    std::size_t runs = 0;
    Executor inner = SimExecutor(u.specs, u.types, opts);
    auto loc = LocalizeFaultyCall(s, [&](const Script &x) { ++runs; return inner(x); });
    std::size_t bound = static_cast<std::size_t>(std::ceil(std::log2(double(n)))) + 2;
    o.Require(loc && loc->call_id == target,
              "fixture " + std::to_string(fx) + " localized wrong call");
    o.Require(runs <= bound, "fixture " + std::to_string(fx) + " used " +
                                 std::to_string(runs) + " > " + std::to_string(bound));
    worst_margin = std::max(worst_margin, runs + 2 > bound ? runs + 2 - bound : 0);
  }
  double secs = Seconds(start);
  o.Require(secs < 10.0, "took " + Fmt("%.1f s", secs));
  if (o.pass) {
    o.detail = "20 fixtures exact; max executions ceil(log2 n)+" +
               std::to_string(worst_margin) + ", " + Fmt("%.2f s", secs);
  }
  return o;
}

// Calls that must disappear with `root`: everything reachable over edges.
std::set<uint64_t> DependentClosure(const std::vector<DependencyEdge> &edges,
                                    uint64_t root) {
  std::set<uint64_t> out = {root};
  for (const auto &e : edges) {
    if (out.count(e.producer_seq)) out.insert(e.consumer_seq);
  }
  return out;
}

Outcome Rectification() {
  Outcome o;
  TypeDb types = LoadTypeDb(ReadFixture("rectify/rect.types"));
  SimSpecSet specs = LoadSimSpecs(ReadFixture("rectify/rect.specs"));
  auto recover = [&](const char *wl) {
    GeneratedTrace g = GenerateTrace(types, specs, ParseWorkload(ReadFixture(wl)), 1);
    return RecoverModelScript(g.log, AnalyzeDependencies(g.log, types), types);
  };
  Script small = recover("rectify/too_small.workload");
  o.Require(!ExecuteScript(specs, types, small).completed(), "too-small fixture already runs");
  RectifyResult rs = RectifyLoop(small, SimExecutor(specs, types));
  o.Require(rs.completed && rs.rounds == 1, "OutputTooSmall not fixed in one round");
  o.Require(CheckScript(rs.script, &types).empty(), "enlarged script invalid");

  Script bad = recover("rectify/bad_input.workload");
  ExecOptions opts;
  opts.faults["c2"] = FaultKind::kBadInput;
  RectifyResult rb = RectifyLoop(bad, SimExecutor(specs, types, opts));
  std::set<std::string> left;
  for (std::size_t p : rb.script.InvokePositions()) {
    left.insert(std::get<InvokeOp>(rb.script.ops[p]).call_id);
  }
  o.Require(rb.completed && left == std::set<std::string>{"c1", "c5", "c6"},
            "BadInput fixture did not drop exactly c2, c3, c4");
  o.Require(CheckScript(rb.script, &types).empty(), "pruned script invalid");

  std::size_t generated = 0;
  for (uint64_t seed = 1; seed <= 30; ++seed) {
    Universe u = MakeRandomUniverse(seed);
    GeneratedRun run = GenerateRandomTrace(u.types, u.specs, {80, 0.0, seed});
    Script s = RecoverModelScript(run.trace.log, run.trace.truth, u.types);
    uint64_t root = 1 + (seed * 7) % 80;
    ExecOptions f;
    f.faults["c" + std::to_string(root)] = FaultKind::kBadInput;
    RectifyResult r = RectifyLoop(s, SimExecutor(u.specs, u.types, f));
    std::set<uint64_t> gone = DependentClosure(run.trace.truth, root);
    bool exact = r.completed && r.rounds == 1;
    for (const auto &rec : run.trace.log.records) {
      bool kept = r.script.FindInvoke("c" + std::to_string(rec.seq)).has_value();
      exact &= kept == !gone.count(rec.seq);
    }
    o.Require(exact, "generated fixture seed " + std::to_string(seed) +
                         " removed the wrong calls");
    o.Require(CheckScript(r.script, &u.types).empty(),
              "generated fixture seed " + std::to_string(seed) + " invalid");
    ++generated;
  }
  if (o.pass) {
    o.detail = "OutputTooSmall fixed in 1 round; BadInput drops c2+dependents; " +
               std::to_string(generated) + " generated removals match edge closure";
  }
  return o;
}

Outcome PlantedCrashes() {
  Outcome o;
  auto start = std::chrono::steady_clock::now();
  testing::PipelineRun run = testing::RunPipeline(
      "insert30/universe.types", "insert30/universe.specs", "insert30/plan.workload", 1, 3);
  SimSpecSet planted = LoadSimSpecs(ReadFixture("insert30/planted.specs"));
  CampaignConfig cfg;
  cfg.iterations = 10000;
  cfg.mutation.rate = 1.0;
  cfg.mutation.weights = {0, 0, 1, 0};
  cfg.mutation.seed = 77;
  auto first = [&](const CampaignResult &r) {
    std::map<std::string, uint64_t> at;
    for (const auto &c : r.crashes) at.emplace(c.kind, c.iteration);
    return at;
  };
  CampaignResult a = RunCampaign(planted, run.types, run.rectified.script, cfg);
  CampaignResult b = RunCampaign(planted, run.types, run.rectified.script, cfg);
  auto fa = first(a), fb = first(b);
  o.Require(fa.count("NullDeref"), "slot == 0 bug not found");
  o.Require(fa.count("IntMaxOverflow"), "slot == INT_MAX bug not found");
  o.Require(fa == fb && a.crashes == b.crashes, "second run differs");
  for (const auto &c : a.crashes) {
    if (c.iteration != fa[c.kind]) continue;
    Script replay = ApplyMutations(run.rectified.script, c.events);
    ExecResult r = ExecuteScript(planted, run.types, replay);
    o.Require(r.status == ExecStatus::kCrashed && r.crash_kind == c.kind,
              "recorded events do not reproduce " + c.kind);
  }
  double secs = Seconds(start);
  o.Require(secs < 60.0, "took " + Fmt("%.1f s", secs));
  if (o.pass) {
    o.detail = "slot==0 at iteration " + std::to_string(fa["NullDeref"]) +
               ", slot==INT_MAX at iteration " + std::to_string(fa["IntMaxOverflow"]) +
               ", identical across runs, " + Fmt("%.1f s", secs);
  }
  return o;
}

Outcome MutationInvariants() {
  Outcome o;
  std::vector<std::pair<Script, TypeDb>> corpus;
  {
    testing::PipelineRun run = testing::RunPipeline(
        "insert30/universe.types", "insert30/universe.specs", "insert30/plan.workload", 1, 3);
    corpus.emplace_back(run.synth.script, run.types);
    testing::PipelineRun dx = testing::RunPipeline(
        "display/dx.types", "display/dx.specs", "display/dx.workload", 1, 2);
    corpus.emplace_back(dx.synth.script, dx.types);
  }
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    Universe u = MakeRandomUniverse(seed);
    GeneratedRun run = GenerateRandomTrace(u.types, u.specs, {60, 0.0, seed});
    corpus.emplace_back(RecoverModelScript(run.trace.log, run.trace.truth, u.types), u.types);
  }

  std::size_t events = 0, below = 0, planned_calls = 0;
  std::array<std::size_t, 4> per_strategy{};
  Rng meta(4242);
  for (uint64_t round = 0; events < 10000 || round < 20; ++round) {
    const auto &[script, types] = corpus[round % corpus.size()];
    MutationConfig cfg;
    cfg.rate = 0.2 + 0.8 * meta.Uniform01();
    cfg.threshold = meta.Below(8);
    for (double &w : cfg.weights) w = static_cast<double>(meta.Below(4));
    if (cfg.weights == std::array<double, 4>{0, 0, 0, 0}) cfg.weights[3] = 1;
    Rng rng(SplitMix64(round));
    uint64_t executed = 0;
    for (std::size_t pos : script.InvokePositions()) {
      const auto &inv = std::get<InvokeOp>(script.ops[pos]);
      const Signature &sig = LookupSignature(types, inv.name);
      auto ev = PlanCallMutation(script, inv, types, cfg, executed, rng);
      ++planned_calls;
      if (executed < cfg.threshold) {
        o.Require(ev.empty(), "event below threshold");
        ++below;
      }
      std::map<std::pair<std::string, uint64_t>, Operand> words;
      for (const auto &op : script.ops) {
        if (const auto *w = std::get_if<SetWordOp>(&op)) words[{w->var, w->offset}] = w->value;
      }
      for (const auto &e : ev) {
        ++events;
        ++per_strategy[static_cast<int>(e.strategy)];
        o.Require(cfg.weights[static_cast<int>(e.strategy)] > 0, "zero-weight strategy used");
        if (e.slot) {
          o.Require(sig[*e.slot].kind != ArgKind::kHandle, "event on a handle slot");
          o.Require(inv.args[*e.slot].is_literal(), "event on a bound slot");
          o.Require(!HasPointee(sig[*e.slot].kind), "pointer value mutated");
        } else {
          auto w = words.find({e.var, e.offset});
          o.Require(w == words.end() || w->second.is_literal(), "event on a bound word");
          for (uint32_t s = 0; s < inv.args.size(); ++s) {
            if (inv.args[s].kind != Operand::Kind::kAddressOf || inv.args[s].var != e.var) {
              continue;
            }
            o.Require(sig[s].direction == Direction::kIn, "event on an output buffer");
            if (sig[s].pointee.empty()) continue;
            for (const auto &f : FlattenStruct(types, sig[s].pointee)) {
              if (f.offset == e.offset) {
                o.Require(f.kind != ArgKind::kHandle, "event on a handle field");
              }
            }
          }
        }
        uint64_t diff = e.before ^ e.after;
        int64_t delta = static_cast<int64_t>(e.after - e.before);
        switch (e.strategy) {
          case Strategy::kBitFlip:
            o.Require(std::popcount(diff) == 1, "bit flip changed != 1 bit");
            break;
          case Strategy::kArithmetic:
            o.Require(delta != 0 && std::abs(delta) <= kArithmeticMaxDelta,
                      "arithmetic delta out of range");
            break;
          case Strategy::kBoundary:
            o.Require(e.after != e.before &&
                          std::find(kBoundaryValues.begin(), kBoundaryValues.end(),
                                    e.after) != kBoundaryValues.end(),
                      "boundary value out of set");
            break;
          case Strategy::kRandom:
            break;
        }
      }
      ++executed;
    }
  }
  o.Require(events >= 10000, "fewer than 10000 events");
  o.Require(below > 0, "threshold never exercised");
  if (o.pass) {
    o.detail = std::to_string(events) + " events over " + std::to_string(planned_calls) +
               " planned calls (" + std::to_string(below) + " below threshold); " +
               "bitflip/arith/boundary/random " + std::to_string(per_strategy[0]) + "/" +
               std::to_string(per_strategy[1]) + "/" + std::to_string(per_strategy[2]) +
               "/" + std::to_string(per_strategy[3]);
  }
  return o;
}

Outcome ThroughputRelation() {
  Outcome o;
  std::size_t campaigns = 0;
  double min_gap = 1e300;
  auto check = [&](const SimSpecSet &specs, const TypeDb &types, const Script &s,
                   CampaignConfig cfg, const std::string &name) {
    CampaignResult r = RunCampaign(specs, types, s, cfg);
    const Throughput &t = r.stats.throughput;
    o.Require(t.averaged() <= t.instant(), name + ": averaged > instant");
    Report rep = ParseReport(EmitReport(BuildReport(&cfg, &s, &r, nullptr)));
    o.Require(rep.throughput && *rep.throughput == t, name + ": rates not reported");
    min_gap = std::min(min_gap, t.instant() - t.averaged());
    ++campaigns;
  };
  testing::PipelineRun ins = testing::RunPipeline(
      "insert30/universe.types", "insert30/universe.specs", "insert30/plan.workload", 1, 3);
  SimSpecSet planted = LoadSimSpecs(ReadFixture("insert30/planted.specs"));
  for (uint64_t seed = 1; seed <= 8; ++seed) {
    CampaignConfig cfg;
    cfg.iterations = 150;
    cfg.mutation.seed = seed;
    cfg.mutation.rate = 0.1 * static_cast<double>(seed);
    cfg.continue_on_error = seed % 2 == 0;
    cfg.step_budget = seed % 3 == 0 ? 5000 : 0;
    check(planted, ins.types, ins.rectified.script, cfg, "insert30 seed " + std::to_string(seed));
  }
  testing::PipelineRun dx = testing::RunPipeline(
      "display/dx.types", "display/dx.specs", "display/dx.workload", 1, 3);
  for (uint64_t seed = 1; seed <= 2; ++seed) {
    CampaignConfig cfg;
    cfg.iterations = 20;
    cfg.mutation.seed = seed;
    check(dx.specs, dx.types, dx.rectified.script, cfg, "display seed " + std::to_string(seed));
  }
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    Universe u = MakeRandomUniverse(seed);
    GeneratedRun run = GenerateRandomTrace(u.types, u.specs, {60, 0.0, seed});
    Script s = RecoverModelScript(run.trace.log, run.trace.truth, u.types);
    CampaignConfig cfg;
    cfg.iterations = 100;
    cfg.mutation.seed = seed;
    cfg.mutation.rate = 0.5;
    check(u.specs, u.types, s, cfg, "random seed " + std::to_string(seed));
  }
  if (o.pass) {
    o.detail = std::to_string(campaigns) + " campaigns, averaged <= instant on all, " +
               "smallest gap " + Fmt("%.6f", min_gap);
  }
  return o;
}

std::string RandomPipelineReport(uint64_t seed) {
  Universe u = MakeRandomUniverse(seed);
  GeneratedRun run = GenerateRandomTrace(u.types, u.specs, {60, 0.1, seed});
  auto edges = AnalyzeDependencies(run.trace.log, u.types);
  DependencyDictionary dict = LearnDictionary(run.trace.log, edges);
  Script rec = RecoverModelScript(run.trace.log, edges, u.types);
  SynthesisResult syn = Synthesize(rec, dict, edges, u.types, 3);
  RectifyResult fixed = RectifyLoop(syn.script, SimExecutor(u.specs, u.types));
  CampaignConfig cfg;
  cfg.iterations = 100;
  cfg.mutation.seed = seed;
  CampaignResult res = RunCampaign(u.specs, u.types, fixed.script, cfg);
  TraceStats ts = ComputeTraceStats(run.trace.log, edges, cfg.top_n);
  return FormatPlan(syn.plan) + EmitReport(BuildReport(&cfg, &fixed.script, &res, &ts));
}

Outcome Determinism() {
  Outcome o;
  std::string first = testing::Insert30Report();
  std::string second = testing::Insert30Report();
  o.Require(first == second, "insert30 report differs between runs");
  std::string golden;
  try {
    golden = ReadFixture("pipeline/golden.report");
  } catch (const Error &) {
    o.Require(false, "golden report missing");
  }
  o.Require(first == golden, "insert30 report differs from golden file");
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    o.Require(RandomPipelineReport(seed) == RandomPipelineReport(seed),
              "random pipeline seed " + std::to_string(seed) + " differs");
  }
  if (o.pass) {
    o.detail = "golden report matched (" + Hex(Fnv1a64(golden)) +
               "), 5 random pipelines byte-identical";
  }
  return o;
}

Outcome TraceStatsParity() {
  Outcome o;
  TypeDb types = LoadTypeDb(ReadFixture("stats20/stats.types"));
  TraceLog log = ParseTrace(ReadFixture("stats20/stats.trace"));
  auto edges = ParseEdges(ReadFixture("stats20/stats.edges"));
  o.Require(log.records.size() == 20, "fixture is not 20 records");
  o.Require(AnalyzeDependencies(log, types) == edges, "analyzer disagrees with edge file");
  TraceStats ts = ComputeTraceStats(log, edges);
  o.Require(ts.type_count == 5, "type count " + std::to_string(ts.type_count));
  o.Require(ts.successive == 2, "successive " + std::to_string(ts.successive));
  o.Require(ts.max_children == 3, "max children " + std::to_string(ts.max_children));
  o.Require(ts.children_sum == 5 && ts.avg_children() == 2.5, "average children");
  if (o.pass) {
    o.detail = "types 5, successive 2, max 3, avg " + Fmt("%.2f", ts.avg_children());
  }
  return o;
}

struct Criterion {
  int id;
  const char *name;
  std::function<Outcome()> run;
};

int Main() {
  const std::vector<Criterion> criteria = {
      {1, "dependency oracle equivalence", OracleEquivalence},
      {2, "ground-truth recovery", GroundTruth},
      {3, "replay round trip", ReplayRoundTrip},
      {4, "insertion correctness", InsertionCorrectness},
      {5, "success-rate structure", SuccessRateStructure},
      {6, "fault localization", FaultLocalization},
      {7, "rectification", Rectification},
      {8, "planted-crash discovery", PlantedCrashes},
      {9, "mutation invariants", MutationInvariants},
      {10, "throughput relationship", ThroughputRelation},
      {11, "determinism", Determinism},
      {12, "trace-statistics parity", TraceStatsParity},
  };
  int failed = 0;
  for (const auto &c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s AC%02d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}

}  // namespace
}  // namespace tracesynth

int main() { return tracesynth::Main(); }
