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

// tracesynth: command-line driver for the trace -> script -> fuzz pipeline.
// Every subcommand reads and writes plain files, so stages can be rerun in
// isolation. Exit status: 0 ok, 1 domain error, 2 usage error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tracesynth/dep_analysis.h"
#include "tracesynth/dep_dictionary.h"
#include "tracesynth/error.h"
#include "tracesynth/fuzz_campaign.h"
#include "tracesynth/manifest.h"
#include "tracesynth/script_ir.h"
#include "tracesynth/sim_kernel.h"
#include "tracesynth/synthesis.h"
#include "tracesynth/text.h"
#include "tracesynth/trace_model.h"
#include "tracesynth/type_db.h"

namespace tracesynth {
namespace {

constexpr const char *kFormats = R"(File formats:
  trace     C|<seq>|<name>|<slot>:<D><K>:0x<raw>[=[<off>:0x<v>,...]];...|out:<slot>[=[...]],...|ret:<0x..>
  types     S|<name>|<argc>|<slot>:<DK>[:<struct>];...   T|<id>|<off>:<K>[:<struct>];...;size=<bytes>
  edges     D|<producer seq>:<ret|out<slot>>|<consumer seq>:<slot>|<AddressReuse|ContentUse|ReturnUse>
  dict      K|<producer>|<child>|<slot>|<mode>|<source>|<taught_by>|<ret>  F|<slot>=0x<v>[=[...]][|bound]
  script    SCRIPT v1, then STRUCT / ALLOC / SETW / CALL / BINDRET lines
  specs     Y|<name>|req:<slot>=<H|A|C|->;...|eff:<slot>=<handle|write:<n>>;...|ret:<0x..|handle>|minout:<slot>=<n>
            B|<name>|<slot>[@<off>]<==|!=|<|>>0x<v>[&...]|<kind>
  workload  W|<name>|<slot>=<0x..|null|new[/<n>][[...]]|@<k>.ret|@<k>.out<s>[*]>;...
  config    key = value (iterations, step_budget, seed, mutation.rate, ...)
)";

struct Common {
  uint64_t seed = 1;
  std::string out;
  bool quiet = false;
  std::string manifest;
};

class Stage {
 public:
  explicit Stage(const Common &common) : common_(common) {
    if (!common_.manifest.empty()) {
      std::ifstream probe(common_.manifest);
      if (probe) manifest_ = Manifest::Parse(ReadFile(common_.manifest));
    }
  }

  std::string Read(const std::string &role, const std::string &path) {
    std::string text = ReadFile(path);
    manifest_.Verify(path, text);
    manifest_.Record(role, path, text);
    return text;
  }

  // Writes to --out, or stdout when no path is given.
  void Emit(const std::string &role, const std::string &text) {
    if (common_.out.empty()) {
      std::cout << text;
      return;
    }
    WriteFile(common_.out, text);
    manifest_.Record(role, common_.out, text);
  }

  void WriteTo(const std::string &role, const std::string &path,
               const std::string &text) {
    WriteFile(path, text);
    manifest_.Record(role, path, text);
  }

  // Informational output; goes to stderr when the primary output is stdout.
  void Note(const std::string &text) const {
    if (common_.quiet) return;
    (common_.out.empty() ? std::cerr : std::cout) << text;
  }

  void Finish() const {
    if (!common_.manifest.empty()) WriteFile(common_.manifest, manifest_.Serialize());
  }

 private:
  const Common &common_;
  Manifest manifest_;
};

TypeDb ReadTypes(Stage &st, const std::string &path) {
  TypeDb types = LoadTypeDb(st.Read("types", path));
  types.Resolve();
  return types;
}

TraceLog ReadTrace(Stage &st, const std::string &path, const TypeDb *types) {
  TraceLog log = ParseTrace(st.Read("trace", path));
  if (types) {
    auto violations = ValidateTrace(log, *types);
    if (!violations.empty()) {
      const Violation &v = violations.front();
      throw Error(ErrorCode::kMalformedLine,
                  "record " + std::to_string(v.seq) + " slot " + std::to_string(v.slot) +
                      ": " + std::string(ViolationKindName(v.kind)) + " (" + v.reason +
                      ")",
                  v.seq);
    }
  }
  return log;
}

SimSpecSet ReadSpecs(Stage &st, const std::string &path, const TypeDb &types) {
  SimSpecSet specs = LoadSimSpecs(st.Read("specs", path));
  specs.CheckAgainst(types);
  return specs;
}

std::map<std::string, FaultKind> ParseFaults(const std::vector<std::string> &items) {
  std::map<std::string, FaultKind> faults;
  for (const auto &item : items) {
    auto eq = item.find('=');
    std::string kind = eq == std::string::npos ? "" : item.substr(eq + 1);
    if (kind != "BadInput" && kind != "Hang") {
      throw CLI::ValidationError("--fault", "expected <call_id>=<BadInput|Hang>");
    }
    faults[item.substr(0, eq)] = kind == "Hang" ? FaultKind::kHang : FaultKind::kBadInput;
  }
  return faults;
}

int Run(int argc, char **argv) {
  CLI::App app{"Trace-driven syscall sequence synthesis and fuzzing toolkit",
               "tracesynth"};
  app.footer(kFormats);
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--seed", common.seed, "RNG seed")->capture_default_str();
  app.add_option("--out", common.out, "Output path (default: stdout)");
  app.add_flag("--quiet", common.quiet, "Suppress informational output");
  app.add_option("--manifest", common.manifest,
                 "Pipeline manifest recording artifact checksums");

  std::function<void()> action;

  // gen-trace
  auto *gen = app.add_subcommand("gen-trace", "Run a call plan on the simulated kernel");
  std::string gen_types, gen_specs, gen_workload, gen_truth, gen_plan_out;
  std::size_t gen_random = 0;
  double gen_collisions = 0.0;
  gen->add_option("--types", gen_types, "Type DB")->required()->check(CLI::ExistingFile);
  gen->add_option("--specs", gen_specs, "Sim spec file")->required()->check(CLI::ExistingFile);
  auto *wl = gen->add_option("--workload", gen_workload, "Call plan")->check(CLI::ExistingFile);
  auto *rnd = gen->add_option("--random", gen_random, "Random plan of this many calls");
  wl->excludes(rnd);
  gen->add_option("--collisions", gen_collisions, "Colliding-literal rate for --random")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--truth", gen_truth, "Write the realized dependencies here");
  gen->add_option("--plan-out", gen_plan_out, "Write the random plan here");
  gen->callback([&] {
    action = [&] {
      if (gen_workload.empty() && gen_random == 0) {
        throw CLI::RequiredError("--workload or --random");
      }
      Stage st(common);
      TypeDb types = ReadTypes(st, gen_types);
      SimSpecSet specs = ReadSpecs(st, gen_specs, types);
      GeneratedTrace trace;
      if (!gen_workload.empty()) {
        trace = GenerateTrace(types, specs, ParseWorkload(st.Read("workload", gen_workload)),
                              common.seed);
      } else {
        GeneratedRun run = GenerateRandomTrace(
            types, specs, {gen_random, gen_collisions, common.seed});
        if (!gen_plan_out.empty()) {
          st.WriteTo("workload", gen_plan_out, SerializeWorkload(run.workload));
        }
        trace = std::move(run.trace);
      }
      st.Emit("trace", SerializeTrace(trace.log));
      if (!gen_truth.empty()) st.WriteTo("edges", gen_truth, SerializeEdges(trace.truth));
      st.Note("generated " + std::to_string(trace.log.records.size()) + " records, " +
              std::to_string(trace.truth.size()) + " dependencies\n");
      st.Finish();
    };
  });

  // analyze
  auto *analyze = app.add_subcommand("analyze", "Infer dependency edges from a trace");
  std::string an_trace, an_types;
  analyze->add_option("--trace", an_trace, "Trace")->required()->check(CLI::ExistingFile);
  analyze->add_option("--types", an_types, "Type DB")->required()->check(CLI::ExistingFile);
  analyze->callback([&] {
    action = [&] {
      Stage st(common);
      TypeDb types = ReadTypes(st, an_types);
      TraceLog log = ReadTrace(st, an_trace, &types);
      auto edges = AnalyzeDependencies(log, types);
      st.Emit("edges", SerializeEdges(edges));
      st.Note("edges: " + std::to_string(edges.size()) + "\n");
      st.Finish();
    };
  });

  // learn-dict
  auto *learn = app.add_subcommand("learn-dict", "Learn the dependency dictionary");
  std::string ld_trace, ld_edges;
  bool ld_strict = false;
  learn->add_option("--trace", ld_trace, "Trace")->required()->check(CLI::ExistingFile);
  learn->add_option("--edges", ld_edges, "Edge dump")->required()->check(CLI::ExistingFile);
  learn->add_flag("--positive-only", ld_strict, "Do not count status 0 as success");
  learn->callback([&] {
    action = [&] {
      Stage st(common);
      TraceLog log = ReadTrace(st, ld_trace, nullptr);
      auto edges = ParseEdges(st.Read("edges", ld_edges));
      DependencyDictionary dict = LearnDictionary(log, edges, {!ld_strict});
      st.Emit("dict", SerializeDictionary(dict));
      st.Note("templates: " + std::to_string(dict.TemplateCount()) + "\n");
      st.Finish();
    };
  });

  // recover
  auto *recover = app.add_subcommand("recover", "Recover the model script of a trace");
  std::string rc_trace, rc_edges, rc_types;
  recover->add_option("--trace", rc_trace, "Trace")->required()->check(CLI::ExistingFile);
  recover->add_option("--edges", rc_edges, "Edge dump")->required()->check(CLI::ExistingFile);
  recover->add_option("--types", rc_types, "Type DB")->required()->check(CLI::ExistingFile);
  recover->callback([&] {
    action = [&] {
      Stage st(common);
      TypeDb types = ReadTypes(st, rc_types);
      TraceLog log = ReadTrace(st, rc_trace, &types);
      auto edges = ParseEdges(st.Read("edges", rc_edges));
      Script script = RecoverModelScript(log, edges, types);
      st.Emit("script", EmitScriptText(script));
      st.Finish();
    };
  });

  // synthesize
  auto *synth = app.add_subcommand("synthesize", "Insert dependent calls up to level n");
  std::string sy_script, sy_dict, sy_edges, sy_types;
  int sy_levels = 3;
  synth->add_option("--script", sy_script, "Recovered script")->required()->check(CLI::ExistingFile);
  synth->add_option("--dict", sy_dict, "Dictionary")->required()->check(CLI::ExistingFile);
  synth->add_option("--edges", sy_edges, "Edge dump")->required()->check(CLI::ExistingFile);
  synth->add_option("--types", sy_types, "Type DB")->required()->check(CLI::ExistingFile);
  synth->add_option("--levels", sy_levels, "Insertion levels")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth->callback([&] {
    action = [&] {
      Stage st(common);
      TypeDb types = ReadTypes(st, sy_types);
      Script script = LoadScript(st.Read("script", sy_script));
      DependencyDictionary dict = ParseDictionary(st.Read("dict", sy_dict));
      auto edges = ParseEdges(st.Read("edges", sy_edges));
      SynthesisResult r = Synthesize(script, dict, edges, types, sy_levels);
      st.Emit("script", EmitScriptText(r.script));
      st.Note(FormatPlan(r.plan));
      st.Finish();
    };
  });

  // localize
  auto *localize = app.add_subcommand("localize", "Find and rectify fatal calls");
  std::string lo_script, lo_types, lo_specs;
  std::vector<std::string> lo_faults;
  uint64_t lo_budget = 0;
  bool lo_no_fix = false;
  localize->add_option("--script", lo_script, "Script")->required()->check(CLI::ExistingFile);
  localize->add_option("--types", lo_types, "Type DB")->required()->check(CLI::ExistingFile);
  localize->add_option("--specs", lo_specs, "Sim spec file")->required()->check(CLI::ExistingFile);
  localize->add_option("--fault", lo_faults, "Inject <call_id>=<BadInput|Hang>");
  localize->add_option("--step-budget", lo_budget, "Virtual step budget (0: none)");
  localize->add_flag("--no-rectify", lo_no_fix, "Only report the first fatal call");
  localize->callback([&] {
    action = [&] {
      Stage st(common);
      TypeDb types = ReadTypes(st, lo_types);
      SimSpecSet specs = ReadSpecs(st, lo_specs, types);
      Script script = LoadScript(st.Read("script", lo_script));
      ExecOptions opts;
      opts.step_budget = lo_budget;
      opts.faults = ParseFaults(lo_faults);
      Executor exec = SimExecutor(specs, types, opts);
      if (lo_no_fix) {
        auto loc = LocalizeFaultyCall(script, exec);
        std::string line = loc ? "FATAL|" + loc->call_id + "|" +
                                     std::string(FailureKindName(loc->kind)) + "|" +
                                     std::to_string(loc->executions) + "\n"
                               : "FATAL|-\n";
        st.Emit("localization", line);
        st.Finish();
        return;
      }
      RectifyResult r = RectifyLoop(script, exec);
      for (const auto &a : r.actions) {
        st.Note("RECTIFY|" + a.call_id + "|" + std::string(FailureKindName(a.kind)) + "|" +
                a.action + "\n");
      }
      st.Note("RECTIFY|rounds=" + std::to_string(r.rounds) +
              "|executions=" + std::to_string(r.executions) +
              "|completed=" + (r.completed ? "yes" : "no") + "\n");
      if (!r.completed) {
        throw Error(ErrorCode::kNeverHealthy, "script still fails after rectification");
      }
      st.Emit("script", EmitScriptText(r.script));
      st.Finish();
    };
  });

  // fuzz
  auto *fuzz = app.add_subcommand("fuzz", "Run a mutation campaign and report");
  std::string fz_script, fz_types, fz_specs, fz_config, fz_trace, fz_edges;
  fuzz->add_option("--script", fz_script, "Healthy script")->required()->check(CLI::ExistingFile);
  fuzz->add_option("--types", fz_types, "Type DB")->required()->check(CLI::ExistingFile);
  fuzz->add_option("--specs", fz_specs, "Sim spec file")->required()->check(CLI::ExistingFile);
  fuzz->add_option("--config", fz_config, "Campaign config")->check(CLI::ExistingFile);
  fuzz->add_option("--trace", fz_trace, "Trace for statistics")->check(CLI::ExistingFile);
  auto *fz_e = fuzz->add_option("--edges", fz_edges, "Edges for statistics")
                   ->check(CLI::ExistingFile);
  fz_e->needs(fuzz->get_option("--trace"));
  fuzz->callback([&] {
    action = [&] {
      Stage st(common);
      TypeDb types = ReadTypes(st, fz_types);
      SimSpecSet specs = ReadSpecs(st, fz_specs, types);
      Script script = LoadScript(st.Read("script", fz_script));
      CampaignConfig cfg;
      cfg.mutation.seed = common.seed;
      if (!fz_config.empty()) cfg = ParseCampaignConfig(st.Read("config", fz_config));
      CampaignResult result = RunCampaign(specs, types, script, cfg);
      std::optional<TraceStats> ts;
      if (!fz_trace.empty()) {
        TraceLog log = ReadTrace(st, fz_trace, &types);
        auto edges = fz_edges.empty() ? AnalyzeDependencies(log, types)
                                      : ParseEdges(st.Read("edges", fz_edges));
        ts = ComputeTraceStats(log, edges, cfg.top_n);
      }
      st.Emit("report",
              EmitReport(BuildReport(&cfg, &script, &result, ts ? &*ts : nullptr)));
      st.Finish();
    };
  });

  // stats
  auto *stats = app.add_subcommand("stats", "Trace statistics");
  std::string stt_trace, stt_edges, stt_types;
  std::size_t stt_top = 10;
  stats->add_option("--trace", stt_trace, "Trace")->required()->check(CLI::ExistingFile);
  stats->add_option("--edges", stt_edges, "Edge dump")->check(CLI::ExistingFile);
  stats->add_option("--types", stt_types, "Type DB (to analyze when --edges is absent)")
      ->check(CLI::ExistingFile);
  stats->add_option("--top", stt_top, "Frequency table size")->capture_default_str();
  stats->callback([&] {
    action = [&] {
      if (stt_edges.empty() && stt_types.empty()) {
        throw CLI::RequiredError("--edges or --types");
      }
      Stage st(common);
      std::vector<DependencyEdge> edges;
      TraceLog log;
      if (!stt_edges.empty()) {
        log = ReadTrace(st, stt_trace, nullptr);
        edges = ParseEdges(st.Read("edges", stt_edges));
      } else {
        TypeDb types = ReadTypes(st, stt_types);
        log = ReadTrace(st, stt_trace, &types);
        edges = AnalyzeDependencies(log, types);
      }
      TraceStats ts = ComputeTraceStats(log, edges, stt_top);
      st.Emit("report", EmitReport(BuildReport(nullptr, nullptr, nullptr, &ts)));
      st.Finish();
    };
  });

  try {
    app.parse(argc, argv);
    action();
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    std::cerr << kFormats;
    return 2;
  } catch (const Error &e) {
    std::cerr << "tracesynth: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace
}  // namespace tracesynth

int main(int argc, char **argv) {
  try {
    return tracesynth::Run(argc, argv);
  } catch (const std::exception &e) {
    std::cerr << "tracesynth: " << e.what() << "\n";
    return 1;
  }
}
