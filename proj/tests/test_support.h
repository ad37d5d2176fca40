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


#ifndef TRACESYNTH_TESTS_TEST_SUPPORT_H_
#define TRACESYNTH_TESTS_TEST_SUPPORT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "tracesynth/dep_analysis.h"
#include "tracesynth/dep_dictionary.h"
#include "tracesynth/fuzz_campaign.h"
#include "tracesynth/script_ir.h"
#include "tracesynth/sim_kernel.h"
#include "tracesynth/synthesis.h"
#include "tracesynth/trace_model.h"
#include "tracesynth/type_db.h"

namespace tracesynth::testing {

std::string FixturePath(const std::string &relative);
std::string ReadFixture(const std::string &relative);

// Quadratic reverse scan straight over the records: for every input, walk
// earlier records newest first and stop at the first value equal to a
// positive return, an output pointer or the word behind it.
std::vector<DependencyEdge> BruteForceEdges(const TraceLog &log,
                                            const TypeDb &types);

// Per-level insertion counts enumerated from the trace, edges and dictionary
// alone (site x missing template), without building any script.
std::vector<std::size_t> EnumerateLevels(const TraceLog &log,
                                         const std::vector<DependencyEdge> &edges,
                                         const DependencyDictionary &dict,
                                         const TypeDb &types, int max_level);

// Every artifact of one in-process pipeline run on a workload fixture.
struct PipelineRun {
  TypeDb types;
  SimSpecSet specs;
  TraceLog log;
  std::vector<DependencyEdge> truth;
  std::vector<DependencyEdge> edges;
  DependencyDictionary dict;
  Script recovered;
  SynthesisResult synth;
  RectifyResult rectified;
};

// Trace, analyze, learn, recover, synthesize and rectify.
PipelineRun RunPipeline(const std::string &types_file,
                        const std::string &specs_file,
                        const std::string &workload_file, uint64_t seed,
                        int levels);

// The report the `fuzz` stage emits for the insert30 fixture.
std::string Insert30Report();

}  // namespace tracesynth::testing

#endif  // TRACESYNTH_TESTS_TEST_SUPPORT_H_
