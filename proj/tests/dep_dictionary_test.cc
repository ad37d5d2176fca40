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

#include <gtest/gtest.h>

#include "test_support.h"
#include "tracesynth/error.h"

namespace tracesynth {
namespace {

struct ReusePair {
  TypeDb types = LoadTypeDb(testing::ReadFixture("scenarios/reuse_pair.types"));
  TraceLog log = ParseTrace(testing::ReadFixture("scenarios/reuse_pair.trace"));
  std::vector<DependencyEdge> edges = AnalyzeDependencies(log, types);
};

TEST(DepDictionaryTest, LearnsChildren) {
  ReusePair f;
  DependencyDictionary dict = LearnDictionary(f.log, f.edges);
  auto kids = QueryChildren(dict, "syscall1");
  ASSERT_EQ(kids.size(), 2u);
  EXPECT_EQ(kids[0].child_name, "syscall3");
  EXPECT_EQ(kids[0].mode, DepMode::kAddressReuse);
  EXPECT_EQ(kids[0].taught_by, 3u);
  EXPECT_EQ(kids[0].fixed_args.at(1).raw, 0x4u);
  EXPECT_EQ(kids[1].child_name, "syscall4");
  EXPECT_EQ(kids[1].mode, DepMode::kContentUse);
  EXPECT_EQ(kids[1].fixed_args.size(), 3u);
  EXPECT_TRUE(QueryChildren(dict, "syscall2").empty());
}

TEST(DepDictionaryTest, FailedConsumersDoNotTeach) {
  ReusePair f;
  f.log.records[3].ret = -0x5;
  DependencyDictionary dict = LearnDictionary(f.log, f.edges);
  EXPECT_EQ(dict.TemplateCount(), 1u);
}

TEST(DepDictionaryTest, ZeroStatusOptional) {
  ReusePair f;
  EXPECT_TRUE(LearnDictionary(f.log, f.edges, {false}).empty());
  f.log.records[2].ret = 0x1;
  EXPECT_EQ(LearnDictionary(f.log, f.edges, {false}).TemplateCount(), 1u);
}

TEST(DepDictionaryTest, EarliestOccurrenceTeachesAndDuplicatesCollapse) {
  TypeDb types = LoadTypeDb(testing::ReadFixture("stats20/stats.types"));
  TraceLog log = ParseTrace(testing::ReadFixture("stats20/stats.trace"));
  auto edges = AnalyzeDependencies(log, types);
  DependencyDictionary dict = LearnDictionary(log, edges);
  auto kids = QueryChildren(dict, "Ka");
  // Later occurrences of the same (child, slot, mode) do not add templates.
  ASSERT_EQ(kids.size(), 3u);
  EXPECT_EQ(kids[0].taught_by, 2u);
  EXPECT_EQ(kids[1].taught_by, 3u);
  EXPECT_EQ(kids[2].taught_by, 4u);
  auto kb = QueryChildren(dict, "Kb");
  ASSERT_EQ(kb.size(), 2u);
  EXPECT_EQ(kb[0].child_name, "Kc");
  EXPECT_EQ(kb[1].child_name, "Kd");
}

TEST(DepDictionaryTest, BoundSlotsAreMarked) {
  TypeDb types = LoadTypeDb(testing::ReadFixture("display/dx.types"));
  SimSpecSet specs = LoadSimSpecs(testing::ReadFixture("display/dx.specs"));
  GeneratedTrace gen = GenerateTrace(
      types, specs, ParseWorkload(testing::ReadFixture("display/dx.workload")), 1);
  DependencyDictionary dict = LearnDictionary(gen.log, gen.truth);
  auto kids = QueryChildren(dict, "DxOutput");
  ASSERT_EQ(kids.size(), 2u);
  EXPECT_TRUE(kids[0].fixed_args.at(1).bound);
  EXPECT_FALSE(kids[0].fixed_args.at(2).bound);
}

TEST(DepDictionaryTest, DumpRoundTrips) {
  ReusePair f;
  DependencyDictionary dict = LearnDictionary(f.log, f.edges);
  std::string text = SerializeDictionary(dict);
  EXPECT_EQ(ParseDictionary(text), dict);
  EXPECT_EQ(SerializeDictionary(ParseDictionary(text)), text);
  EXPECT_THROW(ParseDictionary("F|1=0x1\n"), Error);
  EXPECT_THROW(ParseDictionary("K|a|b|x|ContentUse|out0|1|0x0\n"), Error);
}

TEST(DepDictionaryTest, EdgesOutsideTraceRejected) {
  ReusePair f;
  std::vector<DependencyEdge> bad = {
      {9, ProducerSource::Output(0), 3, 0, DepMode::kContentUse}};
  EXPECT_THROW(LearnDictionary(f.log, bad), Error);
}

}  // namespace
}  // namespace tracesynth
