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

#include <gtest/gtest.h>

#include "test_support.h"
#include "tracesynth/error.h"

namespace tracesynth {
namespace {

std::vector<DependencyEdge> Analyze(const std::string &types,
                                    const std::string &trace) {
  return AnalyzeDependencies(ParseTrace(trace), LoadTypeDb(types));
}

TEST(DepAnalysisTest, SingleContentEdge) {
  auto edges = Analyze(testing::ReadFixture("scenarios/content_handle.types"),
                       testing::ReadFixture("scenarios/content_handle.trace"));
  EXPECT_EQ(SerializeEdges(edges), "D|2:out2|4:0|ContentUse\n");
}

TEST(DepAnalysisTest, AddressThenContent) {
  auto edges = Analyze(testing::ReadFixture("scenarios/reuse_pair.types"),
                       testing::ReadFixture("scenarios/reuse_pair.trace"));
  EXPECT_EQ(SerializeEdges(edges),
            "D|1:out0|3:0|AddressReuse\n"
            "D|1:out0|4:0|ContentUse\n");
}

TEST(DepAnalysisTest, AddressLikeBoundary) {
  const std::string types = "S|p|1|0:OP\nS|c|1|0:IS\n";
  auto below = Analyze(types,
                       "C|1|p|0:OP:0x200000=[0:0x0]|out:0=[0:0xfffff]|ret:0x0\n"
                       "C|2|c|0:IS:0xfffff|-|ret:0x0\n");
  EXPECT_TRUE(below.empty());
  auto at = Analyze(types,
                    "C|1|p|0:OP:0x200000=[0:0x0]|out:0=[0:0x100000]|ret:0x0\n"
                    "C|2|c|0:IS:0x100000|-|ret:0x0\n");
  ASSERT_EQ(at.size(), 1u);
  EXPECT_EQ(at[0].mode, DepMode::kContentUse);
  EXPECT_FALSE(IsAddressLike(0xfffff));
  EXPECT_TRUE(IsAddressLike(0x100000));
}

TEST(DepAnalysisTest, HandlesMatchWithoutAddressLikeness) {
  auto edges = Analyze("S|mk|1|0:IS\nS|use|1|0:IH\n",
                       "C|1|mk|0:IS:0x0|-|ret:0x7\nC|2|use|0:IH:0x7|-|ret:0x0\n");
  ASSERT_EQ(edges.size(), 1u);
  EXPECT_TRUE(edges[0].producer_source.is_return);
  EXPECT_EQ(edges[0].mode, DepMode::kReturnUse);
}

TEST(DepAnalysisTest, NewestProducerWins) {
  const std::string types = "S|p|1|0:OP\nS|c|1|0:IH\n";
  auto edges = Analyze(types,
                       "C|1|p|0:OP:0x200000=[0:0x0]|out:0=[0:0x42]|ret:0x0\n"
                       "C|2|p|0:OP:0x200010=[0:0x0]|out:0=[0:0x42]|ret:0x0\n"
                       "C|3|c|0:IH:0x42|-|ret:0x0\n");
  ASSERT_EQ(edges.size(), 1u);
  EXPECT_EQ(edges[0].producer_seq, 2u);
}

TEST(DepAnalysisTest, AddressBeatsContentWithinEntry) {
  auto edges = Analyze("S|p|1|0:OP\nS|c|1|0:IP\n",
                       "C|1|p|0:OP:0x200000=[0:0x0]|out:0=[0:0x200000]|ret:0x0\n"
                       "C|2|c|0:IP:0x200000=[0:0x0]|-|ret:0x0\n");
  ASSERT_EQ(edges.size(), 1u);
  EXPECT_EQ(edges[0].mode, DepMode::kAddressReuse);
}

TEST(DepAnalysisTest, NonPositiveReturnsNotRecorded) {
  auto edges = Analyze("S|mk|1|0:IS\nS|use|1|0:IH\n",
                       "C|1|mk|0:IS:0x0|-|ret:-0x7\nC|2|use|0:IH:0xfffffffffffffff9|-|ret:0x0\n");
  EXPECT_TRUE(edges.empty());
}

TEST(DepAnalysisTest, OutputsOfSameCallNotSelfMatched) {
  auto edges = Analyze("S|f|2|0:IH;1:OP\n",
                       "C|1|f|0:IH:0x0;1:OP:0x200000=[0:0x0]|out:1=[0:0x5]|ret:0x0\n"
                       "C|2|f|0:IH:0x5;1:OP:0x200010=[0:0x0]|out:1=[0:0x5]|ret:0x0\n");
  ASSERT_EQ(edges.size(), 1u);
  EXPECT_EQ(edges[0].producer_seq, 1u);
}

TEST(DepAnalysisTest, MatchesBruteForceOnRandomTraces) {
  for (uint64_t seed = 1; seed <= 50; ++seed) {
    Universe u = MakeRandomUniverse(seed);
    GeneratedRun run = GenerateRandomTrace(u.types, u.specs, {80, 0.3, seed});
    EXPECT_EQ(AnalyzeDependencies(run.trace.log, u.types),
              testing::BruteForceEdges(run.trace.log, u.types))
        << "seed " << seed;
  }
}

TEST(DepAnalysisTest, EdgeDumpRoundTrips) {
  auto edges = Analyze(testing::ReadFixture("scenarios/reuse_pair.types"),
                       testing::ReadFixture("scenarios/reuse_pair.trace"));
  EXPECT_EQ(ParseEdges(SerializeEdges(edges)), edges);
  EXPECT_THROW(ParseEdges("D|1:out0|2:0|Sideways\n"), Error);
  EXPECT_THROW(ParseEdges("D|1:foo|2:0|ContentUse\n"), Error);
}

}  // namespace
}  // namespace tracesynth
