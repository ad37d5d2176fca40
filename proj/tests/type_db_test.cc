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


#include "tracesynth/type_db.h"

#include <gtest/gtest.h>

#include "test_support.h"
#include "tracesynth/error.h"

namespace tracesynth {
namespace {

ErrorCode CodeOf(const std::string &text) {
  try {
    LoadTypeDb(text);
  } catch (const Error &e) {
    return e.code();
  }
  ADD_FAILURE() << "no error for: " << text;
  return ErrorCode::kIo;
}

TEST(TypeDbTest, LoadsSignaturesAndStructs) {
  TypeDb db = LoadTypeDb(testing::ReadFixture("insert30/universe.types"));
  const Signature &sig = LookupSignature(db, "QueryObj");
  ASSERT_EQ(sig.size(), 2u);
  EXPECT_EQ(sig[0].kind, ArgKind::kHandle);
  EXPECT_EQ(sig[1].direction, Direction::kOut);
  EXPECT_EQ(sig[1].pointee, "info");
  EXPECT_EQ(db.FindStruct("info")->size, 16u);
  EXPECT_EQ(StagingSize(db, sig[1]), 16u);
  EXPECT_EQ(StagingSize(db, LookupSignature(db, "OpenObj")[1]), kWordBytes);
}

TEST(TypeDbTest, SerializeRoundTrips) {
  for (const char *f : {"insert30/universe.types", "display/dx.types",
                        "scenarios/content_handle.types", "rectify/rect.types"}) {
    TypeDb db = LoadTypeDb(testing::ReadFixture(f));
    EXPECT_EQ(LoadTypeDb(SerializeTypeDb(db)), db) << f;
  }
}

TEST(TypeDbTest, SizeDefaultsToLastOffsetPlusWord) {
  TypeDb db = LoadTypeDb("T|a|0:S;16:S\nS|f|1|0:IP:a\n");
  EXPECT_EQ(db.FindStruct("a")->size, 24u);
}

TEST(TypeDbTest, FlattenKeepsNestedLayoutsSeparate) {
  TypeDb db = LoadTypeDb(
      "T|leaf|0:S;8:S;size=16\n"
      "T|mid|0:P:leaf;8:H;size=16\n"
      "T|top|0:S;8:P:mid;16:P:leaf;size=24\n");
  auto flat = FlattenStruct(db, "top");
  ASSERT_EQ(flat.size(), 3u);
  EXPECT_EQ(flat[1].offset, 8u);
  EXPECT_EQ(flat[1].nested_id, "mid");
  ASSERT_EQ(flat[1].nested.size(), 2u);
  EXPECT_EQ(flat[1].nested[0].nested.size(), 2u);
  EXPECT_EQ(CountFields(flat), 3u + 2u + 2u + 2u);
}

TEST(TypeDbTest, Errors) {
  EXPECT_EQ(CodeOf("T|a|0:P:b;size=8\nT|b|0:P:a;size=8\n"), ErrorCode::kCyclicStruct);
  EXPECT_EQ(CodeOf("T|a|0:P:a;size=8\n"), ErrorCode::kCyclicStruct);
  EXPECT_EQ(CodeOf("S|f|1|0:IP:nope\n"), ErrorCode::kUnresolvedStruct);
  EXPECT_EQ(CodeOf("S|f|1|0:IS\nS|f|1|0:IS\n"), ErrorCode::kDuplicateSignature);
  EXPECT_EQ(CodeOf("S|f|2|0:IS\n"), ErrorCode::kMalformedLine);
  EXPECT_EQ(CodeOf("S|f|1|0:XS\n"), ErrorCode::kMalformedLine);
  EXPECT_EQ(CodeOf("Q|f\n"), ErrorCode::kMalformedLine);
  TypeDb db;
  EXPECT_THROW(LookupSignature(db, "missing"), Error);
}

}  // namespace
}  // namespace tracesynth
