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


#include "tracesynth/manifest.h"

#include <gtest/gtest.h>

#include "tracesynth/error.h"
#include "tracesynth/text.h"

namespace tracesynth {
namespace {

TEST(ManifestTest, RecordVerifyAndRoundTrip) {
  Manifest m;
  m.Record("trace", "t.log", "abc");
  m.Record("edges", "e.dep", "");
  EXPECT_NO_THROW(m.Verify("t.log", "abc"));
  EXPECT_NO_THROW(m.Verify("other", "anything"));
  try {
    m.Verify("t.log", "abd");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kChecksumMismatch);
  }
  Manifest back = Manifest::Parse(m.Serialize());
  EXPECT_EQ(back.entries(), m.entries());
  EXPECT_EQ(back.entries().at("e.dep").checksum, Fnv1a64(""));
  m.Record("trace", "t.log", "abd");
  EXPECT_NO_THROW(m.Verify("t.log", "abd"));
}

TEST(ManifestTest, RejectsMalformedLines) {
  EXPECT_THROW(Manifest::Parse("A|trace|t.log\n"), Error);
  EXPECT_THROW(Manifest::Parse("A|trace|t.log|zz\n"), Error);
  EXPECT_NO_THROW(Manifest::Parse("# comment\n\n"));
}

}  // namespace
}  // namespace tracesynth
