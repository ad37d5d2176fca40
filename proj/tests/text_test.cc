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


#include "tracesynth/text.h"

#include <gtest/gtest.h>

namespace tracesynth {
namespace {

TEST(HexTest, FormatsWithoutPadding) {
  EXPECT_EQ(Hex(0), "0x0");
  EXPECT_EQ(Hex(0x694), "0x694");
  EXPECT_EQ(Hex(UINT64_MAX), "0xffffffffffffffff");
  EXPECT_EQ(SignedHex(-0x57), "-0x57");
  EXPECT_EQ(SignedHex(INT64_MIN), "-0x8000000000000000");
}

TEST(HexTest, ParsesAndRejects) {
  EXPECT_EQ(ParseHex("0xD75543"), 0xd75543u);
  EXPECT_EQ(ParseHex("0Xff"), 0xffu);
  EXPECT_EQ(ParseHex("0xffffffffffffffff"), UINT64_MAX);
  EXPECT_FALSE(ParseHex("0x"));
  EXPECT_FALSE(ParseHex("12"));
  EXPECT_FALSE(ParseHex("0x1g"));
  EXPECT_FALSE(ParseHex("0x10000000000000000"));
  EXPECT_EQ(ParseSignedHex("-0x8"), -8);
  EXPECT_EQ(ParseSignedHex("0x7fffffffffffffff"), INT64_MAX);
  EXPECT_EQ(ParseSignedHex("-0x8000000000000000"), INT64_MIN);
  EXPECT_FALSE(ParseSignedHex("0x8000000000000000"));
  EXPECT_EQ(ParseDecimal("42"), 42u);
  EXPECT_FALSE(ParseDecimal("4a"));
  EXPECT_FALSE(ParseDecimal(""));
}

TEST(HexTest, RoundTripsEveryBitPosition) {
  for (int b = 0; b < 64; ++b) {
    uint64_t v = uint64_t{1} << b;
    EXPECT_EQ(ParseHex(Hex(v)), v);
    EXPECT_EQ(ParseHex(Hex(v - 1)), v - 1);
  }
}

TEST(SplitTest, PlainAndTopLevel) {
  EXPECT_EQ(Split("", '|').size(), 1u);
  EXPECT_EQ(Split("a||b", '|').size(), 3u);
  auto top = SplitTopLevel("0:IP:0x1=[0:0x1,8:0x2],1:IS:0x0", ',');
  ASSERT_EQ(top.size(), 2u);
  EXPECT_EQ(top[0], "0:IP:0x1=[0:0x1,8:0x2]");
  EXPECT_EQ(Trim("  x \t"), "x");
}

TEST(LinesTest, HandlesCrlfAndFinalNewline) {
  auto lines = Lines("a\r\nb\n");
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0], "a");
  EXPECT_EQ(lines[1], "b");
  EXPECT_EQ(Lines("a\n\nb").size(), 3u);
}

TEST(Fnv1aTest, KnownVectors) {
  EXPECT_EQ(Fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(Fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(Fnv1a64("foobar"), 0x85944171f73967e8ull);
}

}  // namespace
}  // namespace tracesynth
