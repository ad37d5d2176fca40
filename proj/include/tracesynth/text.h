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

#ifndef TRACESYNTH_TEXT_H_
#define TRACESYNTH_TEXT_H_

// Small helpers shared by the line-oriented file formats.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tracesynth {

// "0x" followed by lowercase hex digits, no padding.
std::string Hex(uint64_t value);
// Like Hex() but with a leading '-' for negative values: -0x57.
std::string SignedHex(int64_t value);

// Accepts "0x"/"0X" prefixed hex in either case. Returns nullopt on any
// stray character or overflow.
std::optional<uint64_t> ParseHex(std::string_view text);
std::optional<int64_t> ParseSignedHex(std::string_view text);
std::optional<uint64_t> ParseDecimal(std::string_view text);

// Plain split; an empty input yields one empty field.
std::vector<std::string_view> Split(std::string_view text, char sep);
// Split that ignores separators nested inside [...].
std::vector<std::string_view> SplitTopLevel(std::string_view text, char sep);

std::string_view Trim(std::string_view text);

// Splits into lines on '\n', dropping a trailing '\r' from each. A final
// newline does not produce an extra empty line.
std::vector<std::string_view> Lines(std::string_view text);

// 64-bit FNV-1a, used for manifest checksums.
uint64_t Fnv1a64(std::string_view bytes);

std::string ReadFile(const std::string &path);
void WriteFile(const std::string &path, std::string_view contents);

}  // namespace tracesynth

#endif  // TRACESYNTH_TEXT_H_
