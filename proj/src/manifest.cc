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

#include "tracesynth/error.h"
#include "tracesynth/text.h"

namespace tracesynth {

Manifest Manifest::Parse(std::string_view text) {
  Manifest m;
  std::size_t line_no = 0;
  for (auto raw : Lines(text)) {
    ++line_no;
    std::string_view line = Trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto f = Split(line, '|');
    std::optional<uint64_t> sum;
    if (f.size() == 4) sum = ParseHex(f[3]);
    if (f.size() != 4 || f[0] != "A" || f[2].empty() || !sum) {
      throw Error(ErrorCode::kMalformedLine, "expected A|<role>|<path>|0x<sum>", line_no);
    }
    m.entries_[std::string(f[2])] = {std::string(f[1]), *sum};
  }
  return m;
}

std::string Manifest::Serialize() const {
  std::string out;
  for (const auto &[path, e] : entries_) {
    out += "A|" + e.role + "|" + path + "|" + Hex(e.checksum) + "\n";
  }
  return out;
}

void Manifest::Verify(const std::string &path, std::string_view contents) const {
  auto it = entries_.find(path);
  if (it == entries_.end()) return;
  uint64_t got = Fnv1a64(contents);
  if (got != it->second.checksum) {
    throw Error(ErrorCode::kChecksumMismatch,
                path + " changed since it was recorded (" + Hex(it->second.checksum) +
                    " != " + Hex(got) + ")");
  }
}

void Manifest::Record(const std::string &role, const std::string &path,
                      std::string_view contents) {
  entries_[path] = {role, Fnv1a64(contents)};
}

}  // namespace tracesynth
