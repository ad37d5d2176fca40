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

#ifndef TRACESYNTH_MANIFEST_H_
#define TRACESYNTH_MANIFEST_H_

// Pipeline manifest: one line per artifact a stage consumed or produced,
//   A|<role>|<path>|<fnv1a64 hex>
// A stage refuses an input whose recorded checksum no longer matches.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace tracesynth {

struct ManifestEntry {
  std::string role;
  uint64_t checksum = 0;

  bool operator==(const ManifestEntry &) const = default;
};

class Manifest {
 public:
  static Manifest Parse(std::string_view text);
  std::string Serialize() const;

  // Throws Error(kChecksumMismatch) if `path` is recorded with a different
  // checksum than `contents` has.
  void Verify(const std::string &path, std::string_view contents) const;
  void Record(const std::string &role, const std::string &path,
              std::string_view contents);

  const std::map<std::string, ManifestEntry> &entries() const { return entries_; }

 private:
  std::map<std::string, ManifestEntry> entries_;  // keyed by path
};

}  // namespace tracesynth

#endif  // TRACESYNTH_MANIFEST_H_
