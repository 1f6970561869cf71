// Copyright (c) 2026 The dsv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DSV_CORPUS_MANIFEST_H_
#define DSV_CORPUS_MANIFEST_H_

#include <string>
#include <vector>

namespace dsv::corpus {

inline constexpr int kNumDigits = 10;

// One spoken digit: a segment [start_s, end_s) of an audio file.
struct ManifestEntry {
  std::string utt_id;
  std::string speaker_id;
  int digit = 0;
  int session = 0;
  std::string path;  // relative paths resolve against the manifest's directory
  double start_s = 0.0;
  double end_s = 0.0;
  bool operator==(const ManifestEntry&) const = default;
};

// JSON-lines, one object per row with exactly the ManifestEntry fields.
// Blank lines are skipped. Errors name the offending line.
std::vector<ManifestEntry> ParseManifest(const std::string& text, const std::string& name);
std::vector<ManifestEntry> ReadManifest(const std::string& path);

std::string SerializeManifest(const std::vector<ManifestEntry>& entries);
void WriteManifest(const std::string& path, const std::vector<ManifestEntry>& entries);

// Directory containing `manifest_path`, for resolving entry paths.
std::string ManifestBaseDir(const std::string& manifest_path);
std::string ResolvePath(const std::string& base_dir, const std::string& path);

// Splits [start_s, end_s) into `n` equal digit segments (fallback when no
// alignment is available).
std::vector<std::pair<double, double>> UniformSplit(double start_s, double end_s, int n);

}  // namespace dsv::corpus

#endif  // DSV_CORPUS_MANIFEST_H_
