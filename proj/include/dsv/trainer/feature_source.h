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

#ifndef DSV_TRAINER_FEATURE_SOURCE_H_
#define DSV_TRAINER_FEATURE_SOURCE_H_

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dsv/corpus/manifest.h"
#include "dsv/dsp/features.h"

namespace dsv::trainer {

// Produces the normalized 64 x 96 network input for a manifest row.
// Implementations are safe to call concurrently.
class FeatureSource {
 public:
  virtual ~FeatureSource() = default;
  virtual dsp::FeatureMatrix Get(const corpus::ManifestEntry& entry) const = 0;
};

// Reads the entry's audio segment and runs the log-mel front end.
class AudioFeatureSource : public FeatureSource {
 public:
  AudioFeatureSource(std::string base_dir, dsp::LogMelOptions opts = {}, bool use_vad = false)
      : base_dir_(std::move(base_dir)), opts_(opts), use_vad_(use_vad) {}
  dsp::FeatureMatrix Get(const corpus::ManifestEntry& entry) const override;

 private:
  std::string base_dir_;
  dsp::LogMelOptions opts_;
  bool use_vad_;
};

// Reads <dir>/<utt_id>.vdft written by the `features` command.
class CachedFeatureSource : public FeatureSource {
 public:
  explicit CachedFeatureSource(std::string dir) : dir_(std::move(dir)) {}
  dsp::FeatureMatrix Get(const corpus::ManifestEntry& entry) const override;
  static std::string PathFor(const std::string& dir, const std::string& utt_id);

 private:
  std::string dir_;
};

// Features for every entry, in manifest order.
std::vector<dsp::FeatureMatrix> LoadFeatures(std::span<const corpus::ManifestEntry> entries,
                                             const FeatureSource& source, int workers = 1);

// FNV-1a digest over the raw bytes of a feature set; used to check that two
// runs saw identical inputs.
std::string FeatureDigest(std::span<const dsp::FeatureMatrix> features);

}  // namespace dsv::trainer

#endif  // DSV_TRAINER_FEATURE_SOURCE_H_
