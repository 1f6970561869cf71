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

#include "dsv/trainer/feature_source.h"

#include <cstdio>
#include <cstring>
#include <filesystem>

#include "dsv/common/error.h"
#include "dsv/common/parallel.h"
#include "dsv/dsp/vad.h"

namespace dsv::trainer {

dsp::FeatureMatrix AudioFeatureSource::Get(const corpus::ManifestEntry& entry) const {
  const std::string path = corpus::ResolvePath(base_dir_, entry.path);
  if (!std::filesystem::exists(path)) {
    throw InvalidInput("utterance '" + entry.utt_id + "': missing audio " + path);
  }
  dsp::AudioBuffer audio = dsp::Slice(dsp::ReadWav(path), entry.start_s, entry.end_s);
  if (use_vad_ && !audio.samples.empty()) {
    auto segs = dsp::EnergyVad(audio);
    if (!segs.empty()) {
      dsp::AudioBuffer trimmed = dsp::Slice(audio, segs.front().start_s, segs.back().end_s);
      const auto g = dsp::ComputeFrameGeometry(audio.sample_rate, opts_);
      if (static_cast<long>(trimmed.samples.size()) >= g.win_samples) audio = std::move(trimmed);
    }
  }
  try {
    return dsp::NetworkInput(audio, opts_);
  } catch (const InvalidInput& e) {
    throw InvalidInput("utterance '" + entry.utt_id + "': " + e.what());
  }
}

std::string CachedFeatureSource::PathFor(const std::string& dir, const std::string& utt_id) {
  return (std::filesystem::path(dir) / (utt_id + ".vdft")).string();
}

dsp::FeatureMatrix CachedFeatureSource::Get(const corpus::ManifestEntry& entry) const {
  const std::string path = PathFor(dir_, entry.utt_id);
  if (!std::filesystem::exists(path)) {
    throw InvalidInput("utterance '" + entry.utt_id + "': missing cached features " + path);
  }
  return dsp::ReadFeatureCache(path);
}

std::vector<dsp::FeatureMatrix> LoadFeatures(std::span<const corpus::ManifestEntry> entries,
                                             const FeatureSource& source, int workers) {
  std::vector<dsp::FeatureMatrix> out(entries.size());
  ParallelFor(entries.size(), workers, [&](size_t i) { out[i] = source.Get(entries[i]); });
  return out;
}

std::string FeatureDigest(std::span<const dsp::FeatureMatrix> features) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& f : features) {
    const auto* p = reinterpret_cast<const unsigned char*>(f.values.data());
    for (size_t i = 0; i < f.values.size() * sizeof(float); ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dsv::trainer
