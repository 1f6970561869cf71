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

#include "dsv/dsp/vad.h"

#include <algorithm>
#include <cmath>

namespace dsv::dsp {

std::vector<SpeechSegment> EnergyVad(const AudioBuffer& audio, const VadOptions& opts) {
  if (audio.samples.empty()) throw InvalidInput("EnergyVad: empty audio");
  if (audio.sample_rate <= 0) throw InvalidInput("EnergyVad: sample rate must be > 0");
  const size_t frame = std::max<long>(1, std::lround(opts.frame_ms * audio.sample_rate / 1000.0));
  const size_t len = audio.samples.size();
  const size_t n_frames = (len + frame - 1) / frame;

  std::vector<double> energy(n_frames, 0.0);
  for (size_t f = 0; f < n_frames; ++f) {
    const size_t b = f * frame, e = std::min(len, b + frame);
    double acc = 0.0;
    for (size_t i = b; i < e; ++i) acc += static_cast<double>(audio.samples[i]) * audio.samples[i];
    energy[f] = acc / static_cast<double>(e - b);
  }
  const double peak = *std::max_element(energy.begin(), energy.end());
  if (peak <= 0.0) return {};
  const double threshold = peak * std::pow(10.0, opts.threshold_db / 10.0);

  const double sr = audio.sample_rate;
  std::vector<SpeechSegment> segments;
  size_t f = 0;
  while (f < n_frames) {
    if (energy[f] <= threshold) {
      ++f;
      continue;
    }
    size_t g = f;
    while (g < n_frames && energy[g] > threshold) ++g;
    SpeechSegment seg{static_cast<double>(f * frame) / sr,
                      static_cast<double>(std::min(len, g * frame)) / sr};
    if (!segments.empty() && seg.start_s - segments.back().end_s < opts.merge_gap_s) {
      segments.back().end_s = seg.end_s;
    } else {
      segments.push_back(seg);
    }
    f = g;
  }
  return segments;
}

}  // namespace dsv::dsp
