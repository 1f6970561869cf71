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

#ifndef DSV_DSP_VAD_H_
#define DSV_DSP_VAD_H_

#include <vector>

#include "dsv/dsp/audio.h"

namespace dsv::dsp {

struct SpeechSegment {
  double start_s;
  double end_s;
  bool operator==(const SpeechSegment&) const = default;
};

struct VadOptions {
  double frame_ms = 16.0;
  // Frames whose mean-square energy is within this many dB of the loudest
  // frame count as speech.
  double threshold_db = -40.0;
  // Runs separated by less than this are merged.
  double merge_gap_s = 0.1;
};

// Energy detector over non-overlapping frames; a trailing partial frame is
// kept. Silence (all frames zero) yields no segments.
std::vector<SpeechSegment> EnergyVad(const AudioBuffer& audio,
                                     const VadOptions& opts = {});

}  // namespace dsv::dsp

#endif  // DSV_DSP_VAD_H_
