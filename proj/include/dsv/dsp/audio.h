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

#ifndef DSV_DSP_AUDIO_H_
#define DSV_DSP_AUDIO_H_

#include <string>
#include <vector>

#include "dsv/common/error.h"

namespace dsv::dsp {

// Mono audio with amplitudes in [-1, 1].
struct AudioBuffer {
  std::vector<float> samples;
  int sample_rate = 0;

  double DurationSeconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                           : 0.0;
  }
};

class WavError : public InvalidInput {
 public:
  enum class Kind {
    kMalformedHeader,
    kUnsupportedEncoding,
    kUnsupportedChannelCount,
    kEmptyPayload,
  };
  WavError(Kind kind, const std::string& what) : InvalidInput(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Reads a RIFF/WAVE file holding 16-bit signed PCM mono. Samples are scaled
// by 1/32768.
AudioBuffer ReadWav(const std::string& path);
AudioBuffer ParseWav(const std::string& bytes, const std::string& name);

// Inverse of ReadWav: clamps to the int16 range after scaling by 32768.
std::string EncodeWav(const AudioBuffer& audio);
void WriteWav(const std::string& path, const AudioBuffer& audio);

// Samples in [round(start_s*sr), round(end_s*sr)), clipped to the buffer.
AudioBuffer Slice(const AudioBuffer& audio, double start_s, double end_s);

}  // namespace dsv::dsp

#endif  // DSV_DSP_AUDIO_H_
