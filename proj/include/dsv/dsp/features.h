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

#ifndef DSV_DSP_FEATURES_H_
#define DSV_DSP_FEATURES_H_

#include <string>
#include <vector>

#include "dsv/dsp/audio.h"

namespace dsv::dsp {

inline constexpr int kNumBands = 64;
inline constexpr int kNumFrames = 96;

// Log-mel feature matrix stored band-major: values[band * n_frames + frame].
// This is also the frequency-major layout the network consumes.
struct FeatureMatrix {
  int n_bands = 0;
  int n_frames = 0;
  std::vector<float> values;
  bool normalized = false;

  FeatureMatrix() = default;
  FeatureMatrix(int bands, int frames)
      : n_bands(bands), n_frames(frames),
        values(static_cast<size_t>(bands) * frames, 0.0f) {}

  float& at(int band, int frame) {
    return values[static_cast<size_t>(band) * n_frames + frame];
  }
  float at(int band, int frame) const {
    return values[static_cast<size_t>(band) * n_frames + frame];
  }
  bool operator==(const FeatureMatrix&) const = default;
};

struct LogMelOptions {
  double win_ms = 16.0;
  double hop_ms = 8.0;
  int n_bands = kNumBands;
  double log_floor = 1e-10;
};

// HTK mel scale.
double HzToMel(double hz);
double MelToHz(double mel);

// Triangular filters equally spaced on the mel axis between 0 Hz and
// Nyquist, evaluated on the bins of an `fft_size`-point real FFT.
class MelFilterbank {
 public:
  MelFilterbank(int n_bands, int fft_size, int sample_rate);

  int n_bands() const { return n_bands_; }
  int n_bins() const { return n_bins_; }
  const std::vector<double>& center_hz() const { return center_hz_; }
  double weight(int band, int bin) const {
    return weights_[static_cast<size_t>(band) * n_bins_ + bin];
  }
  // out[b] = sum_k weight(b, k) * power[k]
  void Apply(const double* power, double* out) const;

 private:
  int n_bands_;
  int n_bins_;
  std::vector<double> center_hz_;
  std::vector<double> weights_;
};

// Frame geometry used by ExtractLogMel. Throws InvalidInput if the window
// rounds to fewer than 2 samples.
struct FrameGeometry {
  int win_samples;
  int hop_samples;
};
FrameGeometry ComputeFrameGeometry(int sample_rate, const LogMelOptions& opts);

// Hann-windowed power spectrum -> mel filterbank -> ln(max(e, floor)).
// Produces floor((L - win) / hop) + 1 frames.
FeatureMatrix ExtractLogMel(const AudioBuffer& audio,
                            const LogMelOptions& opts = {});

// Crops the tail, or wrap-pads by repeating from frame 0.
FeatureMatrix FixLength(const FeatureMatrix& feat, int target = kNumFrames);

// Per-band standardization over the time axis.
FeatureMatrix Mvn(const FeatureMatrix& feat, double var_floor = 1e-8);

// ExtractLogMel -> FixLength -> Mvn.
FeatureMatrix NetworkInput(const AudioBuffer& audio,
                           const LogMelOptions& opts = {});

// "VDFT" feature cache record.
std::string EncodeFeatureCache(const FeatureMatrix& feat);
FeatureMatrix DecodeFeatureCache(const std::string& bytes,
                                 const std::string& name);
void WriteFeatureCache(const std::string& path, const FeatureMatrix& feat);
FeatureMatrix ReadFeatureCache(const std::string& path);

}  // namespace dsv::dsp

#endif  // DSV_DSP_FEATURES_H_
