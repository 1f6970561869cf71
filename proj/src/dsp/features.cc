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

#include "dsv/dsp/features.h"

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>

#include "dsv/common/binary_io.h"

namespace dsv::dsp {

namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& FftwPlannerMutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard<std::mutex> lock(FftwPlannerMutex());
    plan_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    {
      std::lock_guard<std::mutex> lock(FftwPlannerMutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_; }

  // |X_k|^2 for k = 0..n/2.
  void PowerSpectrum(double* power) {
    fftw_execute(plan_);
    for (int k = 0; k <= n_ / 2; ++k) {
      power[k] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
    }
  }

 private:
  int n_;
  double* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

constexpr char kFeatureMagic[] = "VDFT";
constexpr uint32_t kFeatureVersion = 1;

}  // namespace

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank::MelFilterbank(int n_bands, int fft_size, int sample_rate)
    : n_bands_(n_bands), n_bins_(fft_size / 2 + 1) {
  if (n_bands < 1 || fft_size < 2 || sample_rate <= 0) {
    throw InvalidInput("MelFilterbank: invalid geometry");
  }
  const double mel_hi = HzToMel(sample_rate / 2.0);
  const double step = mel_hi / (n_bands + 1);
  weights_.assign(static_cast<size_t>(n_bands) * n_bins_, 0.0);
  center_hz_.resize(n_bands);
  for (int b = 0; b < n_bands; ++b) {
    const double left = step * b, center = step * (b + 1), right = step * (b + 2);
    center_hz_[b] = MelToHz(center);
    for (int k = 0; k < n_bins_; ++k) {
      const double mel = HzToMel(static_cast<double>(k) * sample_rate / fft_size);
      double w = 0.0;
      if (mel > left && mel <= center) {
        w = (mel - left) / (center - left);
      } else if (mel > center && mel < right) {
        w = (right - mel) / (right - center);
      }
      weights_[static_cast<size_t>(b) * n_bins_ + k] = w;
    }
  }
}

void MelFilterbank::Apply(const double* power, double* out) const {
  for (int b = 0; b < n_bands_; ++b) {
    const double* w = &weights_[static_cast<size_t>(b) * n_bins_];
    double acc = 0.0;
    for (int k = 0; k < n_bins_; ++k) acc += w[k] * power[k];
    out[b] = acc;
  }
}

FrameGeometry ComputeFrameGeometry(int sample_rate, const LogMelOptions& opts) {
  if (sample_rate <= 0) throw InvalidInput("sample rate must be > 0");
  FrameGeometry g{static_cast<int>(std::lround(opts.win_ms * sample_rate / 1000.0)),
                  static_cast<int>(std::lround(opts.hop_ms * sample_rate / 1000.0))};
  if (g.win_samples < 2 || g.hop_samples < 1) {
    throw InvalidInput("window/hop too short for sample rate " +
                       std::to_string(sample_rate));
  }
  return g;
}

FeatureMatrix ExtractLogMel(const AudioBuffer& audio, const LogMelOptions& opts) {
  const FrameGeometry g = ComputeFrameGeometry(audio.sample_rate, opts);
  const long len = static_cast<long>(audio.samples.size());
  if (len < g.win_samples) {
    throw InvalidInput("audio shorter than one analysis window (" +
                       std::to_string(len) + " < " +
                       std::to_string(g.win_samples) + " samples)");
  }
  const int n_frames = static_cast<int>((len - g.win_samples) / g.hop_samples + 1);

  std::vector<double> window(g.win_samples);
  for (int n = 0; n < g.win_samples; ++n) {
    window[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / g.win_samples);
  }
  const MelFilterbank fbank(opts.n_bands, g.win_samples, audio.sample_rate);
  RealFft fft(g.win_samples);
  std::vector<double> power(fbank.n_bins()), mel(opts.n_bands);

  FeatureMatrix feat(opts.n_bands, n_frames);
  for (int t = 0; t < n_frames; ++t) {
    const float* frame = audio.samples.data() + static_cast<size_t>(t) * g.hop_samples;
    double* in = fft.input();
    for (int n = 0; n < g.win_samples; ++n) in[n] = frame[n] * window[n];
    fft.PowerSpectrum(power.data());
    fbank.Apply(power.data(), mel.data());
    for (int b = 0; b < opts.n_bands; ++b) {
      feat.at(b, t) = static_cast<float>(std::log(std::max(mel[b], opts.log_floor)));
    }
  }
  return feat;
}

FeatureMatrix FixLength(const FeatureMatrix& feat, int target) {
  if (feat.n_frames < 1) throw InvalidInput("FixLength: zero-frame input");
  if (target < 1) throw InvalidInput("FixLength: target must be >= 1");
  FeatureMatrix out(feat.n_bands, target);
  out.normalized = false;
  for (int b = 0; b < feat.n_bands; ++b) {
    for (int t = 0; t < target; ++t) out.at(b, t) = feat.at(b, t % feat.n_frames);
  }
  return out;
}

FeatureMatrix Mvn(const FeatureMatrix& feat, double var_floor) {
  if (feat.n_frames < 1) throw InvalidInput("Mvn: zero-frame input");
  FeatureMatrix out(feat.n_bands, feat.n_frames);
  for (int b = 0; b < feat.n_bands; ++b) {
    double mean = 0.0;
    for (int t = 0; t < feat.n_frames; ++t) mean += feat.at(b, t);
    mean /= feat.n_frames;
    double var = 0.0;
    for (int t = 0; t < feat.n_frames; ++t) {
      const double d = feat.at(b, t) - mean;
      var += d * d;
    }
    var /= feat.n_frames;
    const double inv = 1.0 / std::sqrt(var + var_floor);
    for (int t = 0; t < feat.n_frames; ++t) {
      out.at(b, t) = static_cast<float>((feat.at(b, t) - mean) * inv);
    }
  }
  out.normalized = true;
  return out;
}

FeatureMatrix NetworkInput(const AudioBuffer& audio, const LogMelOptions& opts) {
  return Mvn(FixLength(ExtractLogMel(audio, opts), kNumFrames));
}

std::string EncodeFeatureCache(const FeatureMatrix& feat) {
  ByteWriter w;
  w.PutBytes(kFeatureMagic);
  w.PutU32(kFeatureVersion);
  w.PutU32(static_cast<uint32_t>(feat.n_bands));
  w.PutU32(static_cast<uint32_t>(feat.n_frames));
  w.PutF32Array(feat.values);
  return w.Release();
}

FeatureMatrix DecodeFeatureCache(const std::string& bytes, const std::string& name) {
  ByteReader r(bytes, name);
  if (r.GetBytes(4) != kFeatureMagic) throw InvalidInput(name + ": not a VDFT feature file");
  if (uint32_t v = r.GetU32(); v != kFeatureVersion) {
    throw InvalidInput(name + ": unsupported feature cache version " + std::to_string(v));
  }
  const uint32_t rows = r.GetU32(), cols = r.GetU32();
  if (rows == 0 || cols == 0 || rows > 4096 || cols > 1 << 20) {
    throw InvalidInput(name + ": implausible feature shape");
  }
  FeatureMatrix feat(static_cast<int>(rows), static_cast<int>(cols));
  r.GetF32Array(feat.values);
  if (!r.AtEnd()) throw InvalidInput(name + ": trailing bytes after feature payload");
  // Cached features are always the normalized network input.
  feat.normalized = true;
  return feat;
}

void WriteFeatureCache(const std::string& path, const FeatureMatrix& feat) {
  WriteFileBytes(path, EncodeFeatureCache(feat));
}

FeatureMatrix ReadFeatureCache(const std::string& path) {
  return DecodeFeatureCache(ReadFileBytes(path), path);
}

}  // namespace dsv::dsp
