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

#include "dsv/corpus/synth.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <numeric>

#include "dsv/common/binary_io.h"
#include "dsv/common/error.h"
#include "dsv/common/parallel.h"
#include "dsv/common/random.h"

namespace dsv::corpus {

namespace {

constexpr uint64_t kVoiceStream = 0x766f696365ULL;
constexpr uint64_t kDigitStream = 0x6469676974ULL;
constexpr uint64_t kTrialStream = 0x747269616cULL;
constexpr double kMaxHarmonicHz = 5000.0;
constexpr size_t kBlock = 32;

double Lerp(double a, double b, double u) { return a + (b - a) * u; }

// Formant targets sit at segment centers; linear in between, flat at the ends.
DigitPattern::Segment PatternAt(const DigitPattern& p, double u) {
  const size_t n = p.segments.size();
  const double pos = std::clamp(u * n - 0.5, 0.0, static_cast<double>(n - 1));
  const size_t i = std::min(static_cast<size_t>(pos), n - 1);
  const size_t j = std::min(i + 1, n - 1);
  const double w = pos - i;
  const auto& a = p.segments[i];
  const auto& b = p.segments[j];
  return {Lerp(a.f1, b.f1, w), Lerp(a.f2, b.f2, w), Lerp(a.f3, b.f3, w),
          Lerp(a.level_db, b.level_db, w)};
}

double Bump(double f, double center, double bw) {
  const double z = (f - center) / bw;
  return std::exp(-0.5 * z * z);
}

double EnvelopeDb(const VoiceSignature& v, const DigitPattern::Segment& seg, double scale, double f) {
  double db = seg.level_db;
  db += 26.0 * Bump(f, seg.f1 * scale, 90.0);
  db += 22.0 * Bump(f, seg.f2 * scale, 140.0);
  db += 16.0 * Bump(f, seg.f3 * scale, 200.0);
  db += v.resonance_gain_db * Bump(f, v.resonance_hz, 300.0);
  db += v.tilt_db_per_octave * std::log2(std::max(f, 50.0) / 100.0);
  return db;
}

double Fade(size_t i, size_t n, size_t ramp) {
  if (ramp == 0) return 1.0;
  const double a = i < ramp ? 0.5 - 0.5 * std::cos(std::numbers::pi * i / ramp) : 1.0;
  const size_t back = n - 1 - i;
  const double b = back < ramp ? 0.5 - 0.5 * std::cos(std::numbers::pi * back / ramp) : 1.0;
  return a * b;
}

}  // namespace

void SynthSpec::Validate() const {
  if (n_speakers < 2) throw InvalidInput("synth: need at least 2 speakers");
  if (n_digits < 1 || n_digits > kNumDigits) throw InvalidInput("synth: n_digits must be in 1..10");
  if (enroll_sessions < 1) throw InvalidInput("synth: need at least 1 enrollment session");
  if (sessions < 4 || sessions <= enroll_sessions) {
    throw InvalidInput("synth: need >= 4 sessions and at least one test session");
  }
  if (sample_rate < 8000) throw InvalidInput("synth: sample rate must be >= 8000");
  if (!(min_duration_s >= 0.1 && max_duration_s >= min_duration_s)) {
    throw InvalidInput("synth: invalid duration range");
  }
  if (passphrase_length < 1) throw InvalidInput("synth: passphrase length must be >= 1");
  if (nontarget_per_target < 0) throw InvalidInput("synth: nontarget ratio must be >= 0");
  if (kF0BaseHz + kF0SpacingHz * (n_speakers - 1) > sample_rate / 8.0) {
    throw InvalidInput("synth: too many speakers for the pitch grid at this sample rate");
  }
}

std::string SpeakerId(int speaker) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "spk%02d", speaker);
  return buf;
}

std::string UtteranceId(int speaker, int session, int digit) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "spk%02d_s%d_d%d", speaker, session, digit);
  return buf;
}

std::vector<VoiceSignature> MakeVoices(const SynthSpec& spec) {
  std::vector<size_t> grid(spec.n_speakers);
  std::iota(grid.begin(), grid.end(), 0);
  Rng perm(DeriveSeed(spec.seed, kVoiceStream));
  perm.Shuffle(std::span<size_t>(grid));
  std::vector<VoiceSignature> voices;
  for (int s = 0; s < spec.n_speakers; ++s) {
    Rng rng(DeriveSeed(spec.seed, kVoiceStream + 1 + s));
    VoiceSignature v;
    v.f0_hz = kF0BaseHz + kF0SpacingHz * grid[s];
    v.formant_scale = rng.Uniform(0.88, 1.12);
    v.resonance_hz = rng.Uniform(2500.0, 4500.0);
    v.resonance_gain_db = rng.Uniform(6.0, 14.0);
    v.tilt_db_per_octave = rng.Uniform(-9.0, -3.0);
    v.tempo = rng.Uniform(0.85, 1.15);
    voices.push_back(v);
  }
  return voices;
}

std::vector<DigitPattern> MakeDigitPatterns(const SynthSpec& spec) {
  Rng rng(DeriveSeed(spec.seed, kDigitStream));
  std::vector<DigitPattern> out;
  for (int d = 0; d < spec.n_digits; ++d) {
    DigitPattern p;
    const int n_seg = 2 + static_cast<int>(rng.Index(3));
    for (int i = 0; i < n_seg; ++i) {
      p.segments.push_back({rng.Uniform(280.0, 850.0), rng.Uniform(900.0, 2300.0),
                            rng.Uniform(2400.0, 3300.0), rng.Uniform(-8.0, 0.0)});
    }
    p.base_duration_s = rng.Uniform(0.42, 0.62);
    const bool fric = rng.Uniform(0.0, 1.0) < 0.5;
    p.frication_hz = fric ? rng.Uniform(3500.0, 6500.0) : 0.0;
    p.frication_at_start = rng.Uniform(0.0, 1.0) < 0.5;
    out.push_back(std::move(p));
  }
  return out;
}

SynthUtterance SynthesizeUtterance(const SynthSpec& spec, const VoiceSignature& voice,
                                   const DigitPattern& pattern, int speaker, int session,
                                   int digit) {
  const uint64_t key = (static_cast<uint64_t>(speaker) << 32) |
                       (static_cast<uint64_t>(session) << 8) | static_cast<uint64_t>(digit);
  Rng rng(DeriveSeed(DeriveSeed(spec.seed, kVoiceStream + 1 + speaker), key));
  const double sr = spec.sample_rate;

  const double total = std::clamp(pattern.base_duration_s * voice.tempo *
                                      rng.Uniform(0.93, 1.07),
                                  spec.min_duration_s, spec.max_duration_s);
  const double lead = rng.Uniform(0.03, 0.06);
  const double trail = rng.Uniform(0.03, 0.06);
  const auto n_total = static_cast<size_t>(std::lround(total * sr));
  const auto n_lead = static_cast<size_t>(std::lround(lead * sr));
  const auto n_speech = n_total - n_lead - static_cast<size_t>(std::lround(trail * sr));

  const double f0 = voice.f0_hz + rng.Uniform(-kF0SessionJitterHz, kF0SessionJitterHz);
  const double scale = voice.formant_scale * rng.Uniform(0.99, 1.01);
  const double gain_db = rng.Uniform(-3.0, 3.0);
  const int n_harm = std::max(1, static_cast<int>(std::min(kMaxHarmonicHz, 0.45 * sr) / f0));

  std::vector<std::complex<double>> phasor(n_harm), step(n_harm);
  for (int h = 0; h < n_harm; ++h) {
    phasor[h] = std::polar(1.0, rng.Uniform(0.0, 2.0 * std::numbers::pi));
    step[h] = std::polar(1.0, 2.0 * std::numbers::pi * (h + 1) * f0 / sr);
  }

  std::vector<double> speech(n_speech, 0.0);
  std::vector<double> amp_a(n_harm), amp_b(n_harm);
  auto amps_at = [&](size_t i, std::vector<double>& amps) {
    const auto seg = PatternAt(pattern, static_cast<double>(i) / std::max<size_t>(1, n_speech));

    for (int h = 0; h < n_harm; ++h) {
      amps[h] = std::pow(10.0, (EnvelopeDb(voice, seg, scale, (h + 1) * f0) + gain_db) / 20.0);
    }
  };
  amps_at(0, amp_a);
  for (size_t b0 = 0; b0 < n_speech; b0 += kBlock) {
    const size_t b1 = std::min(n_speech, b0 + kBlock);
    amps_at(b1, amp_b);
    for (size_t i = b0; i < b1; ++i) {
      const double w = static_cast<double>(i - b0) / kBlock;
      double acc = 0.0;
      for (int h = 0; h < n_harm; ++h) {
        acc += Lerp(amp_a[h], amp_b[h], w) * phasor[h].imag();
        phasor[h] *= step[h];
      }
      speech[i] = acc;
    }
    for (auto& z : phasor) z /= std::abs(z);
    std::swap(amp_a, amp_b);
  }

  const size_t ramp = static_cast<size_t>(0.015 * sr);
  double voiced_power = 0.0;
  for (size_t i = 0; i < n_speech; ++i) {
    speech[i] *= Fade(i, n_speech, ramp);
    voiced_power += speech[i] * speech[i];
  }
  voiced_power /= std::max<size_t>(1, n_speech);

  if (pattern.frication_hz > 0.0) {
    // Two-pole resonator driven by white noise.
    const size_t n_burst = std::min(n_speech, static_cast<size_t>(0.06 * sr));
    const double r = 0.97;
    const double theta = 2.0 * std::numbers::pi * pattern.frication_hz * scale / sr;
    const double a1 = 2.0 * r * std::cos(theta), a2 = -r * r;
    std::vector<double> burst(n_burst);
    double y1 = 0.0, y2 = 0.0, p = 0.0;
    for (size_t i = 0; i < n_burst; ++i) {
      const double y = rng.Normal() + a1 * y1 + a2 * y2;
      y2 = y1;
      y1 = y;
      burst[i] = y * Fade(i, n_burst, n_burst / 4);
      p += burst[i] * burst[i];
    }
    const double g = std::sqrt(0.3 * voiced_power / std::max(p / std::max<size_t>(1, n_burst), 1e-30));
    const size_t off = pattern.frication_at_start ? 0 : n_speech - n_burst;
    for (size_t i = 0; i < n_burst; ++i) speech[off + i] += g * burst[i];
  }

  double power = 0.0;
  for (double v : speech) power += v * v;
  power /= std::max<size_t>(1, n_speech);
  const double noise_sd = std::sqrt(power / std::pow(10.0, spec.snr_db / 10.0));

  std::vector<double> signal(n_total, 0.0);
  for (size_t i = 0; i < n_speech; ++i) signal[n_lead + i] = speech[i];
  double peak = 0.0;
  for (double& v : signal) {
    v += noise_sd * rng.Normal();
    peak = std::max(peak, std::abs(v));
  }
  const double norm = peak > 0.0 ? 0.5 / peak : 1.0;

  SynthUtterance out;
  out.audio.sample_rate = spec.sample_rate;
  out.audio.samples.resize(n_total);
  for (size_t i = 0; i < n_total; ++i) out.audio.samples[i] = static_cast<float>(signal[i] * norm);
  out.entry.utt_id = UtteranceId(speaker, session, digit);
  out.entry.speaker_id = SpeakerId(speaker);
  out.entry.digit = digit;
  out.entry.session = session;
  out.entry.path = "wav/" + out.entry.utt_id + ".wav";
  out.entry.start_s = 0.0;
  out.entry.end_s = static_cast<double>(n_total) / sr;
  return out;
}

SynthCorpus PlanCorpus(const SynthSpec& spec) {
  spec.Validate();
  SynthCorpus corpus;
  for (int s = 0; s < spec.n_speakers; ++s) {
    EnrollmentRecord enr{SpeakerId(s), {}};
    for (int d = 0; d < spec.n_digits; ++d) {
      for (int sess = 0; sess < spec.enroll_sessions; ++sess) {
        enr.utterances.push_back({d, UtteranceId(s, sess, d)});
      }
    }
    corpus.enrollment.push_back(std::move(enr));
  }

  Rng rng(DeriveSeed(spec.seed, kTrialStream));
  auto passphrase = [&](int speaker, int session) {
    std::vector<int> digits(spec.n_digits);
    std::iota(digits.begin(), digits.end(), 0);
    std::vector<DigitRef> refs;
    if (spec.passphrase_length <= spec.n_digits) {
      rng.Shuffle(std::span<int>(digits));
      for (int i = 0; i < spec.passphrase_length; ++i) {
        refs.push_back({digits[i], UtteranceId(speaker, session, digits[i])});
      }
    } else {
      for (int i = 0; i < spec.passphrase_length; ++i) {
        const int d = static_cast<int>(rng.Index(spec.n_digits));
        refs.push_back({d, UtteranceId(speaker, session, d)});
      }
    }
    return refs;
  };
  const int n_test = spec.sessions - spec.enroll_sessions;
  for (int s = 0; s < spec.n_speakers; ++s) {
    for (int sess = spec.enroll_sessions; sess < spec.sessions; ++sess) {
      corpus.trials.push_back({SpeakerId(s), passphrase(s, sess), TrialLabel::kTarget});
      for (int k = 0; k < spec.nontarget_per_target; ++k) {
        int imp = static_cast<int>(rng.Index(spec.n_speakers - 1));
        if (imp >= s) ++imp;
        const int isess = spec.enroll_sessions + static_cast<int>(rng.Index(n_test));
        corpus.trials.push_back({SpeakerId(s), passphrase(imp, isess), TrialLabel::kNontarget});
      }
    }
  }

  for (int s = 0; s < spec.n_speakers; ++s) {
    for (int sess = 0; sess < spec.sessions; ++sess) {
      for (int d = 0; d < spec.n_digits; ++d) {
        ManifestEntry e;
        e.utt_id = UtteranceId(s, sess, d);
        e.speaker_id = SpeakerId(s);
        e.digit = d;
        e.session = sess;
        e.path = "wav/" + e.utt_id + ".wav";
        corpus.manifest.push_back(std::move(e));
      }
    }
  }
  return corpus;
}

SynthCorpus WriteSynthCorpus(const SynthSpec& spec, const std::string& out_dir, int workers) {
  SynthCorpus corpus = PlanCorpus(spec);
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "wav", ec);
  if (ec) throw RuntimeFailure("cannot create " + out_dir + ": " + ec.message());

  const auto voices = MakeVoices(spec);
  const auto patterns = MakeDigitPatterns(spec);
  const size_t per_speaker = static_cast<size_t>(spec.sessions) * spec.n_digits;
  ParallelFor(spec.n_speakers, workers, [&](size_t s) {
    for (int sess = 0; sess < spec.sessions; ++sess) {
      for (int d = 0; d < spec.n_digits; ++d) {
        SynthUtterance u = SynthesizeUtterance(spec, voices[s], patterns[d], static_cast<int>(s),
                                               sess, d);
        dsp::WriteWav((fs::path(out_dir) / u.entry.path).string(), u.audio);
        corpus.manifest[s * per_speaker + sess * spec.n_digits + d] = std::move(u.entry);
      }
    }
  });
  WriteManifest((fs::path(out_dir) / "manifest.jsonl").string(), corpus.manifest);
  WriteFileBytes((fs::path(out_dir) / "enroll.tsv").string(),
                 SerializeEnrollmentList(corpus.enrollment));
  WriteFileBytes((fs::path(out_dir) / "trials.tsv").string(), SerializeTrials(corpus.trials));
  return corpus;
}

}  // namespace dsv::corpus
