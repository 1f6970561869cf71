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

#ifndef DSV_CORPUS_SYNTH_H_
#define DSV_CORPUS_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dsv/corpus/manifest.h"
#include "dsv/corpus/protocol.h"
#include "dsv/dsp/audio.h"

namespace dsv::corpus {

struct SynthSpec {
  int n_speakers = 20;
  int n_digits = kNumDigits;
  int sessions = 8;         // per speaker; the first `enroll_sessions` enroll
  int enroll_sessions = 3;
  uint64_t seed = 7;
  int sample_rate = 16000;
  double min_duration_s = 0.3;
  double max_duration_s = 0.8;
  double snr_db = 20.0;
  int passphrase_length = 5;
  int nontarget_per_target = 10;

  void Validate() const;
};

// Stable per-speaker voice: fundamental frequency and resonance profile.
struct VoiceSignature {
  double f0_hz;
  double formant_scale;   // vocal-tract length factor applied to digit formants
  double resonance_hz;    // speaker-specific extra spectral peak
  double resonance_gain_db;
  double tilt_db_per_octave;
  double tempo;           // speaking-rate factor on digit durations
};

// Stable per-digit pattern: a sequence of formant targets plus optional
// frication noise burst.
struct DigitPattern {
  struct Segment {
    double f1, f2, f3;
    double level_db;
  };
  std::vector<Segment> segments;
  double base_duration_s;
  double frication_hz;    // <= 0 when the digit has no burst
  bool frication_at_start;
};

// Pitch grid: speakers get distinct f0 values spaced kF0SpacingHz apart.
inline constexpr double kF0BaseHz = 95.0;
inline constexpr double kF0SpacingHz = 8.0;
inline constexpr double kF0SessionJitterHz = 1.0;

std::vector<VoiceSignature> MakeVoices(const SynthSpec& spec);
std::vector<DigitPattern> MakeDigitPatterns(const SynthSpec& spec);

struct SynthUtterance {
  ManifestEntry entry;
  dsp::AudioBuffer audio;
};

// Deterministic for a given (spec, speaker, session, digit).
SynthUtterance SynthesizeUtterance(const SynthSpec& spec, const VoiceSignature& voice,
                                   const DigitPattern& pattern, int speaker, int session,
                                   int digit);

std::string SpeakerId(int speaker);
std::string UtteranceId(int speaker, int session, int digit);

struct SynthCorpus {
  std::vector<ManifestEntry> manifest;
  std::vector<EnrollmentRecord> enrollment;
  std::vector<TrialRecord> trials;
};

// Builds the manifest and protocol lists without audio.
SynthCorpus PlanCorpus(const SynthSpec& spec);

// Writes wav/<utt>.wav, manifest.jsonl, enroll.tsv and trials.tsv under
// out_dir. Generation is parallel over speakers with per-speaker seeds, so
// the output does not depend on `workers`.
SynthCorpus WriteSynthCorpus(const SynthSpec& spec, const std::string& out_dir, int workers = 1);

}  // namespace dsv::corpus

#endif  // DSV_CORPUS_SYNTH_H_
