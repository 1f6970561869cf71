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

#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"

#include "dsv/common/binary_io.h"
#include "dsv/corpus/manifest.h"
#include "dsv/corpus/protocol.h"
#include "dsv/corpus/synth.h"
#include "dsv/dsp/features.h"

namespace dsv::corpus {
namespace {
namespace fs = std::filesystem;

std::string ErrorOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const InvalidInput& e) {
    return e.what();
  }
  return "";
}

const char* kRow1 =
    R"({"utt_id":"a","speaker_id":"s1","digit":3,"session":0,"path":"a.wav","start_s":0.0,"end_s":0.5})";
const char* kRow2 =
    R"({"utt_id":"b","speaker_id":"s2","digit":9,"session":1,"path":"/abs/b.wav","start_s":0.25,"end_s":1.0})";

TEST_CASE("manifest parsing") {
  CHECK(ParseManifest("", "m").empty());
  const auto rows = ParseManifest(std::string(kRow1) + "\n" + kRow2 + "\n", "m");
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].digit == 9);
  CHECK(rows[1].start_s == 0.25);
  CHECK(ParseManifest(SerializeManifest(rows), "m") == rows);
  CHECK(SerializeManifest(ParseManifest(SerializeManifest(rows), "m")) == SerializeManifest(rows));
}

TEST_CASE("manifest errors carry line numbers") {
  const std::string dup = ErrorOf([] { ParseManifest(std::string(kRow1) + "\n" + kRow1 + "\n", "m.jsonl"); });
  CHECK(dup.find("m.jsonl:2") != std::string::npos);
  CHECK(dup.find("duplicate") != std::string::npos);

  std::string ten = kRow1;
  ten.replace(ten.find("\"digit\":3"), 9, "\"digit\":10");
  CHECK(ErrorOf([&] { ParseManifest(ten, "m"); }).find("m:1") != std::string::npos);

  std::string backwards = kRow1;
  backwards.replace(backwards.find("\"end_s\":0.5"), 11, "\"end_s\":0.0");
  CHECK_FALSE(ErrorOf([&] { ParseManifest(backwards, "m"); }).empty());

  std::string extra = kRow1;
  extra.insert(1, "\"gender\":\"f\",");
  CHECK_FALSE(ErrorOf([&] { ParseManifest(extra, "m"); }).empty());

  std::string missing = kRow1;
  missing.replace(missing.find(",\"session\":0"), 12, "");
  CHECK_FALSE(ErrorOf([&] { ParseManifest(missing, "m"); }).empty());

  CHECK_FALSE(ErrorOf([] { ParseManifest("{not json", "m"); }).empty());
}

TEST_CASE("manifest paths resolve against the manifest directory") {
  CHECK(ManifestBaseDir("/data/corpus/manifest.jsonl") == "/data/corpus");
  CHECK(ResolvePath("/data/corpus", "wav/a.wav") == "/data/corpus/wav/a.wav");
  CHECK(ResolvePath("/data/corpus", "/abs/a.wav") == "/abs/a.wav");
}

TEST_CASE("uniform split") {
  const auto parts = UniformSplit(1.0, 3.5, 5);
  REQUIRE(parts.size() == 5);
  CHECK(parts[0].first == 1.0);
  CHECK(parts[0].second == doctest::Approx(1.5));
  CHECK(parts[4].second == 3.5);
  CHECK_THROWS_AS(UniformSplit(1.0, 1.0, 2), InvalidInput);
  CHECK_THROWS_AS(UniformSplit(0.0, 1.0, 0), InvalidInput);
}

TEST_CASE("trial parsing") {
  const auto t = ParseTrials("spk01\t3:u1,1:u2,4:u3,1:u4,5:u5\ttarget\n", "t");
  REQUIRE(t.size() == 1);
  CHECK(t[0].model_id == "spk01");
  CHECK(t[0].passphrase.size() == 5);
  CHECK(t[0].passphrase[3] == DigitRef{1, "u4"});
  CHECK(t[0].label == TrialLabel::kTarget);
  CHECK(ParseTrials(SerializeTrials(t), "t") == t);

  CHECK_FALSE(ErrorOf([] { ParseTrials("spk01\t3:u1\ttgt\n", "t"); }).empty());
  CHECK_FALSE(ErrorOf([] { ParseTrials("spk01\t\ttarget\n", "t"); }).empty());
  CHECK_FALSE(ErrorOf([] { ParseTrials("spk01\t3u1\ttarget\n", "t"); }).empty());
  CHECK_FALSE(ErrorOf([] { ParseTrials("spk01\t12:u1\ttarget\n", "t"); }).empty());
  CHECK(ErrorOf([] { ParseTrials("a\t1:u\ttarget\nb\t1:u\tbad\n", "t.tsv"); }).find("t.tsv:2") != std::string::npos);
  CHECK(ParseTrials("a\t1:u\tunknown\n", "t")[0].label == TrialLabel::kUnknown);
}

TEST_CASE("enrollment list round trip") {
  std::vector<EnrollmentRecord> recs = {{"spk00", {{0, "a"}, {0, "b"}, {1, "c"}}}, {"spk01", {{9, "d"}}}};
  CHECK(ParseEnrollmentList(SerializeEnrollmentList(recs), "e") == recs);
}

TEST_CASE("synthetic plan sizes") {
  SynthSpec spec;
  const auto plan = PlanCorpus(spec);
  CHECK(plan.manifest.size() == 1600);
  CHECK(plan.enrollment.size() == 20);
  size_t targets = 0, nontargets = 0;
  for (const auto& t : plan.trials) {
    CHECK(t.passphrase.size() == 5);
    (t.label == TrialLabel::kTarget ? targets : nontargets)++;
  }
  CHECK(targets == 20 * 5);
  CHECK(nontargets == 10 * targets);
  for (const auto& e : plan.enrollment) CHECK(e.utterances.size() == 30);

  SynthSpec bad = spec;
  bad.sessions = 3;
  CHECK_THROWS_AS(bad.Validate(), InvalidInput);
  bad = spec;
  bad.n_speakers = 1;
  CHECK_THROWS_AS(bad.Validate(), InvalidInput);
}

TEST_CASE("synthetic trials reference the right speakers") {
  const auto plan = PlanCorpus(SynthSpec{});
  std::map<std::string, std::string> speaker_of;
  for (const auto& m : plan.manifest) speaker_of[m.utt_id] = m.speaker_id;
  std::set<std::string> seen;
  for (const auto& t : plan.trials) {
    const std::string spk = speaker_of.at(t.passphrase[0].utt_id);
    for (const auto& ref : t.passphrase) CHECK(speaker_of.at(ref.utt_id) == spk);
    CHECK((spk == t.model_id) == (t.label == TrialLabel::kTarget));
  }
}

TEST_CASE("synthetic corpus is deterministic and independent of workers") {
  SynthSpec spec;
  spec.n_speakers = 3;
  spec.sessions = 4;
  const fs::path root = fs::temp_directory_path() / "dsv_corpus_test";
  fs::remove_all(root);
  WriteSynthCorpus(spec, (root / "a").string(), 1);
  WriteSynthCorpus(spec, (root / "b").string(), 3);
  size_t files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), root / "a");
    CHECK(ReadFileBytes(entry.path().string()) == ReadFileBytes((root / "b" / rel).string()));
    ++files;
  }
  CHECK(files == 3 * 4 * 10 + 3);
  fs::remove_all(root);
}

// Normalized autocorrelation pitch estimate over 75..300 Hz. A lag whose
// half scores nearly as well is treated as an octave error.
double PitchOracle(const std::vector<float>& x, int sr) {
  const int lo = sr / 300, hi = sr / 75;
  std::vector<double> r(hi + 2, 0.0);
  for (int lag = lo / 2 - 1; lag <= hi + 1; ++lag) {
    double xy = 0.0, xx = 0.0, yy = 0.0;
    for (size_t i = 0; i + lag < x.size(); ++i) {
      xy += static_cast<double>(x[i]) * x[i + lag];
      xx += static_cast<double>(x[i]) * x[i];
      yy += static_cast<double>(x[i + lag]) * x[i + lag];
    }
    r[lag] = xy / std::sqrt(xx * yy);
  }
  int best = lo;
  for (int lag = lo; lag <= hi; ++lag) {
    if (r[lag] > r[best]) best = lag;
  }
  for (bool moved = true; moved;) {
    moved = false;
    const int half = best / 2;
    int local = half - 1;
    for (int lag = half - 1; lag <= half + 1; ++lag) {
      if (lag >= lo && r[lag] > r[local]) local = lag;
    }
    if (local >= lo && r[local] > 0.95 * r[best]) {
      best = local;
      moved = true;
    }
  }
  const double a = r[best - 1], b = r[best], c = r[best + 1];
  const double shift = 0.5 * (a - c) / (a - 2 * b + c);
  return sr / (best + shift);
}

TEST_CASE("distinct speakers differ in pitch by at least 5 Hz") {
  SynthSpec spec;
  const auto voices = MakeVoices(spec);
  const auto digits = MakeDigitPatterns(spec);
  for (int digit : {2, 7}) {
    std::vector<double> f0;
    for (int s = 0; s < spec.n_speakers; ++s) {
      const auto u = SynthesizeUtterance(spec, voices[s], digits[digit], s, 0, digit);
      f0.push_back(PitchOracle(u.audio.samples, spec.sample_rate));
      CHECK(std::abs(f0.back() - voices[s].f0_hz) < 2.0);
    }
    for (size_t a = 0; a < f0.size(); ++a)
      for (size_t b = a + 1; b < f0.size(); ++b) {
        INFO("speakers " << a << " and " << b);
        CHECK(std::abs(f0[a] - f0[b]) >= 5.0);
      }
  }
}

TEST_CASE("digits are separable by nearest class mean on raw log-mel") {
  SynthSpec spec;
  const auto voices = MakeVoices(spec);
  const auto digits = MakeDigitPatterns(spec);
  auto band_means = [&](int s, int session, int d) {
    const auto u = SynthesizeUtterance(spec, voices[s], digits[d], s, session, d);
    const auto f = dsp::FixLength(dsp::ExtractLogMel(u.audio));
    std::vector<double> m(f.n_bands, 0.0);
    for (int b = 0; b < f.n_bands; ++b) {
      for (int t = 0; t < f.n_frames; ++t) m[b] += f.at(b, t) / f.n_frames;
    }
    return m;
  };
  std::vector<std::vector<double>> centroid(spec.n_digits, std::vector<double>(dsp::kNumBands, 0.0));
  for (int s = 0; s < spec.n_speakers; ++s)
    for (int session = 0; session < spec.enroll_sessions; ++session)
      for (int d = 0; d < spec.n_digits; ++d) {
        const auto m = band_means(s, session, d);
        for (int b = 0; b < dsp::kNumBands; ++b) centroid[d][b] += m[b];
      }
  int correct = 0, total = 0;
  for (int s = 0; s < spec.n_speakers; ++s)
    for (int session = spec.enroll_sessions; session < spec.sessions; ++session)
      for (int d = 0; d < spec.n_digits; ++d) {
        const auto m = band_means(s, session, d);
        int best = 0;
        double best_dist = INFINITY;
        for (int c = 0; c < spec.n_digits; ++c) {
          double dist = 0.0;
          const double n = spec.n_speakers * spec.enroll_sessions;
          for (int b = 0; b < dsp::kNumBands; ++b) dist += std::pow(m[b] - centroid[c][b] / n, 2);
          if (dist < best_dist) {
            best_dist = dist;
            best = c;
          }
        }
        correct += best == d ? 1 : 0;
        ++total;
      }
  const double accuracy = static_cast<double>(correct) / total;
  MESSAGE("held-out nearest-class-mean digit accuracy " << accuracy);
  CHECK(accuracy > 0.8);
}

}  // namespace
}  // namespace dsv::corpus
