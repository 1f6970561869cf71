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

#ifndef DSV_CLI_COMMANDS_H_
#define DSV_CLI_COMMANDS_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dsv/corpus/synth.h"
#include "dsv/dsp/features.h"
#include "dsv/metrics/detection.h"
#include "dsv/metrics/fusion.h"
#include "dsv/metrics/tsne.h"
#include "dsv/trainer/trainer.h"

namespace dsv::cli {

struct Common {
  int workers = 1;
  bool strict_deterministic = false;
  int EffectiveWorkers() const { return strict_deterministic ? 1 : workers; }
};

struct FrontEnd {
  double win_ms = 16.0;
  double hop_ms = 8.0;
  bool vad = false;
  dsp::LogMelOptions LogMel() const;
};

struct SynthArgs {
  corpus::SynthSpec spec;
  std::string out;
};

struct FeaturesArgs {
  std::string manifest;
  std::string out;
  FrontEnd front_end;
};

struct TrainArgs {
  std::string manifest;
  std::string features;  // optional cache directory
  std::string out;
  std::string mode = "multitask";
  std::string width = "1";
  std::vector<int> sessions;  // empty: every manifest row
  trainer::TrainConfig config;
  FrontEnd front_end;
};

struct EmbedArgs {
  std::string checkpoint;
  std::string manifest;
  std::string features;
  std::string out;
  FrontEnd front_end;
};

struct EnrollArgs {
  std::string embeddings;
  std::string enroll_list;
  std::string out;
};

struct ScoreArgs {
  std::string enrollment;
  std::string embeddings;
  std::string trials;
  std::string out;
};

struct EvalArgs {
  std::vector<std::string> scores;
  std::vector<std::string> names;
  std::string out;  // optional report directory
  metrics::DcfParams dcf;
};

struct FuseArgs {
  std::vector<std::string> train;
  std::vector<std::string> apply;
  std::string out;
  metrics::FusionOptions options;
};

struct TsneArgs {
  std::string embeddings;
  std::string manifest;
  std::vector<std::string> speakers;  // empty: all
  std::string out;
  metrics::TsneOptions options;
};

// Each job validates its arguments before touching any output.
void RunSynth(const SynthArgs& a, const Common& c, std::ostream& log);
void RunFeatures(const FeaturesArgs& a, const Common& c, std::ostream& log);
void RunTrain(const TrainArgs& a, const Common& c, std::ostream& log);
void RunEmbed(const EmbedArgs& a, const Common& c, std::ostream& log);
void RunEnroll(const EnrollArgs& a, const Common& c, std::ostream& log);
void RunScore(const ScoreArgs& a, const Common& c, std::ostream& log);
void RunEval(const EvalArgs& a, const Common& c, std::ostream& out);
void RunFuse(const FuseArgs& a, const Common& c, std::ostream& log);
void RunTsne(const TsneArgs& a, const Common& c, std::ostream& log);

// Text block and tab-separated summary for one or more score sets.
struct EvalRow {
  std::string system;
  double eer;
  double min_dcf;
  size_t n_target;
  size_t n_nontarget;
};
std::string FormatReport(const std::vector<EvalRow>& rows, const metrics::DcfParams& dcf);
std::string FormatSummary(const std::vector<EvalRow>& rows);

}  // namespace dsv::cli

#endif  // DSV_CLI_COMMANDS_H_
