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

#include "cli/commands.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>

#include "dsv/common/binary_io.h"
#include "dsv/common/error.h"
#include "dsv/corpus/manifest.h"
#include "dsv/corpus/protocol.h"
#include "dsv/model/checkpoint.h"
#include "dsv/model/light_cnn.h"
#include "dsv/trainer/embeddings.h"
#include "dsv/trainer/feature_source.h"
#include "dsv/trainer/label_map.h"
#include "dsv/verify/scoring.h"

namespace dsv::cli {
namespace fs = std::filesystem;

namespace {

void EnsureDir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw RuntimeFailure("cannot create directory '" + dir + "': " + ec.message());
}

void EnsureParent(const std::string& file) {
  const fs::path parent = fs::path(file).parent_path();
  if (!parent.empty()) EnsureDir(parent.string());
}

void RequireFile(const std::string& path, const std::string& what) {
  if (path.empty()) throw InvalidInput(what + " path is required");
  if (!fs::is_regular_file(path)) throw InvalidInput(what + " '" + path + "' does not exist");
}

std::unique_ptr<trainer::FeatureSource> MakeSource(const std::string& manifest,
                                                   const std::string& features,
                                                   const FrontEnd& fe) {
  if (!features.empty()) {
    if (!fs::is_directory(features)) {
      throw InvalidInput("feature directory '" + features + "' does not exist");
    }
    return std::make_unique<trainer::CachedFeatureSource>(features);
  }
  return std::make_unique<trainer::AudioFeatureSource>(corpus::ManifestBaseDir(manifest), fe.LogMel(),
                                                       fe.vad);
}

void ValidateFrontEnd(const FrontEnd& fe) {
  if (!(fe.win_ms > 0.0) || !(fe.hop_ms > 0.0)) throw InvalidInput("frame and hop must be > 0 ms");
  dsp::ComputeFrameGeometry(16000, fe.LogMel());
}

std::string Stem(const std::string& path) { return fs::path(path).stem().string(); }

}  // namespace

dsp::LogMelOptions FrontEnd::LogMel() const {
  dsp::LogMelOptions o;
  o.win_ms = win_ms;
  o.hop_ms = hop_ms;
  return o;
}

void RunSynth(const SynthArgs& a, const Common& c, std::ostream& log) {
  a.spec.Validate();
  if (a.out.empty()) throw InvalidInput("--out is required");
  EnsureDir(a.out);
  const auto corpus = corpus::WriteSynthCorpus(a.spec, a.out, c.EffectiveWorkers());
  log << "synth: " << corpus.manifest.size() << " utterances, " << corpus.enrollment.size()
      << " enrollment models, " << corpus.trials.size() << " trials -> " << a.out << "\n";
}

void RunFeatures(const FeaturesArgs& a, const Common& c, std::ostream& log) {
  RequireFile(a.manifest, "manifest");
  ValidateFrontEnd(a.front_end);
  if (a.out.empty()) throw InvalidInput("--out is required");
  const auto entries = corpus::ReadManifest(a.manifest);
  const auto source = MakeSource(a.manifest, "", a.front_end);
  const auto feats = trainer::LoadFeatures(entries, *source, c.EffectiveWorkers());
  EnsureDir(a.out);
  for (size_t i = 0; i < entries.size(); ++i) {
    dsp::WriteFeatureCache(trainer::CachedFeatureSource::PathFor(a.out, entries[i].utt_id), feats[i]);
  }
  log << "features: " << feats.size() << " matrices -> " << a.out << "\n";
}

void RunTrain(const TrainArgs& a, const Common& c, std::ostream& log) {
  RequireFile(a.manifest, "manifest");
  const trainer::TaskMode mode = trainer::ParseTaskMode(a.mode);
  const model::Width width = model::Width::Parse(a.width);
  trainer::TrainConfig config = a.config;
  config.workers = c.EffectiveWorkers();
  config.Validate();
  ValidateFrontEnd(a.front_end);
  if (a.out.empty()) throw InvalidInput("--out is required");

  std::vector<corpus::ManifestEntry> entries;
  const std::set<int> keep(a.sessions.begin(), a.sessions.end());
  for (auto& e : corpus::ReadManifest(a.manifest)) {
    if (keep.empty() || keep.count(e.session)) entries.push_back(std::move(e));
  }
  if (entries.empty()) throw InvalidInput("no manifest rows left for training");
  const auto labels = trainer::BuildLabelMap(entries, mode);
  model::ModelConfig mc;
  mc.n_out = labels.n_classes();
  mc.width = width;
  mc.seed = config.seed;
  mc.Validate();

  const auto source = MakeSource(a.manifest, a.features, a.front_end);
  const auto feats = trainer::LoadFeatures(entries, *source, config.workers);
  std::vector<trainer::LabeledExample> data;
  data.reserve(entries.size());
  for (size_t i = 0; i < entries.size(); ++i) data.push_back({&feats[i], labels.ClassOf(entries[i])});

  EnsureDir(a.out);
  log << "train: " << data.size() << " examples, " << labels.n_classes() << " classes ("
      << trainer::TaskModeName(mode) << "), width " << width.ToString() << "\n";
  std::string history = "epoch\tlr\tmean_loss\taccuracy\tseconds\n";
  model::LightCnn<float> net(mc);
  const auto stats = trainer::Train(net, data, config, [&](const trainer::EpochStats& s) {
    const std::string line = trainer::FormatEpochLine(s) + "\n";
    history += line;
    log << line << std::flush;
  });
  model::TrainingMetadata meta;
  meta.epochs = static_cast<uint32_t>(config.epochs);
  meta.final_loss = stats.back().mean_loss;
  meta.mode = trainer::TaskModeName(mode);
  meta.label_digest = labels.Digest();
  model::SaveCheckpoint((fs::path(a.out) / "model.vdck").string(), net, meta);
  WriteFileBytes((fs::path(a.out) / "train_log.tsv").string(), history);
  log << "train: checkpoint -> " << (fs::path(a.out) / "model.vdck").string() << "\n";
}

void RunEmbed(const EmbedArgs& a, const Common& c, std::ostream& log) {
  RequireFile(a.checkpoint, "checkpoint");
  RequireFile(a.manifest, "manifest");
  ValidateFrontEnd(a.front_end);
  if (a.out.empty()) throw InvalidInput("--out is required");
  auto loaded = model::LoadCheckpoint(a.checkpoint);
  const auto entries = corpus::ReadManifest(a.manifest);
  const auto source = MakeSource(a.manifest, a.features, a.front_end);
  const auto table = trainer::ExtractAllEmbeddings(loaded.model, entries, *source, c.EffectiveWorkers());
  EnsureParent(a.out);
  trainer::WriteEmbeddings(a.out, table);
  log << "embed: " << table.size() << " embeddings of dim " << loaded.model.config().embedding_dim()
      << " -> " << a.out << "\n";
}

void RunEnroll(const EnrollArgs& a, const Common&, std::ostream& log) {
  RequireFile(a.embeddings, "embeddings");
  RequireFile(a.enroll_list, "enrollment list");
  if (a.out.empty()) throw InvalidInput("--out is required");
  const auto table = trainer::ReadEmbeddings(a.embeddings);
  const auto records = corpus::ReadEnrollmentList(a.enroll_list);
  const auto models = verify::EnrollAll(records, table);
  for (const auto& [id, m] : models) {
    for (const auto& [digit, dm] : m.digits) {
      if (dm.below_canonical()) {
        log << "warning: model " << id << " digit " << digit << " enrolled from " << dm.sessions
            << " session(s), fewer than " << verify::kCanonicalSessions << "\n";
      }
    }
  }
  EnsureParent(a.out);
  WriteFileBytes(a.out, verify::SerializeEnrollment(models));
  log << "enroll: " << models.size() << " models -> " << a.out << "\n";
}

void RunScore(const ScoreArgs& a, const Common& c, std::ostream& log) {
  RequireFile(a.enrollment, "enrollment");
  RequireFile(a.embeddings, "embeddings");
  RequireFile(a.trials, "trials");
  if (a.out.empty()) throw InvalidInput("--out is required");
  const auto models = verify::ParseEnrollment(ReadFileBytes(a.enrollment), a.enrollment);
  const auto table = trainer::ReadEmbeddings(a.embeddings);
  const auto trials = corpus::ReadTrials(a.trials);
  const auto scores = verify::RunProtocol(trials, models, table, c.EffectiveWorkers());
  EnsureParent(a.out);
  WriteFileBytes(a.out, verify::SerializeScores(scores));
  log << "score: " << scores.size() << " trials -> " << a.out << "\n";
}

std::string FormatReport(const std::vector<EvalRow>& rows, const metrics::DcfParams& dcf) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "Operating point: P_tar = %g, C_miss = %g, C_fa = %g (normalized minDCF)\n",
                dcf.p_target, dcf.c_miss, dcf.c_fa);
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf),
                  "\nsystem: %s\n  trials: %zu target, %zu nontarget\n  EER:    %.3f %%\n  minDCF: %.4f\n",
                  r.system.c_str(), r.n_target, r.n_nontarget, 100.0 * r.eer, r.min_dcf);
    out += buf;
  }
  return out;
}

std::string FormatSummary(const std::vector<EvalRow>& rows) {
  std::string out = "system\teer_percent\tmin_dcf\tn_target\tn_nontarget\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "\t%.6f\t%.6f\t%zu\t%zu\n", 100.0 * r.eer, r.min_dcf, r.n_target,
                  r.n_nontarget);
    out += r.system + buf;
  }
  return out;
}

void RunEval(const EvalArgs& a, const Common&, std::ostream& out) {
  if (a.scores.empty()) throw InvalidInput("at least one --scores file is required");
  if (!a.names.empty() && a.names.size() != a.scores.size()) {
    throw InvalidInput("--name must be given once per --scores file");
  }
  metrics::ComputeMinDcf({{1.0}, {0.0}}, a.dcf);  // validates the operating point
  std::vector<EvalRow> rows;
  std::vector<std::vector<metrics::DetPoint>> dets;
  for (size_t i = 0; i < a.scores.size(); ++i) {
    RequireFile(a.scores[i], "score file");
    const auto records = verify::ReadScores(a.scores[i]);
    metrics::ScoreSet set;
    try {
      set = metrics::SplitByLabel(records);
    } catch (const InvalidInput& e) {
      throw InvalidInput(a.scores[i] + ": " + e.what());
    }
    EvalRow row;
    row.system = a.names.empty() ? Stem(a.scores[i]) : a.names[i];
    row.eer = metrics::ComputeEer(set).eer;
    row.min_dcf = metrics::ComputeMinDcf(set, a.dcf);
    row.n_target = set.target.size();
    row.n_nontarget = set.nontarget.size();
    rows.push_back(row);
    dets.push_back(metrics::DetCurve(set));
  }
  const std::string report = FormatReport(rows, a.dcf);
  out << report;
  if (!a.out.empty()) {
    EnsureDir(a.out);
    WriteFileBytes((fs::path(a.out) / "report.txt").string(), report);
    WriteFileBytes((fs::path(a.out) / "summary.tsv").string(), FormatSummary(rows));
    for (size_t i = 0; i < rows.size(); ++i) {
      WriteFileBytes((fs::path(a.out) / ("det_" + rows[i].system + ".tsv")).string(),
                     metrics::SerializeDet(dets[i]));
    }
  }
}

namespace {

struct SystemScores {
  std::vector<verify::ScoreRecord> records;  // trial layout, from the first file
  std::vector<std::vector<double>> scores;   // [system][trial]
};

SystemScores LoadSystems(const std::vector<std::string>& paths) {
  SystemScores out;
  for (const auto& path : paths) {
    RequireFile(path, "score file");
    auto recs = verify::ReadScores(path);
    if (out.scores.empty()) {
      out.records = recs;
    } else {
      if (recs.size() != out.records.size()) {
        throw InvalidInput(path + ": trial count differs from " + paths[0]);
      }
      for (size_t j = 0; j < recs.size(); ++j) {
        const auto& r = out.records[j];
        if (recs[j].model_id != r.model_id || recs[j].trial_index != r.trial_index || recs[j].label != r.label) {
          throw InvalidInput(path + ": trial " + std::to_string(j) + " does not match " + paths[0]);
        }
      }
    }
    std::vector<double> s;
    s.reserve(recs.size());
    for (const auto& r : recs) s.push_back(r.score);
    out.scores.push_back(std::move(s));
  }
  return out;
}

}  // namespace

void RunFuse(const FuseArgs& a, const Common&, std::ostream& log) {
  if (a.train.empty()) throw InvalidInput("at least one --train score file is required");
  if (!a.apply.empty() && a.apply.size() != a.train.size()) {
    throw InvalidInput("--apply needs one score file per --train file");
  }
  if (a.out.empty()) throw InvalidInput("--out is required");
  const SystemScores train = LoadSystems(a.train);
  std::vector<std::vector<double>> labeled(train.scores.size());
  std::vector<bool> is_target;
  for (size_t j = 0; j < train.records.size(); ++j) {
    const auto label = train.records[j].label;
    if (label == corpus::TrialLabel::kUnknown) continue;
    is_target.push_back(label == corpus::TrialLabel::kTarget);
    for (size_t i = 0; i < train.scores.size(); ++i) labeled[i].push_back(train.scores[i][j]);
  }
  const auto model = metrics::TrainFusion(labeled, is_target, a.options);
  const SystemScores target = a.apply.empty() ? train : LoadSystems(a.apply);
  const auto fused = metrics::ApplyFusion(model, target.scores);
  std::vector<verify::ScoreRecord> records = target.records;
  for (size_t j = 0; j < records.size(); ++j) {
    records[j].score = fused[j];
    records[j].sub_scores.clear();
  }
  EnsureDir(a.out);
  WriteFileBytes((fs::path(a.out) / "fusion_model.txt").string(), metrics::SerializeFusionModel(model));
  WriteFileBytes((fs::path(a.out) / "fused_scores.tsv").string(), verify::SerializeScores(records));
  log << "fuse: " << model.weights.size() << " systems, " << model.iterations
      << " iterations, gradient norm " << model.gradient_norm << "\n";
}

void RunTsne(const TsneArgs& a, const Common&, std::ostream& log) {
  RequireFile(a.embeddings, "embeddings");
  RequireFile(a.manifest, "manifest");
  if (a.out.empty()) throw InvalidInput("--out is required");
  const auto table = trainer::ReadEmbeddings(a.embeddings);
  const std::set<std::string> keep(a.speakers.begin(), a.speakers.end());
  std::vector<std::vector<float>> x;
  std::vector<metrics::TsneLabel> labels;
  for (const auto& e : corpus::ReadManifest(a.manifest)) {
    if (!keep.empty() && !keep.count(e.speaker_id)) continue;
    if (!table.Contains(e.utt_id)) continue;
    const auto v = table.Get(e.utt_id);
    x.emplace_back(v.begin(), v.end());
    labels.push_back({e.utt_id, e.speaker_id, e.digit});
  }
  if (x.empty()) throw InvalidInput("no embeddings selected for t-SNE");
  const auto result = metrics::TsneProject(x, a.options);
  EnsureDir(a.out);
  WriteFileBytes((fs::path(a.out) / "tsne.tsv").string(), metrics::TsneToTsv(result.coords, labels));
  WriteFileBytes((fs::path(a.out) / "tsne.svg").string(), metrics::TsneToSvg(result.coords, labels));
  log << "tsne: " << x.size() << " points";
  if (!result.kl_history.empty()) log << ", final KL " << result.kl_history.back();
  log << " -> " << a.out << "\n";
}

}  // namespace dsv::cli
