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

#include "dsv/cli/cli.h"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <memory>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "cli/commands.h"
#include "dsv/common/binary_io.h"
#include "dsv/common/error.h"

namespace dsv::cli {
namespace fs = std::filesystem;

namespace {

struct Jobs {
  Common common;
  std::string config_path;  // consumed before parsing
  SynthArgs synth;
  FeaturesArgs features;
  TrainArgs train;
  EmbedArgs embed;
  EnrollArgs enroll;
  ScoreArgs score;
  EvalArgs eval;
  FuseArgs fuse;
  TsneArgs tsne;
};

struct Subcommand {
  CLI::App* app;
  std::function<void(std::ostream& out, std::ostream& err)> run;
  // Where the effective config is echoed; empty for none.
  std::function<std::string()> echo_dir;
};

void AddCommon(CLI::App* sub, Jobs& j) {
  Common& c = j.common;
  sub->add_option("--config", j.config_path,
                  "Read 'key = value' options from a file; command-line flags override it");
  sub->add_option("--workers", c.workers, "Worker threads for data-parallel stages")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_flag("--strict-deterministic", c.strict_deterministic,
                "Force a single worker everywhere");
}

void AddFrontEnd(CLI::App* sub, FrontEnd& fe) {
  sub->add_option("--frame-ms", fe.win_ms, "Analysis window length in ms")->capture_default_str();
  sub->add_option("--hop-ms", fe.hop_ms, "Frame hop in ms")->capture_default_str();
  sub->add_flag("--vad", fe.vad, "Trim each segment to its energy-VAD speech span");
}

std::string DirOf(const std::string& file) {
  const fs::path parent = fs::path(file).parent_path();
  return parent.empty() ? "." : parent.string();
}

std::vector<Subcommand> Build(CLI::App& app, Jobs& j) {
  std::vector<Subcommand> subs;
  Common& c = j.common;

  {
    auto* s = app.add_subcommand("synth", "Generate a synthetic spoken-digit corpus with protocol lists");
    auto& a = j.synth;
    s->add_option("--speakers", a.spec.n_speakers, "Number of speakers")->capture_default_str();
    s->add_option("--digits", a.spec.n_digits, "Number of digits (0..9)")->capture_default_str();
    s->add_option("--sessions", a.spec.sessions, "Sessions per speaker")->capture_default_str();
    s->add_option("--enroll-sessions", a.spec.enroll_sessions, "Leading sessions used for enrollment")
        ->capture_default_str();
    s->add_option("--seed", a.spec.seed, "Generator seed")->capture_default_str();
    s->add_option("--sample-rate", a.spec.sample_rate, "Sample rate in Hz")->capture_default_str();
    s->add_option("--min-duration", a.spec.min_duration_s, "Shortest digit in seconds")->capture_default_str();
    s->add_option("--max-duration", a.spec.max_duration_s, "Longest digit in seconds")->capture_default_str();
    s->add_option("--snr-db", a.spec.snr_db, "Additive noise SNR in dB")->capture_default_str();
    s->add_option("--passphrase-length", a.spec.passphrase_length, "Digits per trial passphrase")
        ->capture_default_str();
    s->add_option("--nontarget-ratio", a.spec.nontarget_per_target, "Nontarget trials per target trial")
        ->capture_default_str();
    s->add_option("--out", a.out, "Output directory")->required();
    AddCommon(s, j);
    subs.push_back({s, [&](std::ostream&, std::ostream& err) { RunSynth(a, c, err); },
                    [&] { return a.out; }});
  }
  {
    auto* s = app.add_subcommand("features", "Compute normalized log-mel feature caches");
    auto& a = j.features;
    s->add_option("--manifest", a.manifest, "Manifest (JSON lines)")->required();
    s->add_option("--out", a.out, "Output directory for .vdft files")->required();
    AddFrontEnd(s, a.front_end);
    AddCommon(s, j);
    subs.push_back({s, [&](std::ostream&, std::ostream& err) { RunFeatures(a, c, err); },
                    [&] { return a.out; }});
  }
  {
    auto* s = app.add_subcommand("train", "Train the Light-CNN classifier");
    auto& a = j.train;
    s->add_option("--manifest", a.manifest, "Training manifest (JSON lines)")->required();
    s->add_option("--features", a.features, "Feature cache directory (default: read audio)");
    s->add_option("--out", a.out, "Output directory for model.vdck and train_log.tsv")->required();
    s->add_option("--mode", a.mode, "multitask (speaker x digit) or single-task (speaker)")
        ->capture_default_str();
    s->add_option("--width", a.width, "Channel width multiplier in (0, 1], e.g. 0.25 or 1/4")
        ->capture_default_str();
    s->add_option("--train-sessions", a.sessions, "Comma-separated sessions to train on (default: all)")
        ->delimiter(',');
    s->add_option("--epochs", a.config.epochs, "Training epochs")->capture_default_str();
    s->add_option("--batch-size", a.config.batch_size, "Minibatch size")->capture_default_str();
    s->add_option("--lr", a.config.lr0, "Initial learning rate")->capture_default_str();
    s->add_option("--lr-gamma", a.config.gamma, "Learning-rate decay factor")->capture_default_str();
    s->add_option("--lr-period", a.config.period, "Epochs between decays")->capture_default_str();
    s->add_option("--momentum", a.config.momentum, "SGD momentum")->capture_default_str();
    s->add_option("--clip-norm", a.config.clip_norm, "Global gradient-norm clip (0 disables)")
        ->capture_default_str();
    s->add_option("--seed", a.config.seed, "Seed for initialization and shuffling")->capture_default_str();
    AddFrontEnd(s, a.front_end);
    AddCommon(s, j);
    subs.push_back({s, [&](std::ostream&, std::ostream& err) { RunTrain(a, c, err); },
                    [&] { return a.out; }});
  }
  {
    auto* s = app.add_subcommand("embed", "Extract embeddings with a trained checkpoint");
    auto& a = j.embed;
    s->add_option("--checkpoint", a.checkpoint, "Model checkpoint (.vdck)")->required();
    s->add_option("--manifest", a.manifest, "Utterances to embed (JSON lines)")->required();
    s->add_option("--features", a.features, "Feature cache directory (default: read audio)");
    s->add_option("--out", a.out, "Output embedding table (.vdem)")->required();
    AddFrontEnd(s, a.front_end);
    AddCommon(s, j);
    subs.push_back({s, [&](std::ostream&, std::ostream& err) { RunEmbed(a, c, err); },
                    [&] { return DirOf(a.out); }});
  }
  {
    auto* s = app.add_subcommand("enroll", "Average enrollment embeddings per model and digit");
    auto& a = j.enroll;
    s->add_option("--embeddings", a.embeddings, "Embedding table (.vdem)")->required();
    s->add_option("--enroll-list", a.enroll_list, "Enrollment list (model_id TAB digit:utt,...)")->required();
    s->add_option("--out", a.out, "Output enrollment models (JSON lines)")->required();
    AddCommon(s, j);
    subs.push_back({s, [&](std::ostream&, std::ostream& err) { RunEnroll(a, c, err); },
                    [&] { return DirOf(a.out); }});
  }
  {
    auto* s = app.add_subcommand("score", "Score passphrase trials by per-digit cosine similarity");
    auto& a = j.score;
    s->add_option("--enrollment", a.enrollment, "Enrollment models (JSON lines)")->required();
    s->add_option("--embeddings", a.embeddings, "Embedding table (.vdem)")->required();
    s->add_option("--trials", a.trials, "Trial list")->required();
    s->add_option("--out", a.out, "Output score file")->required();
    AddCommon(s, j);
    subs.push_back({s, [&](std::ostream&, std::ostream& err) { RunScore(a, c, err); },
                    [&] { return DirOf(a.out); }});
  }
  {
    auto* s = app.add_subcommand("eval", "Report EER, minDCF and DET curves for score files");
    auto& a = j.eval;
    s->add_option("--scores", a.scores, "Score file; repeat for several systems")->required();
    s->add_option("--name", a.names, "System name per score file (default: file stem)");
    s->add_option("--out", a.out, "Directory for report.txt, summary.tsv and det_*.tsv");
    s->add_option("--p-target", a.dcf.p_target, "Target prior for minDCF")->capture_default_str();
    s->add_option("--c-miss", a.dcf.c_miss, "Miss cost for minDCF")->capture_default_str();
    s->add_option("--c-fa", a.dcf.c_fa, "False-alarm cost for minDCF")->capture_default_str();
    AddCommon(s, j);
    subs.push_back({s, [&](std::ostream& out, std::ostream&) { RunEval(a, c, out); },
                    [&] { return a.out; }});
  }
  {
    auto* s = app.add_subcommand("fuse", "Train and apply logistic-regression score fusion");
    auto& a = j.fuse;
    s->add_option("--train", a.train, "Labeled score file per system (same trial list)")->required();
    s->add_option("--apply", a.apply, "Score file per system to fuse (default: the --train files)");
    s->add_option("--out", a.out, "Directory for fusion_model.txt and fused_scores.tsv")->required();
    s->add_option("--prior", a.options.prior, "Effective target prior")->capture_default_str();
    s->add_option("--max-iterations", a.options.max_iterations, "Gradient-descent iteration cap")
        ->capture_default_str();
    s->add_option("--tolerance", a.options.gradient_tolerance, "Stop when the gradient norm falls below this")
        ->capture_default_str();
    AddCommon(s, j);
    subs.push_back({s, [&](std::ostream&, std::ostream& err) { RunFuse(a, c, err); },
                    [&] { return a.out; }});
  }
  {
    auto* s = app.add_subcommand("tsne", "Project embeddings to 2-D with exact t-SNE");
    auto& a = j.tsne;
    s->add_option("--embeddings", a.embeddings, "Embedding table (.vdem)")->required();
    s->add_option("--manifest", a.manifest, "Manifest providing speaker and digit labels")->required();
    s->add_option("--speakers", a.speakers, "Comma-separated speakers to include (default: all)")
        ->delimiter(',');
    s->add_option("--out", a.out, "Directory for tsne.tsv and tsne.svg")->required();
    s->add_option("--perplexity", a.options.perplexity, "Target perplexity")->capture_default_str();
    s->add_option("--iterations", a.options.iterations, "Gradient-descent iterations")->capture_default_str();
    s->add_option("--seed", a.options.seed, "Seed for the initial layout")->capture_default_str();
    s->add_option("--learning-rate", a.options.learning_rate, "Learning rate")->capture_default_str();
    AddCommon(s, j);
    subs.push_back({s, [&](std::ostream&, std::ostream& err) { RunTsne(a, c, err); },
                    [&] { return a.out; }});
  }
  return subs;
}

void EchoConfig(const CLI::App& sub, const std::string& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::string text = "# effective configuration of '" + sub.get_name() + "'\n";
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "config" || name == "help") continue;
    std::string value;
    if (opt->get_items_expected_max() == 0) {
      value = opt->count() > 0 ? "true" : "false";
    } else if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    } else {
      value = opt->get_default_str();
    }
    text += name + " = " + value + "\n";
  }
  WriteFileBytes((fs::path(dir) / (sub.get_name() + ".config")).string(), text);
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool OnCommandLine(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

// Rewrites "<sub> ... --config FILE ..." into flags: every "key = value"
// line becomes "--key value" unless the flag is already given.
std::vector<std::string> ExpandConfig(std::vector<std::string> args, CLI::App& app) {
  if (args.size() < 2) return args;
  CLI::App* sub = nullptr;
  for (CLI::App* s : app.get_subcommands({})) {
    if (s->get_name() == args[1]) sub = s;
  }
  if (sub == nullptr) return args;
  std::string path;
  for (size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::string text;
  try {
    text = ReadFileBytes(path);
  } catch (const std::exception& e) {
    throw InvalidInput("cannot read config '" + path + "': " + e.what());
  }
  std::vector<std::string> injected;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidInput(where + "expected 'key = value'");
    const std::string raw_key = Trim(line.substr(0, eq));
    std::string key = raw_key;
    std::string value = Trim(line.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string flag = "--" + key;
    const CLI::Option* opt = nullptr;
    for (const CLI::Option* o : sub->get_options()) {
      for (const auto& l : o->get_lnames()) {
        if (l == key) opt = o;
      }
    }
    if (opt == nullptr || key == "config" || key == "help") {
      throw InvalidInput(where + "unknown key '" + raw_key + "' for '" + sub->get_name() + "'");
    }
    if (OnCommandLine(args, flag)) continue;
    if (opt->get_items_expected_max() == 0) {
      if (value == "true" || value == "1" || value == "yes" || value == "on") {
        injected.push_back(flag);
      } else if (!(value == "false" || value == "0" || value == "no" || value == "off")) {
        throw InvalidInput(where + "'" + key + "' expects true or false");
      }
      continue;
    }
    injected.push_back(flag);
    injected.push_back(value);
  }
  args.insert(args.begin() + 2, injected.begin(), injected.end());
  return args;
}

void Configure(CLI::App& app) {
  app.require_subcommand(1, 1);
  app.fallthrough(false);
}

}  // namespace

int Dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Jobs jobs;
  CLI::App app{"dsv: text-prompted speaker verification toolkit", "dsv"};
  Configure(app);
  auto subs = Build(app, jobs);
  std::vector<std::string> args(argv, argv + argc);
  try {
    args = ExpandConfig(std::move(args), app);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  std::vector<const char*> expanded;
  for (const auto& a : args) expanded.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(expanded.size()), expanded.data());
  } catch (const CLI::CallForHelp&) {
    CLI::App* target = &app;
    for (auto& s : subs) {
      if (s.app->parsed()) target = s.app;
    }
    out << target->help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    CLI::App* target = &app;
    for (auto& s : subs) {
      if (s.app->parsed()) target = s.app;
    }
    err << target->help();
    return kExitInvalid;
  }
  try {
    for (auto& s : subs) {
      if (!s.app->parsed()) continue;
      s.run(out, err);
      EchoConfig(*s.app, s.echo_dir());
    }
    return kExitOk;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

std::vector<std::string> SubcommandNames() {
  Jobs jobs;
  CLI::App app;
  std::vector<std::string> names;
  for (const auto& s : Build(app, jobs)) names.push_back(s.app->get_name());
  return names;
}

std::vector<std::string> SubcommandFlags(const std::string& subcommand) {
  Jobs jobs;
  CLI::App app;
  for (const auto& s : Build(app, jobs)) {
    if (s.app->get_name() != subcommand) continue;
    std::vector<std::string> flags;
    for (const CLI::Option* opt : s.app->get_options()) {
      for (const auto& lname : opt->get_lnames()) flags.push_back("--" + lname);
    }
    return flags;
  }
  throw InvalidInput("unknown subcommand '" + subcommand + "'");
}

}  // namespace dsv::cli
