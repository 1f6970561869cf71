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


#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"

#include "dsv/common/error.h"
#include "dsv/common/random.h"
#include "dsv/tensor/optim.h"
#include "dsv/trainer/embeddings.h"
#include "dsv/trainer/feature_source.h"
#include "dsv/trainer/label_map.h"
#include "dsv/trainer/trainer.h"

namespace dsv::trainer {
namespace {

using corpus::ManifestEntry;

dsp::FeatureMatrix RandomFeatures(uint64_t seed) {
  Rng rng(seed);
  dsp::FeatureMatrix f(dsp::kNumBands, dsp::kNumFrames);
  for (float& v : f.values) v = static_cast<float>(rng.Normal());
  f.normalized = true;
  return f;
}

ManifestEntry Entry(const std::string& spk, int digit, int session = 0) {
  ManifestEntry e;
  e.speaker_id = spk;
  e.digit = digit;
  e.session = session;
  e.utt_id = spk + "_s" + std::to_string(session) + "_d" + std::to_string(digit);
  e.path = e.utt_id + ".wav";
  return e;
}

class MemorySource : public FeatureSource {
 public:
  void Put(const std::string& id, dsp::FeatureMatrix f) { table_[id] = std::move(f); }
  dsp::FeatureMatrix Get(const ManifestEntry& e) const override {
    auto it = table_.find(e.utt_id);
    if (it == table_.end()) throw InvalidInput("no features for " + e.utt_id);
    return it->second;
  }

 private:
  std::map<std::string, dsp::FeatureMatrix> table_;
};

model::ModelConfig TinyConfig(int n_out) {
  model::ModelConfig mc;
  mc.n_out = n_out;
  mc.width = model::Width::Parse("1/48");
  mc.seed = 3;
  return mc;
}

TEST_CASE("label map examples") {
  std::vector<ManifestEntry> m;
  for (const char* s : {"spk_d", "spk_a", "spk_c", "spk_b"}) {
    for (int d = 0; d < 10; ++d) m.push_back(Entry(s, d));
  }
  const LabelMap mt = BuildLabelMap(m, TaskMode::kMultitask);
  const LabelMap st = BuildLabelMap(m, TaskMode::kSingleTask);
  CHECK(mt.speakers() == std::vector<std::string>{"spk_a", "spk_b", "spk_c", "spk_d"});
  CHECK(mt.ClassOf(0, 0) == 0);
  CHECK(mt.ClassOf(3, 7) == 37);
  CHECK(st.ClassOf(3, 7) == 3);
  CHECK(st.ClassOf(3, 0) == 3);
  CHECK(mt.n_classes() == 40);
  CHECK(st.n_classes() == 4);
  CHECK(mt.ClassOf(Entry("spk_c", 4)) == 24);
  CHECK(st.ClassOf(Entry("spk_c", 4)) == 2);
}

TEST_CASE("label map is a bijection in both modes") {
  std::vector<ManifestEntry> m;
  for (int s = 0; s < 7; ++s) {
    for (int d = 0; d < 10; ++d) m.push_back(Entry("s" + std::to_string(s), d));
  }
  for (TaskMode mode : {TaskMode::kMultitask, TaskMode::kSingleTask}) {
    const LabelMap lm = BuildLabelMap(m, mode);
    std::set<int> seen;
    for (const auto& e : m) seen.insert(lm.ClassOf(e));
    CHECK(static_cast<int>(seen.size()) == lm.n_classes());
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == lm.n_classes() - 1);
    for (int c = 0; c < lm.n_classes(); ++c) {
      const auto [spk, digit] = lm.Decode(c);
      if (mode == TaskMode::kMultitask) {
        CHECK(spk == c / 10);
        CHECK(digit == c % 10);
        CHECK(lm.ClassOf(spk, digit) == c);
      } else {
        CHECK(spk == c);
        CHECK(digit == -1);
      }
    }
  }
}

TEST_CASE("label map errors and digest") {
  std::vector<ManifestEntry> m = {Entry("a", 1), Entry("b", 2)};
  CHECK_THROWS_AS(BuildLabelMap(std::vector<ManifestEntry>{}, TaskMode::kMultitask), InvalidInput);
  auto bad = m;
  bad[1].digit = 10;
  CHECK_THROWS_AS(BuildLabelMap(bad, TaskMode::kMultitask), InvalidInput);
  bad[1].digit = -1;
  CHECK_THROWS_AS(BuildLabelMap(bad, TaskMode::kSingleTask), InvalidInput);
  const LabelMap lm = BuildLabelMap(m, TaskMode::kMultitask);
  CHECK_THROWS_AS(lm.SpeakerIndex("zz"), InvalidInput);
  CHECK_THROWS_AS(lm.Decode(20), InvalidInput);
  CHECK(lm.Digest().size() == 16);
  CHECK(lm.Digest() == BuildLabelMap(m, TaskMode::kMultitask).Digest());
  CHECK(lm.Digest() != BuildLabelMap(m, TaskMode::kSingleTask).Digest());
  CHECK(ParseTaskMode("multitask") == TaskMode::kMultitask);
  CHECK(ParseTaskMode("single-task") == TaskMode::kSingleTask);
  CHECK_THROWS_AS(ParseTaskMode("both"), InvalidInput);
}

TEST_CASE("train config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.Validate());
  c.batch_size = 0;
  CHECK_THROWS_AS(c.Validate(), InvalidInput);
  c = {};
  c.epochs = 0;
  CHECK_THROWS_AS(c.Validate(), InvalidInput);
  c = {};
  c.lr0 = 0.0;
  CHECK_THROWS_AS(c.Validate(), InvalidInput);
  c = {};
  c.clip_norm = -1.0;
  CHECK_THROWS_AS(c.Validate(), InvalidInput);
  CHECK(TrainConfig{}.batch_size == 32);
  CHECK(TrainConfig{}.period == 10);
}

TEST_CASE("epoch line format") {
  EpochStats s;
  s.epoch = 4;
  s.lr = 0.005;
  s.mean_loss = 1.25;
  s.accuracy = 0.5;
  s.seconds = 2.0;
  CHECK(FormatEpochLine(s) == "4\t0.005\t1.250000000\t0.500000\t2.000");
}

TEST_CASE("single sample is memorized") {
  model::LightCnn<float> net(TinyConfig(4));
  const dsp::FeatureMatrix f = RandomFeatures(11);
  const std::vector<LabeledExample> data = {{&f, 2}};
  TrainConfig c;
  c.epochs = 200;
  c.gamma = 1.0;
  const auto hist = Train(net, data, c);
  REQUIRE(hist.size() == 200);
  CHECK(hist.back().mean_loss < 0.01);
  CHECK(hist.back().accuracy == 1.0);
}

struct SmallSet {
  std::vector<dsp::FeatureMatrix> feats;
  std::vector<LabeledExample> data;
  explicit SmallSet(int n, int n_classes) {
    for (int i = 0; i < n; ++i) feats.push_back(RandomFeatures(100 + i));
    for (int i = 0; i < n; ++i) data.push_back({&feats[i], i % n_classes});
  }
};

TEST_CASE("training is deterministic and independent of worker count") {
  SmallSet set(11, 3);
  TrainConfig c;
  c.epochs = 3;
  c.batch_size = 4;
  c.period = 1;
  std::vector<std::vector<EpochStats>> runs;
  std::vector<std::vector<tensor::Parameter<float>>> params;
  for (int workers : {1, 1, 3}) {
    model::LightCnn<float> net(TinyConfig(3));
    c.workers = workers;
    runs.push_back(Train(net, set.data, c));
    params.push_back(net.params());
  }
  for (size_t r = 1; r < runs.size(); ++r) {
    REQUIRE(runs[r].size() == runs[0].size());
    for (size_t e = 0; e < runs[0].size(); ++e) {
      CHECK(runs[r][e].epoch == runs[0][e].epoch);
      CHECK(runs[r][e].lr == runs[0][e].lr);
      CHECK(runs[r][e].mean_loss == runs[0][e].mean_loss);
      CHECK(runs[r][e].accuracy == runs[0][e].accuracy);
    }
    for (size_t p = 0; p < params[0].size(); ++p) {
      CHECK(params[r][p].value.data == params[0][p].value.data);
    }
  }
}

TEST_CASE("training does not depend on heap layout") {
  SmallSet set(12, 3);
  TrainConfig c;
  c.epochs = 2;
  c.batch_size = 4;
  std::vector<std::vector<tensor::Parameter<float>>> params;
  for (int junk : {0, 1, 2, 3, 5, 8}) {
    // Unrelated live allocations shift where the training buffers land.
    std::vector<std::unique_ptr<char[]>> held;
    for (int i = 0; i < junk; ++i) held.emplace_back(new char[24 + 40 * i]);
    model::ModelConfig mc = TinyConfig(3);
    mc.width = model::Width::Parse("1/4");
    model::LightCnn<float> net(mc);
    Train(net, set.data, c);
    params.push_back(net.params());
  }
  for (size_t r = 1; r < params.size(); ++r) {
    for (size_t p = 0; p < params[0].size(); ++p) {
      CHECK_MESSAGE(params[r][p].value.data == params[0][p].value.data, params[0][p].name);
    }
  }
}

TEST_CASE("epoch learning rates follow the step schedule") {
  SmallSet set(3, 2);
  TrainConfig c;
  c.epochs = 7;
  c.lr0 = 0.02;
  c.gamma = 0.5;
  c.period = 2;
  model::LightCnn<float> net(TinyConfig(2));
  std::vector<EpochStats> seen;
  const auto hist = Train(net, set.data, c, [&](const EpochStats& s) { seen.push_back(s); });
  REQUIRE(hist.size() == 7);
  REQUIRE(seen.size() == 7);
  for (int e = 0; e < 7; ++e) {
    CHECK(hist[e].epoch == e);
    CHECK(hist[e].lr == tensor::LearningRateAt(e, 0.02, 0.5, 2));
    CHECK(hist[e].lr == 0.02 * std::pow(0.5, e / 2));
    CHECK(std::isfinite(hist[e].mean_loss));
    // The partial batch is trained on, so accuracy is a count over all samples.
    const double hits = hist[e].accuracy * 3.0;
    CHECK(hits == doctest::Approx(std::round(hits)));
  }
}

TEST_CASE("shuffle is a permutation") {
  Rng rng(DeriveSeed(7, 1));
  std::vector<size_t> order(97);
  std::iota(order.begin(), order.end(), 0);
  for (int round = 0; round < 5; ++round) {
    rng.Shuffle(std::span<size_t>(order));
    std::vector<size_t> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i);
  }
}

TEST_CASE("training rejects bad inputs") {
  SmallSet set(2, 2);
  model::LightCnn<float> net(TinyConfig(2));
  TrainConfig c;
  c.epochs = 1;
  CHECK_THROWS_AS(Train(net, std::vector<LabeledExample>{}, c), InvalidInput);
  auto bad = set.data;
  bad[0].label = 2;
  CHECK_THROWS_AS(Train(net, bad, c), InvalidInput);
  bad[0].label = -1;
  CHECK_THROWS_AS(Train(net, bad, c), InvalidInput);
}

TEST_CASE("divergent learning rate aborts with a diagnostic") {
  SmallSet set(4, 2);
  model::LightCnn<float> net(TinyConfig(2));
  TrainConfig c;
  c.epochs = 20;
  c.batch_size = 2;
  c.lr0 = 1e8;
  c.gamma = 1.0;
  CHECK_THROWS_AS(Train(net, set.data, c), RuntimeFailure);
}

TEST_CASE("gradient clipping bounds the first update") {
  SmallSet set(4, 2);
  model::LightCnn<float> before(TinyConfig(2));
  model::LightCnn<float> net(TinyConfig(2));
  TrainConfig c;
  c.epochs = 1;
  c.batch_size = 4;
  c.momentum = 0.0;
  c.lr0 = 0.5;
  c.clip_norm = 1e-3;
  Train(net, set.data, c);
  double sq = 0.0;
  for (size_t p = 0; p < net.params().size(); ++p) {
    const auto& a = net.params()[p].value.data;
    const auto& b = before.params()[p].value.data;
    for (size_t i = 0; i < a.size(); ++i) sq += (double(a[i]) - b[i]) * (double(a[i]) - b[i]);
  }
  CHECK(std::sqrt(sq) <= 0.5 * 1e-3 * (1.0 + 1e-4));
  CHECK(std::sqrt(sq) > 0.0);
}

TEST_CASE("embedding extraction covers the manifest and ignores worker count") {
  MemorySource src;
  std::vector<ManifestEntry> m;
  for (int s = 0; s < 3; ++s) {
    for (int d = 0; d < 3; ++d) {
      m.push_back(Entry("spk" + std::to_string(s), d));
      src.Put(m.back().utt_id, RandomFeatures(40 + m.size()));
    }
  }
  model::LightCnn<float> net(TinyConfig(5));
  const EmbeddingTable serial = ExtractAllEmbeddings(net, m, src, 1);
  const EmbeddingTable parallel = ExtractAllEmbeddings(net, m, src, 4);
  CHECK(serial.size() == m.size());
  CHECK(serial.dim() == net.config().embedding_dim());
  CHECK(serial == parallel);
  CHECK(serial == ExtractAllEmbeddings(net, m, src, 1));
  for (size_t i = 0; i < m.size(); ++i) CHECK(serial.ids()[i] == m[i].utt_id);

  auto missing = m;
  missing.push_back(Entry("ghost", 0));
  CHECK_THROWS_AS(ExtractAllEmbeddings(net, missing, src, 1), InvalidInput);
}

TEST_CASE("embedding cache round trip and errors") {
  EmbeddingTable t(3);
  t.Add("u1", {1.0f, -2.0f, 0.5f});
  t.Add("u2", {0.0f, 3.25f, -1.0f});
  CHECK_THROWS_AS(t.Add("u1", {1.0f, 1.0f, 1.0f}), InvalidInput);
  CHECK_THROWS_AS(t.Add("u3", {1.0f}), InvalidInput);
  CHECK_THROWS_AS(t.Get("u9"), InvalidInput);
  const std::string bytes = EncodeEmbeddings(t);
  CHECK(bytes.substr(0, 4) == "VDEM");
  CHECK(DecodeEmbeddings(bytes, "mem") == t);
  CHECK_THROWS_AS(DecodeEmbeddings("XXXX" + bytes.substr(4), "mem"), InvalidInput);
  CHECK_THROWS_AS(DecodeEmbeddings(bytes.substr(0, bytes.size() - 2), "mem"), InvalidInput);

  const auto path = std::filesystem::temp_directory_path() / "dsv_trainer_test.vdem";
  WriteEmbeddings(path.string(), t);
  CHECK(ReadEmbeddings(path.string()) == t);
  std::filesystem::remove(path);
}

TEST_CASE("feature loading and digest") {
  MemorySource src;
  std::vector<ManifestEntry> m = {Entry("a", 0), Entry("a", 1), Entry("b", 0)};
  for (size_t i = 0; i < m.size(); ++i) src.Put(m[i].utt_id, RandomFeatures(i));
  const auto f1 = LoadFeatures(m, src, 1);
  const auto f3 = LoadFeatures(m, src, 3);
  CHECK(f1 == f3);
  CHECK(FeatureDigest(f1) == FeatureDigest(f3));
  auto changed = f1;
  changed[2].values[5] += 1.0f;
  CHECK(FeatureDigest(changed) != FeatureDigest(f1));
}

}  // namespace
}  // namespace dsv::trainer
