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
#include <map>
#include <string>
#include <vector>

#include "doctest.h"

#include "dsv/common/random.h"
#include "dsv/model/checkpoint.h"
#include "dsv/model/light_cnn.h"
#include "dsv/tensor/ops.h"

namespace dsv::model {
namespace {

dsp::FeatureMatrix RandomInput(uint64_t seed) {
  Rng rng(seed);
  dsp::FeatureMatrix f;
  f.n_bands = dsp::kNumBands;
  f.n_frames = dsp::kNumFrames;
  f.values.resize(static_cast<size_t>(f.n_bands) * f.n_frames);
  for (float& v : f.values) v = static_cast<float>(rng.Normal(0.0, 1.0));
  f.normalized = true;
  return f;
}

ModelConfig Config(const std::string& width, int n_out, uint64_t seed = 3) {
  ModelConfig c;
  c.width = Width::Parse(width);
  c.n_out = n_out;
  c.seed = seed;
  return c;
}

TEST_CASE("width parsing and scaling") {
  CHECK(Width::Parse("0.25") == Width::Parse("1/4"));
  CHECK(Width::Parse("1").value() == 1.0);
  CHECK_THROWS_AS(Width::Parse("0"), InvalidInput);
  CHECK_THROWS_AS(Width::Parse("1.5"), InvalidInput);
  CHECK_THROWS_AS(Width::Parse("abc"), InvalidInput);
  auto c = Config("0.25", 10);
  CHECK(c.Scaled(128) == 32);
  CHECK(c.Scaled(192) == 48);
  CHECK(c.Scaled(2048) == 512);
  CHECK(c.embedding_dim() == 256);
  CHECK(Config("0.001", 10).Scaled(128) == 2);
  CHECK(Config("1", 10).embedding_dim() == 1024);
  ModelConfig bad = Config("1", 1);
  CHECK_THROWS_AS(bad.Validate(), InvalidInput);
}

TEST_CASE("width 1 reproduces every layer shape of the reference table") {
  LightCnn<float> net(Config("1", 7));
  const std::map<std::string, tensor::Shape> want = {
      {"conv1", {64, 96, 128}}, {"mfm1", {64, 96, 64}},   {"pool1", {32, 48, 64}},
      {"conv2a", {32, 48, 128}}, {"mfm2a", {32, 48, 64}}, {"conv2b", {32, 48, 192}},
      {"mfm2b", {32, 48, 96}},  {"pool2", {16, 24, 96}},  {"conv3a", {16, 24, 192}},
      {"mfm3a", {16, 24, 96}},  {"conv3b", {16, 24, 256}}, {"mfm3b", {16, 24, 128}},
      {"pool3", {8, 12, 128}},  {"conv4a", {8, 12, 256}},  {"mfm4a", {8, 12, 128}},
      {"conv4b", {8, 12, 128}}, {"mfm4b", {8, 12, 64}},    {"conv5a", {8, 12, 128}},
      {"mfm5a", {8, 12, 64}},   {"conv5b", {8, 12, 128}},  {"mfm5b", {8, 12, 64}},
      {"pool4", {4, 6, 64}},    {"fc1", {2048}},           {"mfm6", {1024}},
      {"fc2", {7}}};
  const auto trace = net.TraceShapes();
  CHECK(trace.size() == want.size());
  for (const auto& l : trace) {
    INFO(l.name);
    REQUIRE(want.count(l.name) == 1);
    CHECK(l.shape == want.at(l.name));
  }
}

TEST_CASE("parameter counts") {
  LightCnn<float> net(Config("1", 200));
  std::map<std::string, size_t> per;
  for (const auto& c : net.CountParams()) per[c.layer] = c.count;
  CHECK(per["conv1"] == 6400);
  CHECK(per["conv2a"] == 8320);
  CHECK(per["conv2b"] == 307392);
  CHECK(per["conv3a"] == 18624);
  CHECK(per["conv3b"] == 614656);
  CHECK(per["conv4a"] == 33024);
  CHECK(per["conv4b"] == 147584);
  CHECK(per["conv5a"] == 8320);
  CHECK(per["conv5b"] == 73856);
  CHECK(per["fc1"] == 3147776);
  CHECK(per["fc2"] == 1024 * 200);
  CHECK(net.TotalParams() == 4365952 + 1024 * 200);
  size_t stored = 0;
  for (const auto& p : net.params()) stored += p.value.data.size();
  CHECK(stored == net.TotalParams());
}

TEST_CASE("width 0.25 shapes are consistent") {
  LightCnn<float> net(Config("0.25", 12));
  const auto trace = net.TraceShapes();
  std::map<std::string, tensor::Shape> got;
  for (const auto& l : trace) got[l.name] = l.shape;
  CHECK(got["conv1"] == tensor::Shape{64, 96, 32});
  CHECK(got["pool4"] == tensor::Shape{4, 6, 16});
  CHECK(got["fc1"] == tensor::Shape{512});
  CHECK(got["mfm6"] == tensor::Shape{256});
  CHECK(got["fc2"] == tensor::Shape{12});
  CHECK(net.ForwardEmbedding(RandomInput(1)).size() == 256);
}

TEST_CASE("input validation") {
  LightCnn<float> net(Config("0.25", 4));
  auto f = RandomInput(2);
  f.normalized = false;
  CHECK_THROWS_AS(net.ForwardLogits(f), InvalidInput);
  auto g = RandomInput(2);
  g.n_frames = 95;
  g.values.resize(64 * 95);
  CHECK_THROWS_AS(net.ForwardEmbedding(g), InvalidInput);
}

TEST_CASE("zeroed final layer gives zero logits") {
  LightCnn<float> net(Config("0.25", 5));
  net.ZeroFinalLayer();
  for (float v : net.ForwardLogits(RandomInput(4))) CHECK(v == 0.0f);
}

TEST_CASE("batch forward equals per-item forward") {
  LightCnn<float> net(Config("0.25", 6));
  std::vector<dsp::FeatureMatrix> batch = {RandomInput(5), RandomInput(6), RandomInput(7)};
  const auto out = net.ForwardLogitsBatch(batch);
  REQUIRE(out.size() == 3);
  for (size_t i = 0; i < 3; ++i) CHECK(out[i] == net.ForwardLogits(batch[i]));
}

TEST_CASE("permuting fc2 rows permutes logits") {
  LightCnn<float> net(Config("0.25", 4));
  const auto x = RandomInput(8);
  const auto before = net.ForwardLogits(x);
  auto& w = net.param("fc2.weight").value;
  const size_t d = w.shape[1];
  std::vector<float> swapped(w.data);
  std::copy(w.data.begin(), w.data.begin() + d, swapped.begin() + 3 * d);
  std::copy(w.data.begin() + 3 * d, w.data.begin() + 4 * d, swapped.begin());
  w.data = swapped;
  const auto after = net.ForwardLogits(x);
  CHECK(after[0] == before[3]);
  CHECK(after[3] == before[0]);
  CHECK(after[1] == before[1]);
}

TEST_CASE("embedding is independent of the final layer and of n_out") {
  LightCnn<float> net(Config("0.25", 20, 11));
  const auto x = RandomInput(9);
  const auto emb = net.ForwardEmbedding(x);
  CHECK(emb == net.ForwardEmbedding(x));
  Rng rng(99);
  for (float& v : net.param("fc2.weight").value.data) v = static_cast<float>(rng.Normal(0.0, 1.0));
  CHECK(net.ForwardEmbedding(x) == emb);
  LightCnn<float> other(Config("0.25", 200, 11));
  CHECK(other.ForwardEmbedding(x) == emb);

}

TEST_CASE("logits are the final layer applied to the embedding") {
  LightCnn<double> net(Config("0.25", 9, 13));
  const auto x = RandomInput(10);
  const auto emb = net.ForwardEmbedding(x);
  const auto logits = net.ForwardLogits(x);
  const auto& w = net.param("fc2.weight").value;
  for (size_t k = 0; k < logits.size(); ++k) {
    double s = 0.0;
    for (size_t j = 0; j < emb.size(); ++j) s += w.data[k * emb.size() + j] * emb[j];
    CHECK(std::abs(logits[k] - s) < 1e-6);
  }
}

TEST_CASE("full network gradient matches finite differences at width 0.25") {
  LightCnn<double> net(Config("0.25", 6, 21));
  const auto input = ToInputTensorF64(RandomInput(21));
  const size_t label = 2;
  auto loss_of = [&]() {
    tensor::Tape<double> tape(false);
    return tape.value(tensor::SoftmaxXent(tape, net.Logits(tape, tape.Constant(input)), label)).data[0];
  };
  tensor::Tape<double> tape;
  tape.Backward(tensor::SoftmaxXent(tape, net.Logits(tape, tape.Constant(input)), label));
  Rng rng(5);
  double worst = 0.0;
  std::string worst_at;
  for (auto& p : net.params()) {
    const std::vector<double>* g = tape.ParameterGrad(p);
    REQUIRE(g != nullptr);
    for (int s = 0; s < 4; ++s) {
      const size_t i = rng.Index(p.value.data.size());
      const double orig = p.value.data[i];
      const double h = 1e-5;
      p.value.data[i] = orig + h;
      const double up = loss_of();
      p.value.data[i] = orig - h;
      const double down = loss_of();
      p.value.data[i] = orig;
      const double numeric = (up - down) / (2 * h);
      const double err = std::abs((*g)[i] - numeric) / std::max({std::abs((*g)[i]), std::abs(numeric), 1e-8});
      if (err > worst) {
        worst = err;
        worst_at = p.name + "[" + std::to_string(i) + "]";
      }
    }
  }
  INFO("worst at " << worst_at);
  CHECK(worst < 1e-4);
}

TEST_CASE("checkpoint round trip is byte identical") {
  LightCnn<float> net(Config("0.25", 8, 5));
  TrainingMetadata meta{30, 0.125, "multitask", "0123456789abcdef"};
  const std::string bytes = EncodeCheckpoint(net, meta);
  auto loaded = DecodeCheckpoint(bytes, "mem");
  CHECK(loaded.metadata == meta);
  CHECK(loaded.model.config() == net.config());
  for (size_t i = 0; i < net.params().size(); ++i) {
    CHECK(loaded.model.params()[i].value.data == net.params()[i].value.data);
  }
  CHECK(EncodeCheckpoint(loaded.model, loaded.metadata) == bytes);
}

TEST_CASE("checkpoint corruption is detected") {
  LightCnn<float> net(Config("0.25", 8, 5));
  const std::string bytes = EncodeCheckpoint(net, {});
  auto kind_of = [](const std::string& b, std::optional<ModelConfig> expected = std::nullopt) {
    try {
      DecodeCheckpoint(b, "mem", expected);
    } catch (const CheckpointError& e) {
      return e.kind();
    }
    FAIL("no error");
    return CheckpointError::Kind::kFormat;
  };
  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x01;
  CHECK(kind_of(flipped) == CheckpointError::Kind::kChecksum);
  CHECK(kind_of(bytes.substr(0, 6)) == CheckpointError::Kind::kTruncated);
  CHECK(kind_of(bytes.substr(0, bytes.size() - 10)) == CheckpointError::Kind::kChecksum);
  std::string magic = bytes;
  magic[0] = 'X';
  CHECK(kind_of(magic) == CheckpointError::Kind::kFormat);
  std::string version = bytes;
  version[4] = 9;
  CHECK(kind_of(version) == CheckpointError::Kind::kVersion);
  CHECK(kind_of(bytes, Config("1", 8, 5)) == CheckpointError::Kind::kShapeMismatch);
  CHECK_NOTHROW(DecodeCheckpoint(bytes, "mem", Config("1/4", 8, 5)));
}

}  // namespace
}  // namespace dsv::model
