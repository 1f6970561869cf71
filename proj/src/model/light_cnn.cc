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

#include "dsv/model/light_cnn.h"

#include <charconv>
#include <cmath>
#include <numeric>

#include "dsv/tensor/ops.h"

namespace dsv::model {

using tensor::Parameter;
using tensor::Shape;
using tensor::Tape;
using tensor::Tensor;
using tensor::Var;

namespace {

struct ConvGroup {
  const char* name;
  size_t kernel;
  size_t base_out;  // channels before MFM
  bool pool_after;
};

constexpr ConvGroup kConvGroups[] = {
    {"conv1", 7, 128, true},   {"conv2a", 1, 128, false}, {"conv2b", 5, 192, true},
    {"conv3a", 1, 192, false}, {"conv3b", 5, 256, true},  {"conv4a", 1, 256, false},
    {"conv4b", 3, 128, false}, {"conv5a", 1, 128, false}, {"conv5b", 3, 128, true},
};
constexpr size_t kFc1Base = 2048;

const char* MfmName(size_t group) {
  static const char* kNames[] = {"mfm1",  "mfm2a", "mfm2b", "mfm3a", "mfm3b",
                                 "mfm4a", "mfm4b", "mfm5a", "mfm5b"};
  return kNames[group];
}

uint32_t ParseU32(const std::string& s, const std::string& full) {
  uint32_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw InvalidInput("invalid width '" + full + "'");
  }
  return v;
}

}  // namespace

Width Width::Parse(const std::string& text) {
  Width w;
  if (auto slash = text.find('/'); slash != std::string::npos) {
    w.num = ParseU32(text.substr(0, slash), text);
    w.den = ParseU32(text.substr(slash + 1), text);
  } else {
    // Decimal: scale by powers of ten until integral.
    auto dot = text.find('.');
    std::string digits = text;
    uint32_t den = 1;
    if (dot != std::string::npos) {
      std::string frac = text.substr(dot + 1);
      while (!frac.empty() && frac.back() == '0') frac.pop_back();
      if (frac.size() > 6) throw InvalidInput("width '" + text + "' has too many decimals");
      digits = text.substr(0, dot) + frac;
      for (size_t i = 0; i < frac.size(); ++i) den *= 10;
    }
    if (digits.empty()) throw InvalidInput("invalid width '" + text + "'");
    w.num = ParseU32(digits, text);
    w.den = den;
  }
  if (w.den == 0 || w.num == 0 || w.num > w.den) {
    throw InvalidInput("width '" + text + "' must lie in (0, 1]");
  }
  const uint32_t g = std::gcd(w.num, w.den);
  w.num /= g;
  w.den /= g;
  return w;
}

std::string Width::ToString() const {
  return std::to_string(num) + "/" + std::to_string(den);
}

void ModelConfig::Validate() const {
  if (n_out < 2) throw InvalidInput("n_out must be >= 2, got " + std::to_string(n_out));
  if (width.den == 0 || width.num == 0 || width.num > width.den) {
    throw InvalidInput("width must lie in (0, 1], got " + width.ToString());
  }
}

size_t ModelConfig::Scaled(size_t base) const {
  const double c = static_cast<double>(base) * width.value();
  const auto even = static_cast<size_t>(2 * std::llround(c / 2.0));
  return std::max<size_t>(2, even);
}

Tensor<float> ToInputTensor(const dsp::FeatureMatrix& feat) {
  return Tensor<float>({static_cast<size_t>(feat.n_bands), static_cast<size_t>(feat.n_frames), 1},
                       feat.values);
}

Tensor<double> ToInputTensorF64(const dsp::FeatureMatrix& feat) {
  return Tensor<double>({static_cast<size_t>(feat.n_bands), static_cast<size_t>(feat.n_frames), 1},
                        std::vector<double>(feat.values.begin(), feat.values.end()));
}

template <typename T>
LightCnn<T>::LightCnn(const ModelConfig& config) : config_(config) {
  config_.Validate();
  Rng rng(config_.seed);
  size_t cin = 1;
  for (const ConvGroup& g : kConvGroups) {
    const size_t cout = config_.Scaled(g.base_out);
    AddConv(g.name, g.kernel, cin, cout, rng);
    cin = cout / 2;
  }
  // Four 2x2 poolings take 64x96 down to 4x6.
  const size_t flat = (ModelConfig::kInputBands / 16) * (ModelConfig::kInputFrames / 16) * cin;
  const size_t fc1 = config_.Scaled(kFc1Base);
  const size_t emb = fc1 / 2;
  auto uniform = [&](Shape shape, size_t fan_in) {
    Tensor<T> t(std::move(shape));
    const double bound = std::sqrt(3.0 / static_cast<double>(fan_in));
    for (T& v : t.data) v = static_cast<T>(rng.Uniform(-bound, bound));
    return t;
  };
  params_.emplace_back("fc1.weight", uniform({fc1, flat}, flat));
  params_.emplace_back("fc1.bias", Tensor<T>({fc1}));
  params_.emplace_back("fc2.weight",
                       uniform({static_cast<size_t>(config_.n_out), emb}, emb));
}

template <typename T>
void LightCnn<T>::AddConv(const std::string& name, size_t k, size_t cin, size_t cout, Rng& rng) {
  // Weight variance 1/fan_in. MFM keeps the second moment of its input, so
  // this holds activations near unit scale through the stack.
  const size_t fan_in = k * k * cin;
  const double bound = std::sqrt(3.0 / static_cast<double>(fan_in));
  Tensor<T> w({cout, k, k, cin});
  for (T& v : w.data) v = static_cast<T>(rng.Uniform(-bound, bound));
  params_.emplace_back(name + ".weight", std::move(w));
  params_.emplace_back(name + ".bias", Tensor<T>({cout}));
}

template <typename T>
Parameter<T>& LightCnn<T>::param(const std::string& name) {
  for (auto& p : params_) {
    if (p.name == name) return p;
  }
  throw InvalidInput("no parameter named '" + name + "'");
}

template <typename T>
Var LightCnn<T>::Forward(Tape<T>& tape, Var input, bool logits, std::vector<LayerShape>* trace) {
  const Shape expected{static_cast<size_t>(ModelConfig::kInputBands),
                       static_cast<size_t>(ModelConfig::kInputFrames), 1};
  if (tape.value(input).shape != expected) {
    throw InvalidInput("network input must be " + tensor::ShapeString(expected) + ", got " +
                       tensor::ShapeString(tape.value(input).shape));
  }
  auto note = [&](const std::string& name, Var v) {
    if (trace) trace->push_back({name, tape.value(v).shape});
  };
  Var x = input;
  size_t p = 0;
  int pool = 0;
  for (size_t g = 0; g < std::size(kConvGroups); ++g) {
    Var w = tape.Watch(params_[p++]);
    Var b = tape.Watch(params_[p++]);
    x = tensor::Conv2dSame(tape, x, w, b);
    note(kConvGroups[g].name, x);
    x = tensor::Mfm(tape, x);
    note(MfmName(g), x);
    if (kConvGroups[g].pool_after) {
      x = tensor::MaxPool2x2(tape, x);
      note("pool" + std::to_string(++pool), x);
    }
  }
  Var w1 = tape.Watch(params_[p++]);
  Var b1 = tape.Watch(params_[p++]);
  x = tensor::Dense(tape, x, w1, b1);
  note("fc1", x);
  x = tensor::Mfm(tape, x);
  note("mfm6", x);
  if (!logits) return x;
  Var w2 = tape.Watch(params_[p++]);
  x = tensor::Dense<T>(tape, x, w2, std::nullopt);
  note("fc2", x);
  return x;
}

template <typename T>
Var LightCnn<T>::Embedding(Tape<T>& tape, Var input, std::vector<LayerShape>* trace) {
  return Forward(tape, input, false, trace);
}

template <typename T>
Var LightCnn<T>::Logits(Tape<T>& tape, Var input, std::vector<LayerShape>* trace) {
  return Forward(tape, input, true, trace);
}

namespace {

void CheckInput(const dsp::FeatureMatrix& feat) {
  if (feat.n_bands != ModelConfig::kInputBands || feat.n_frames != ModelConfig::kInputFrames) {
    throw InvalidInput("feature matrix must be 64 x 96, got " + std::to_string(feat.n_bands) +
                       " x " + std::to_string(feat.n_frames));
  }
  if (!feat.normalized) throw InvalidInput("feature matrix is not mean/variance normalized");
}

template <typename T>
Tensor<T> InputFor(const dsp::FeatureMatrix& feat) {
  CheckInput(feat);
  if constexpr (std::is_same_v<T, float>) {
    return ToInputTensor(feat);
  } else {
    return ToInputTensorF64(feat);
  }
}

}  // namespace

template <typename T>
std::vector<T> LightCnn<T>::ForwardLogits(const dsp::FeatureMatrix& feat) {
  Tape<T> tape(false);
  return tape.value(Logits(tape, tape.Constant(InputFor<T>(feat)))).data;
}

template <typename T>
std::vector<T> LightCnn<T>::ForwardEmbedding(const dsp::FeatureMatrix& feat) {
  Tape<T> tape(false);
  return tape.value(Embedding(tape, tape.Constant(InputFor<T>(feat)))).data;
}

template <typename T>
std::vector<std::vector<T>> LightCnn<T>::ForwardLogitsBatch(
    std::span<const dsp::FeatureMatrix> batch) {
  std::vector<std::vector<T>> out;
  out.reserve(batch.size());
  for (const auto& feat : batch) out.push_back(ForwardLogits(feat));
  return out;
}

template <typename T>
std::vector<LayerShape> LightCnn<T>::TraceShapes() {
  Tape<T> tape(false);
  std::vector<LayerShape> trace;
  Var in = tape.Constant(Tensor<T>({static_cast<size_t>(ModelConfig::kInputBands),
                                    static_cast<size_t>(ModelConfig::kInputFrames), 1}));
  Logits(tape, in, &trace);
  return trace;
}

template <typename T>
std::vector<LayerParamCount> LightCnn<T>::CountParams() const {
  std::vector<LayerParamCount> out;
  for (const auto& p : params_) {
    const std::string layer = p.name.substr(0, p.name.find('.'));
    if (out.empty() || out.back().layer != layer) out.push_back({layer, 0});
    out.back().count += p.value.size();
  }
  return out;
}

template <typename T>
size_t LightCnn<T>::TotalParams() const {
  size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

template <typename T>
void LightCnn<T>::ZeroFinalLayer() {
  auto& w = param("fc2.weight").value.data;
  std::fill(w.begin(), w.end(), T(0));
}

template class LightCnn<float>;
template class LightCnn<double>;

}  // namespace dsv::model
