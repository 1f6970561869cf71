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

#ifndef DSV_MODEL_LIGHT_CNN_H_
#define DSV_MODEL_LIGHT_CNN_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dsv/common/random.h"
#include "dsv/dsp/features.h"
#include "dsv/tensor/tape.h"

namespace dsv::model {

// Channel multiplier kept as an exact fraction so checkpoints round-trip.
struct Width {
  uint32_t num = 1;
  uint32_t den = 1;

  double value() const { return static_cast<double>(num) / den; }
  // Accepts decimals ("0.25") and fractions ("1/4"); must lie in (0, 1].
  static Width Parse(const std::string& text);
  std::string ToString() const;
  bool operator==(const Width& o) const {
    return static_cast<uint64_t>(num) * o.den == static_cast<uint64_t>(o.num) * den;
  }
};

struct ModelConfig {
  int n_out = 2;
  Width width;
  uint64_t seed = 0;

  static constexpr int kInputBands = dsp::kNumBands;
  static constexpr int kInputFrames = dsp::kNumFrames;

  void Validate() const;
  // base channel count scaled by width, rounded to the nearest even >= 2.
  size_t Scaled(size_t base) const;
  size_t embedding_dim() const { return Scaled(2048) / 2; }
  bool operator==(const ModelConfig&) const = default;
};

struct LayerShape {
  std::string name;
  tensor::Shape shape;
};

struct LayerParamCount {
  std::string layer;
  size_t count;
};

// Max-Feature-Map light CNN. Layer groups, in order:
//   conv1 7x7   -> MFM -> pool
//   conv2a 1x1  -> MFM -> conv2b 5x5 -> MFM -> pool
//   conv3a 1x1  -> MFM -> conv3b 5x5 -> MFM -> pool
//   conv4a 1x1  -> MFM -> conv4b 3x3 -> MFM
//   conv5a 1x1  -> MFM -> conv5b 3x3 -> MFM -> pool
//   fc1 -> MFM (embedding) -> fc2 (no bias, class logits)
// Flattening before fc1 is frequency-major, then time, then channel.
template <typename T>
class LightCnn {
 public:
  explicit LightCnn(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  std::vector<tensor::Parameter<T>>& params() { return params_; }
  const std::vector<tensor::Parameter<T>>& params() const { return params_; }
  tensor::Parameter<T>& param(const std::string& name);

  // Graph building on a caller-owned tape. `input` must be [64, 96, 1].
  tensor::Var Embedding(tensor::Tape<T>& tape, tensor::Var input,
                        std::vector<LayerShape>* trace = nullptr);
  tensor::Var Logits(tensor::Tape<T>& tape, tensor::Var input,
                     std::vector<LayerShape>* trace = nullptr);

  // Inference helpers. Inputs must be normalized 64 x 96 feature matrices.
  std::vector<T> ForwardLogits(const dsp::FeatureMatrix& feat);
  std::vector<T> ForwardEmbedding(const dsp::FeatureMatrix& feat);
  std::vector<std::vector<T>> ForwardLogitsBatch(std::span<const dsp::FeatureMatrix> batch);

  // Output shape of every layer for a zero input, in network order.
  std::vector<LayerShape> TraceShapes();
  std::vector<LayerParamCount> CountParams() const;
  size_t TotalParams() const;

  void ZeroFinalLayer();

 private:
  void AddConv(const std::string& name, size_t k, size_t cin, size_t cout, Rng& rng);
  tensor::Var Forward(tensor::Tape<T>& tape, tensor::Var input, bool logits,
                      std::vector<LayerShape>* trace);

  ModelConfig config_;
  std::vector<tensor::Parameter<T>> params_;
};

tensor::Tensor<float> ToInputTensor(const dsp::FeatureMatrix& feat);
tensor::Tensor<double> ToInputTensorF64(const dsp::FeatureMatrix& feat);

extern template class LightCnn<float>;
extern template class LightCnn<double>;

}  // namespace dsv::model

#endif  // DSV_MODEL_LIGHT_CNN_H_
