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

#ifndef DSV_TRAINER_TRAINER_H_
#define DSV_TRAINER_TRAINER_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dsv/dsp/features.h"
#include "dsv/model/light_cnn.h"

namespace dsv::trainer {

struct TrainConfig {
  int epochs = 30;
  int batch_size = 32;
  double lr0 = 0.01;
  double gamma = 0.5;
  int period = 10;
  double momentum = 0.9;
  // Rescales the batch gradient when its global L2 norm exceeds this; 0 disables.
  double clip_norm = 20.0;
  uint64_t seed = 7;
  // Per-sample forward/backward passes of a batch run on this many threads.
  // Gradients are reduced in sample order, so results do not depend on it.
  int workers = 1;

  void Validate() const;
};

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
  double accuracy = 0.0;
  double lr = 0.0;
  double seconds = 0.0;
};

// Tab-separated: epoch, lr, mean_loss, accuracy, seconds.
std::string FormatEpochLine(const EpochStats& stats);

struct LabeledExample {
  const dsp::FeatureMatrix* features;
  int label;
};

using EpochCallback = std::function<void(const EpochStats&)>;

// Minibatch momentum SGD on mean softmax cross entropy. Each epoch reshuffles
// with the seeded generator and keeps the last partial batch. The learning
// rate follows LearningRateAt(epoch, lr0, gamma, period). Throws
// RuntimeFailure if the loss becomes non-finite.
std::vector<EpochStats> Train(model::LightCnn<float>& net, std::span<const LabeledExample> data,
                              const TrainConfig& config, const EpochCallback& on_epoch = nullptr);

}  // namespace dsv::trainer

#endif  // DSV_TRAINER_TRAINER_H_
