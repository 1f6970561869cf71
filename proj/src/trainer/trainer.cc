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

#include "dsv/trainer/trainer.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "dsv/common/error.h"
#include "dsv/common/parallel.h"
#include "dsv/common/random.h"
#include "dsv/tensor/ops.h"
#include "dsv/tensor/optim.h"

namespace dsv::trainer {

void TrainConfig::Validate() const {
  if (epochs < 1) throw InvalidInput("epochs must be >= 1");
  if (batch_size < 1) throw InvalidInput("batch size must be >= 1");
  if (!(lr0 > 0.0)) throw InvalidInput("learning rate must be > 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidInput("lr decay gamma must be in (0, 1]");
  if (period < 1) throw InvalidInput("lr decay period must be >= 1");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidInput("momentum must be in [0, 1)");
  if (!(clip_norm >= 0.0) || !std::isfinite(clip_norm)) throw InvalidInput("clip norm must be >= 0");
  if (workers < 1) throw InvalidInput("workers must be >= 1");
}

std::string FormatEpochLine(const EpochStats& s) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d\t%.9g\t%.9f\t%.6f\t%.3f", s.epoch, s.lr, s.mean_loss,
                s.accuracy, s.seconds);
  return buf;
}

namespace {

struct SampleResult {
  std::vector<std::vector<float>> grads;  // per parameter
  double loss = 0.0;
  bool correct = false;
};

void RunSample(model::LightCnn<float>& net, const LabeledExample& ex, float weight,
               SampleResult* out) {
  tensor::Tape<float> tape;
  tensor::Var input = tape.Constant(model::ToInputTensor(*ex.features));
  tensor::Var logits = net.Logits(tape, input);
  const auto& lv = tape.value(logits).data;
  if (ex.label < 0 || static_cast<size_t>(ex.label) >= lv.size()) {
    throw InvalidInput("class " + std::to_string(ex.label) + " out of range for " +
                       std::to_string(lv.size()) + " outputs");
  }
  const size_t argmax = std::max_element(lv.begin(), lv.end()) - lv.begin();
  tensor::Var loss = tensor::SoftmaxXent(tape, logits, static_cast<size_t>(ex.label));
  out->loss = tape.value(loss).data[0];
  out->correct = argmax == static_cast<size_t>(ex.label);
  tape.Backward(tensor::Scale(tape, loss, weight));
  const auto& params = net.params();
  out->grads.resize(params.size());
  for (size_t p = 0; p < params.size(); ++p) {
    const std::vector<float>* g = tape.ParameterGrad(params[p]);
    if (g) {
      out->grads[p] = *g;
    } else {
      out->grads[p].assign(params[p].value.size(), 0.0f);
    }
  }
}

void ClipGradients(std::vector<tensor::Parameter<float>>& params, double max_norm) {
  double sq = 0.0;
  for (const auto& p : params) {
    for (float g : p.grad) sq += static_cast<double>(g) * g;
  }
  const double norm = std::sqrt(sq);
  if (!(norm > max_norm)) return;
  const float factor = static_cast<float>(max_norm / norm);
  for (auto& p : params) {
    for (float& g : p.grad) g *= factor;
  }
}

}  // namespace

std::vector<EpochStats> Train(model::LightCnn<float>& net, std::span<const LabeledExample> data,
                              const TrainConfig& config, const EpochCallback& on_epoch) {
  config.Validate();
  if (data.empty()) throw InvalidInput("training set is empty");
  const int n_out = net.config().n_out;
  for (const auto& ex : data) {
    if (ex.label < 0 || ex.label >= n_out) {
      throw InvalidInput("class " + std::to_string(ex.label) + " out of range for a model with " +
                         std::to_string(n_out) + " outputs");
    }
  }

  auto& params = net.params();
  Rng rng(DeriveSeed(config.seed, 0x7261696eULL));
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<SampleResult> results(static_cast<size_t>(config.batch_size));
  std::vector<EpochStats> history;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const double lr = tensor::LearningRateAt(epoch, config.lr0, config.gamma, config.period);
    rng.Shuffle(std::span<size_t>(order));
    double loss_sum = 0.0;
    size_t correct = 0;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t n = std::min(order.size() - start, static_cast<size_t>(config.batch_size));
      const float weight = 1.0f / static_cast<float>(n);
      ParallelFor(n, config.workers, [&](size_t i) {
        RunSample(net, data[order[start + i]], weight, &results[i]);
      });
      for (size_t p = 0; p < params.size(); ++p) {
        auto& g = params[p].grad;
        std::fill(g.begin(), g.end(), 0.0f);
        for (size_t i = 0; i < n; ++i) {
          const auto& gi = results[i].grads[p];
          for (size_t j = 0; j < g.size(); ++j) g[j] += gi[j];
        }
        params[p].has_grad = true;
      }
      if (config.clip_norm > 0.0) ClipGradients(params, config.clip_norm);
      for (size_t i = 0; i < n; ++i) {
        if (!std::isfinite(results[i].loss)) {
          throw RuntimeFailure("non-finite training loss at epoch " + std::to_string(epoch) +
                               " (learning rate " + std::to_string(lr) + " too high?)");
        }
        loss_sum += results[i].loss;
        correct += results[i].correct ? 1 : 0;
      }
      tensor::SgdStep(std::span(params), lr, config.momentum);
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.lr = lr;
    stats.mean_loss = loss_sum / static_cast<double>(data.size());
    stats.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    history.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return history;
}

}  // namespace dsv::trainer
