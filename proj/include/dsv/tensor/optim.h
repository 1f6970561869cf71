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

#ifndef DSV_TENSOR_OPTIM_H_
#define DSV_TENSOR_OPTIM_H_

#include <cmath>
#include <span>

#include "dsv/tensor/tensor.h"

namespace dsv::tensor {

// Momentum SGD: v = momentum * v - lr * g; w += v; then zero g.
// Throws if any parameter has no populated gradient.
template <typename T>
void SgdStep(std::span<Parameter<T>> params, double lr, double momentum = 0.9) {
  for (const Parameter<T>& p : params) {
    if (!p.has_grad) throw InvalidInput("SgdStep: parameter '" + p.name + "' has no gradient");
  }
  for (Parameter<T>& p : params) {
    for (size_t i = 0; i < p.value.size(); ++i) {
      p.velocity[i] = static_cast<T>(momentum * p.velocity[i] - lr * p.grad[i]);
      p.value.data[i] += p.velocity[i];
    }
    p.ZeroGrad();
  }
}

// Multiplicative step decay: lr0 * gamma^floor(epoch / period).
inline double LearningRateAt(int epoch, double lr0, double gamma, int period = 10) {
  if (epoch < 0) throw InvalidInput("LearningRateAt: negative epoch");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidInput("LearningRateAt: gamma must be in (0, 1]");
  if (period < 1) throw InvalidInput("LearningRateAt: period must be >= 1");
  return lr0 * std::pow(gamma, epoch / period);
}

}  // namespace dsv::tensor

#endif  // DSV_TENSOR_OPTIM_H_
