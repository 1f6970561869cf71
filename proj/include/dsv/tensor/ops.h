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

#ifndef DSV_TENSOR_OPS_H_
#define DSV_TENSOR_OPS_H_

#include <optional>

#include "dsv/tensor/tape.h"

namespace dsv::tensor {

// Stride-1 cross-correlation with (k-1)/2 zero padding on each side.
//   x: [H, W, Cin]   weights: [Cout, k, k, Cin]   bias: [Cout]
//   -> [H, W, Cout]
template <typename T>
Var Conv2dSame(Tape<T>& tape, Var x, Var weights, Var bias);

// Non-overlapping 2x2 max pooling over [H, W, C] with even H and W. The
// gradient goes to the first maximal cell in row-major window order.
template <typename T>
Var MaxPool2x2(Tape<T>& tape, Var x);

// Max-Feature-Map over the last axis: out[..., k] = max(x[..., k], x[..., k + N/2]).
// Ties route the gradient to the first half.
template <typename T>
Var Mfm(Tape<T>& tape, Var x);

// out = W * flatten(x) (+ b). weights: [m, n].
template <typename T>
Var Dense(Tape<T>& tape, Var x, Var weights, std::optional<Var> bias);

// log-sum-exp(logits) - logits[label], stabilized by max subtraction.
template <typename T>
Var SoftmaxXent(Tape<T>& tape, Var logits, size_t label);

template <typename T>
Var Sum(Tape<T>& tape, Var x);

// sum_i weights[i] * x[i] with constant weights.
template <typename T>
Var WeightedSum(Tape<T>& tape, Var x, const Tensor<T>& weights);

template <typename T>
Var Scale(Tape<T>& tape, Var x, T factor);

template <typename T>
Var Add(Tape<T>& tape, Var a, Var b);

template <typename T>
Var Reshape(Tape<T>& tape, Var x, Shape shape);

// Softmax probabilities of a logit vector (no tape).
template <typename T>
std::vector<T> Softmax(const std::vector<T>& logits);

}  // namespace dsv::tensor

#endif  // DSV_TENSOR_OPS_H_
