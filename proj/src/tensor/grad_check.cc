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

#include "dsv/tensor/grad_check.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dsv/common/random.h"
#include "dsv/tensor/ops.h"

namespace dsv::tensor {

namespace {

// Evaluates the graph once; returns the scalar loss and, if requested, the
// gradient of every input.
double Evaluate(const GraphFn& graph, std::span<const Tensor<double>> inputs,
                uint64_t seed, std::vector<std::vector<double>>* grads) {
  Tape<double> tape;
  std::vector<Var> leaves;
  leaves.reserve(inputs.size());
  for (const Tensor<double>& in : inputs) leaves.push_back(tape.Leaf(in));
  Var out = graph(tape, leaves);
  if (tape.value(out).size() != 1) {
    Rng rng(DeriveSeed(seed, 0xfeed));
    Tensor<double> proj(tape.value(out).shape);
    for (double& v : proj.data) v = rng.Uniform(-1.0, 1.0);
    out = WeightedSum(tape, out, proj);
  }
  const double loss = tape.value(out).data[0];
  if (grads) {
    tape.Backward(out);
    grads->clear();
    for (Var leaf : leaves) {
      if (!tape.requires_grad(leaf)) {
        grads->emplace_back(tape.value(leaf).size(), 0.0);
        continue;
      }
      auto& g = tape.MutableGrad(leaf);
      grads->push_back(g);
    }
  }
  return loss;
}

}  // namespace

Tensor<double> SampleTieFree(const Shape& shape, uint64_t seed, double margin) {
  Tensor<double> t(shape);
  const size_t n = t.size();
  if (n == 0) return t;
  const double spacing = std::max(2.0 / static_cast<double>(n), 2.0 * margin);
  std::vector<size_t> rank(n);
  std::iota(rank.begin(), rank.end(), 0);
  Rng rng(seed);
  rng.Shuffle(std::span<size_t>(rank));
  for (size_t i = 0; i < n; ++i) {
    t.data[i] = (static_cast<double>(rank[i]) - n / 2.0) * spacing +
                rng.Uniform(-0.25, 0.25) * spacing;
  }
  return t;
}

GradCheckResult GradCheck(const GraphFn& graph, std::span<const Tensor<double>> inputs,
                          uint64_t seed, const GradCheckOptions& opts) {
  std::vector<std::vector<double>> analytic;
  Evaluate(graph, inputs, seed, &analytic);

  std::vector<Tensor<double>> work(inputs.begin(), inputs.end());
  GradCheckResult result;
  Rng pick(DeriveSeed(seed, 0xc0de));
  for (size_t i = 0; i < work.size(); ++i) {
    std::vector<size_t> coords(work[i].size());
    std::iota(coords.begin(), coords.end(), 0);
    if (opts.max_coords_per_input > 0 && coords.size() > opts.max_coords_per_input) {
      pick.Shuffle(std::span<size_t>(coords));
      coords.resize(opts.max_coords_per_input);
      std::sort(coords.begin(), coords.end());
    }
    for (size_t j : coords) {
      const double orig = work[i].data[j];
      work[i].data[j] = orig + opts.step;
      const double up = Evaluate(graph, work, seed, nullptr);
      work[i].data[j] = orig - opts.step;
      const double down = Evaluate(graph, work, seed, nullptr);
      work[i].data[j] = orig;
      const double numeric = (up - down) / (2.0 * opts.step);
      const double a = analytic[i][j];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double err = std::abs(a - numeric) / denom;
      ++result.coords_checked;
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst = "input[" + std::to_string(i) + "] coordinate " + std::to_string(j);
      }
    }
  }
  return result;
}

GradCheckResult GradCheck(const GraphFn& graph, std::span<const Shape> input_shapes,
                          uint64_t seed, const GradCheckOptions& opts) {
  std::vector<Tensor<double>> inputs;
  for (size_t i = 0; i < input_shapes.size(); ++i) {
    inputs.push_back(SampleTieFree(input_shapes[i], DeriveSeed(seed, i), opts.tie_margin));
  }
  return GradCheck(graph, inputs, seed, opts);
}

}  // namespace dsv::tensor
