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

#ifndef DSV_TENSOR_GRAD_CHECK_H_
#define DSV_TENSOR_GRAD_CHECK_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dsv/tensor/tape.h"

namespace dsv::tensor {

struct GradCheckOptions {
  double step = 1e-5;
  // Minimum spacing between sampled input values, so max-type ops keep the
  // same winner under a +-step perturbation.
  double tie_margin = 1e-3;
  // Coordinates checked per input; 0 checks all of them.
  size_t max_coords_per_input = 0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  size_t coords_checked = 0;
  std::string worst;  // "input[i] coordinate j"
};

// Builds a graph from leaf inputs. Non-scalar outputs are reduced with a
// fixed random projection before differentiation.
using GraphFn = std::function<Var(Tape<double>&, std::span<const Var>)>;

// Central differences against the tape gradient. Error per coordinate is
// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
GradCheckResult GradCheck(const GraphFn& graph, std::span<const Tensor<double>> inputs,
                          uint64_t seed, const GradCheckOptions& opts = {});

// Samples inputs of the given shapes (values spaced by at least tie_margin,
// in random order) and runs GradCheck.
GradCheckResult GradCheck(const GraphFn& graph, std::span<const Shape> input_shapes,
                          uint64_t seed, const GradCheckOptions& opts = {});

Tensor<double> SampleTieFree(const Shape& shape, uint64_t seed, double margin);

}  // namespace dsv::tensor

#endif  // DSV_TENSOR_GRAD_CHECK_H_
