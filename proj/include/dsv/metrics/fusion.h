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

#ifndef DSV_METRICS_FUSION_H_
#define DSV_METRICS_FUSION_H_

#include <span>
#include <string>
#include <vector>

namespace dsv::metrics {

struct FusionOptions {
  double prior = 0.01;
  int max_iterations = 10000;
  double gradient_tolerance = 1e-8;
};

struct FusionModel {
  std::vector<double> weights;  // one per system
  double offset = 0.0;
  double prior = 0.01;
  int iterations = 0;
  double gradient_norm = 0.0;
};

// Prior-weighted linear logistic regression. system_scores[i][j] is the
// score of system i on trial j; is_target[j] labels trial j. Optimized by
// gradient descent with a backtracking line search.
FusionModel TrainFusion(const std::vector<std::vector<double>>& system_scores,
                        const std::vector<bool>& is_target, const FusionOptions& opts = {});

// Objective minimized by TrainFusion, for tests.
double FusionObjective(const std::vector<std::vector<double>>& system_scores,
                       const std::vector<bool>& is_target, std::span<const double> weights,
                       double offset, double prior);

// fused_j = offset + sum_i weights[i] * system_scores[i][j].
std::vector<double> ApplyFusion(const FusionModel& model,
                                const std::vector<std::vector<double>>& system_scores);

// Plain text: "prior <p>", "offset <w0>", "weight <w_i>" lines.
std::string SerializeFusionModel(const FusionModel& model);
FusionModel ParseFusionModel(const std::string& text, const std::string& name);

}  // namespace dsv::metrics

#endif  // DSV_METRICS_FUSION_H_
