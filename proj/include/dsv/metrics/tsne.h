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

#ifndef DSV_METRICS_TSNE_H_
#define DSV_METRICS_TSNE_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace dsv::metrics {

struct TsneOptions {
  double perplexity = 30.0;
  int iterations = 1000;
  uint64_t seed = 7;
  double learning_rate = 200.0;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  int momentum_switch = 250;
  double exaggeration = 4.0;
  int exaggeration_iterations = 100;
  double init_sd = 1e-4;
  double perplexity_tolerance = 1e-5;
};

using Point2 = std::array<double, 2>;

struct TsneResult {
  std::vector<Point2> coords;
  // KL(P || Q) after each iteration past the exaggeration phase.
  std::vector<double> kl_history;
};

// Dense n x n row-major matrices.
// Symmetrized input affinities; each conditional row matches the perplexity.
std::vector<double> TsneAffinities(const std::vector<std::vector<float>>& x, double perplexity,
                                   double tolerance = 1e-5);
// Student-t output similarities.
std::vector<double> TsneSimilarities(const std::vector<Point2>& y);
double TsneKl(const std::vector<double>& p, const std::vector<Point2>& y);

// Exact t-SNE. After the exaggeration phase a step is kept only if it does
// not raise the KL divergence; otherwise the step is halved and momentum reset.
TsneResult TsneProject(const std::vector<std::vector<float>>& x, const TsneOptions& opts = {});

struct TsneLabel {
  std::string utt_id;
  std::string speaker_id;
  int digit;
};

// utt_id, x, y, speaker_id, digit with a header row.
std::string TsneToTsv(const std::vector<Point2>& coords, const std::vector<TsneLabel>& labels);
// Scatter colored by speaker, each point labeled with its digit.
std::string TsneToSvg(const std::vector<Point2>& coords, const std::vector<TsneLabel>& labels);

}  // namespace dsv::metrics

#endif  // DSV_METRICS_TSNE_H_
