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

#ifndef DSV_METRICS_DETECTION_H_
#define DSV_METRICS_DETECTION_H_

#include <span>
#include <string>
#include <vector>

#include "dsv/verify/scoring.h"

namespace dsv::metrics {

struct ScoreSet {
  std::vector<double> target;
  std::vector<double> nontarget;
};

// Splits labeled scores; unknown-label trials are dropped. Throws when either
// class ends up empty.
ScoreSet SplitByLabel(std::span<const verify::ScoreRecord> scores);

struct DcfParams {
  double p_target = 0.01;
  double c_miss = 10.0;
  double c_fa = 1.0;
};

// Accept when score >= threshold.
struct OperatingPoint {
  double threshold;
  double p_miss;  // fraction of targets below threshold
  double p_fa;    // fraction of nontargets at or above threshold
};

// Thresholds at -inf, every distinct score in ascending order, then +inf.
std::vector<OperatingPoint> SweepOperatingPoints(const ScoreSet& s);

struct EerResult {
  double eer;
  double threshold;  // threshold of the first sweep point with p_miss >= p_fa
};

// Linear interpolation between the two sweep points that bracket
// p_miss == p_fa.
EerResult ComputeEer(const ScoreSet& s);

double NormalizedDcf(double p_miss, double p_fa, const DcfParams& p);
double ComputeMinDcf(const ScoreSet& s, const DcfParams& p = {});

struct DetPoint {
  double p_fa;
  double p_miss;
};

// Operating points from (1, 0) to (0, 1); consecutive duplicates removed.
std::vector<DetPoint> DetCurve(const ScoreSet& s);
std::string SerializeDet(std::span<const DetPoint> det);

}  // namespace dsv::metrics

#endif  // DSV_METRICS_DETECTION_H_
