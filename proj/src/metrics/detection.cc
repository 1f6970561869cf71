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

#include "dsv/metrics/detection.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "dsv/common/error.h"

namespace dsv::metrics {

ScoreSet SplitByLabel(std::span<const verify::ScoreRecord> scores) {
  ScoreSet s;
  for (const auto& r : scores) {
    if (r.label == corpus::TrialLabel::kTarget) s.target.push_back(r.score);
    if (r.label == corpus::TrialLabel::kNontarget) s.nontarget.push_back(r.score);
  }
  if (s.target.empty() || s.nontarget.empty()) {
    throw InvalidInput("metrics need at least one target and one nontarget trial");
  }
  return s;
}

std::vector<OperatingPoint> SweepOperatingPoints(const ScoreSet& s) {
  if (s.target.empty() || s.nontarget.empty()) {
    throw InvalidInput("metrics need at least one target and one nontarget trial");
  }
  for (double v : s.target) {
    if (!std::isfinite(v)) throw InvalidInput("non-finite target score");
  }
  for (double v : s.nontarget) {
    if (!std::isfinite(v)) throw InvalidInput("non-finite nontarget score");
  }
  std::vector<double> tar = s.target, non = s.nontarget;
  std::sort(tar.begin(), tar.end());
  std::sort(non.begin(), non.end());
  std::vector<double> all = tar;
  all.insert(all.end(), non.begin(), non.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  const double nt = static_cast<double>(tar.size());
  const double nn = static_cast<double>(non.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<OperatingPoint> pts;
  pts.reserve(all.size() + 2);
  pts.push_back({-inf, 0.0, 1.0});
  size_t it = 0, in = 0;  // counts of scores strictly below the threshold
  for (double t : all) {
    while (it < tar.size() && tar[it] < t) ++it;
    while (in < non.size() && non[in] < t) ++in;
    pts.push_back({t, it / nt, (nn - in) / nn});
  }
  pts.push_back({inf, 1.0, 0.0});
  return pts;
}

EerResult ComputeEer(const ScoreSet& s) {
  const auto pts = SweepOperatingPoints(s);
  size_t j = 0;
  while (pts[j].p_miss - pts[j].p_fa < 0.0) ++j;  // terminates: last point has diff 1
  const double dj = pts[j].p_miss - pts[j].p_fa;
  if (dj == 0.0) return {pts[j].p_miss, pts[j].threshold};
  const auto& a = pts[j - 1];
  const auto& b = pts[j];
  const double da = a.p_miss - a.p_fa;
  const double alpha = -da / (dj - da);
  return {a.p_miss + alpha * (b.p_miss - a.p_miss), b.threshold};
}

double NormalizedDcf(double p_miss, double p_fa, const DcfParams& p) {
  const double miss_w = p.c_miss * p.p_target;
  const double fa_w = p.c_fa * (1.0 - p.p_target);
  return (miss_w * p_miss + fa_w * p_fa) / std::min(miss_w, fa_w);
}

double ComputeMinDcf(const ScoreSet& s, const DcfParams& p) {
  if (!(p.p_target > 0.0 && p.p_target < 1.0) || p.c_miss <= 0.0 || p.c_fa <= 0.0) {
    throw InvalidInput("DCF parameters must satisfy 0 < p_target < 1 and positive costs");
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& op : SweepOperatingPoints(s)) {
    best = std::min(best, NormalizedDcf(op.p_miss, op.p_fa, p));
  }
  return best;
}

std::vector<DetPoint> DetCurve(const ScoreSet& s) {
  std::vector<DetPoint> out;
  for (const auto& op : SweepOperatingPoints(s)) {
    if (!out.empty() && out.back().p_fa == op.p_fa && out.back().p_miss == op.p_miss) continue;
    out.push_back({op.p_fa, op.p_miss});
  }
  return out;
}

std::string SerializeDet(std::span<const DetPoint> det) {
  std::string out = "p_fa\tp_miss\n";
  char buf[64];
  for (const auto& d : det) {
    std::snprintf(buf, sizeof(buf), "%.9g\t%.9g\n", d.p_fa, d.p_miss);
    out += buf;
  }
  return out;
}

}  // namespace dsv::metrics
