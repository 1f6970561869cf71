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

#include "dsv/metrics/fusion.h"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "dsv/common/error.h"

namespace dsv::metrics {
namespace {

double Softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void CheckInputs(const std::vector<std::vector<double>>& scores, const std::vector<bool>& is_target) {
  if (scores.empty()) throw InvalidInput("fusion needs at least one system");
  for (const auto& s : scores) {
    if (s.size() != is_target.size()) throw InvalidInput("fusion: score and label counts differ");
    for (double v : s) {
      if (!std::isfinite(v)) throw InvalidInput("fusion: non-finite score");
    }
  }
  size_t nt = 0;
  for (bool t : is_target) nt += t ? 1 : 0;
  if (nt == 0 || nt == is_target.size()) {
    throw InvalidInput("fusion: labels are degenerate (need both targets and nontargets)");
  }
}

// Parameters are packed as [w_1 .. w_k, w0].
struct Objective {
  const std::vector<std::vector<double>>& scores;
  const std::vector<bool>& is_target;
  double prior;
  double tar_w, non_w, logit;

  Objective(const std::vector<std::vector<double>>& s, const std::vector<bool>& t, double p)
      : scores(s), is_target(t), prior(p) {
    size_t nt = 0;
    for (bool b : t) nt += b ? 1 : 0;
    tar_w = p / static_cast<double>(nt);
    non_w = (1.0 - p) / static_cast<double>(t.size() - nt);
    logit = std::log(p / (1.0 - p));
  }

  double Eval(const std::vector<double>& x, std::vector<double>* grad) const {
    const size_t k = scores.size();
    if (grad) grad->assign(k + 1, 0.0);
    double f = 0.0;
    for (size_t j = 0; j < is_target.size(); ++j) {
      double a = x[k] + logit;
      for (size_t i = 0; i < k; ++i) a += x[i] * scores[i][j];
      double g;  // d loss_j / d a
      if (is_target[j]) {
        f += tar_w * Softplus(-a);
        g = -tar_w * Sigmoid(-a);
      } else {
        f += non_w * Softplus(a);
        g = non_w * Sigmoid(a);
      }
      if (grad) {
        for (size_t i = 0; i < k; ++i) (*grad)[i] += g * scores[i][j];
        (*grad)[k] += g;
      }
    }
    return f;
  }
};

double Norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

double FusionObjective(const std::vector<std::vector<double>>& system_scores,
                       const std::vector<bool>& is_target, std::span<const double> weights,
                       double offset, double prior) {
  CheckInputs(system_scores, is_target);
  if (weights.size() != system_scores.size()) throw InvalidInput("fusion: weight count mismatch");
  std::vector<double> x(weights.begin(), weights.end());
  x.push_back(offset);
  return Objective(system_scores, is_target, prior).Eval(x, nullptr);
}

FusionModel TrainFusion(const std::vector<std::vector<double>>& system_scores,
                        const std::vector<bool>& is_target, const FusionOptions& opts) {
  CheckInputs(system_scores, is_target);
  if (!(opts.prior > 0.0 && opts.prior < 1.0)) throw InvalidInput("fusion prior must be in (0, 1)");
  if (opts.max_iterations < 1) throw InvalidInput("fusion max_iterations must be >= 1");
  const Objective obj(system_scores, is_target, opts.prior);
  const size_t k = system_scores.size();
  std::vector<double> x(k + 1, 0.0), g, trial(k + 1), g_trial;
  double f = obj.Eval(x, &g);
  double step = 1.0;
  int it = 0;
  for (; it < opts.max_iterations && Norm(g) >= opts.gradient_tolerance; ++it) {
    const double gg = Norm(g) * Norm(g);
    // Armijo backtracking along -g; the step grows again after each success.
    double f_trial = f;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      for (size_t i = 0; i <= k; ++i) trial[i] = x[i] - step * g[i];
      f_trial = obj.Eval(trial, &g_trial);
      if (f_trial <= f - 1e-4 * step * gg) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no representable descent left
    x.swap(trial);
    g.swap(g_trial);
    f = f_trial;
    step *= 2.0;
  }
  FusionModel m;
  m.weights.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(k));
  m.offset = x[k];
  m.prior = opts.prior;
  m.iterations = it;
  m.gradient_norm = Norm(g);
  for (double w : x) {
    if (!std::isfinite(w)) throw RuntimeFailure("fusion produced non-finite weights");
  }
  return m;
}

std::vector<double> ApplyFusion(const FusionModel& model,
                                const std::vector<std::vector<double>>& system_scores) {
  if (system_scores.size() != model.weights.size()) {
    throw InvalidInput("fusion: model has " + std::to_string(model.weights.size()) +
                       " systems, got " + std::to_string(system_scores.size()));
  }
  if (system_scores.empty()) return {};
  const size_t n = system_scores[0].size();
  for (const auto& s : system_scores) {
    if (s.size() != n) throw InvalidInput("fusion: systems have different trial counts");
  }
  std::vector<double> out(n, model.offset);
  for (size_t j = 0; j < n; ++j) {
    for (size_t i = 0; i < system_scores.size(); ++i) out[j] += model.weights[i] * system_scores[i][j];
  }
  return out;
}

std::string SerializeFusionModel(const FusionModel& model) {
  std::string out;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "prior %.17g\noffset %.17g\n", model.prior, model.offset);
  out += buf;
  for (double w : model.weights) {
    std::snprintf(buf, sizeof(buf), "weight %.17g\n", w);
    out += buf;
  }
  return out;
}

FusionModel ParseFusionModel(const std::string& text, const std::string& name) {
  FusionModel m;
  bool have_prior = false, have_offset = false;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string key;
    double v;
    if (!(ls >> key)) continue;
    if (!(ls >> v) || !std::isfinite(v)) {
      throw InvalidInput(name + ":" + std::to_string(lineno) + ": bad value for '" + key + "'");
    }
    if (key == "prior") {
      m.prior = v;
      have_prior = true;
    } else if (key == "offset") {
      m.offset = v;
      have_offset = true;
    } else if (key == "weight") {
      m.weights.push_back(v);
    } else {
      throw InvalidInput(name + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  if (!have_prior || !have_offset || m.weights.empty()) {
    throw InvalidInput(name + ": fusion model needs prior, offset and at least one weight");
  }
  return m;
}

}  // namespace dsv::metrics
