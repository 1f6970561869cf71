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

#include "dsv/metrics/tsne.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "dsv/common/error.h"
#include "dsv/common/random.h"

namespace dsv::metrics {
namespace {

// Conditional row for point i at precision beta; returns the entropy (nats).
double ConditionalRow(const std::vector<double>& d, size_t i, double beta, std::vector<double>* row) {
  const size_t n = row->size();
  double dmin = std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < n; ++j) {
    if (j != i) dmin = std::min(dmin, d[j]);
  }
  double sum = 0.0;
  for (size_t j = 0; j < n; ++j) {
    (*row)[j] = j == i ? 0.0 : std::exp(-beta * (d[j] - dmin));
    sum += (*row)[j];
  }
  double h = 0.0;
  for (size_t j = 0; j < n; ++j) {
    (*row)[j] /= sum;
    if ((*row)[j] > 0.0) h -= (*row)[j] * std::log((*row)[j]);
  }
  return h;
}

}  // namespace

std::vector<double> TsneAffinities(const std::vector<std::vector<float>>& x, double perplexity,
                                   double tolerance) {
  const size_t n = x.size();
  if (n < 4) throw InvalidInput("t-SNE needs at least 4 points");
  if (!(perplexity > 0.0) || perplexity >= (static_cast<double>(n) - 1.0) / 3.0) {
    throw InvalidInput("perplexity " + std::to_string(perplexity) + " is infeasible for n = " +
                       std::to_string(n) + " (need perplexity < (n-1)/3)");
  }
  const size_t dim = x[0].size();
  for (const auto& v : x) {
    if (v.size() != dim) throw InvalidInput("t-SNE inputs have different dimensions");
  }
  std::vector<double> cond(n * n);
  std::vector<double> d(n), row(n);
  const double target_h = std::log(perplexity);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (size_t k = 0; k < dim; ++k) {
        const double diff = static_cast<double>(x[i][k]) - x[j][k];
        s += diff * diff;
      }
      d[j] = s;
    }
    // Bisection on beta in log space; entropy decreases with beta.
    double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
    double beta = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double h = ConditionalRow(d, i, beta, &row);
      if (std::abs(std::exp(h) - perplexity) < tolerance) break;
      if (h > target_h) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : std::sqrt(beta * hi);
      } else {
        hi = beta;
        beta = std::isinf(lo) ? beta / 2.0 : std::sqrt(lo * beta);
      }
    }
    std::copy(row.begin(), row.end(), cond.begin() + static_cast<std::ptrdiff_t>(i * n));
  }
  std::vector<double> p(n * n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) p[i * n + j] = (cond[i * n + j] + cond[j * n + i]) / (2.0 * n);
  }
  return p;
}

std::vector<double> TsneSimilarities(const std::vector<Point2>& y) {
  const size_t n = y.size();
  std::vector<double> q(n * n, 0.0);
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double dx = y[i][0] - y[j][0], dy = y[i][1] - y[j][1];
      q[i * n + j] = 1.0 / (1.0 + dx * dx + dy * dy);
      sum += q[i * n + j];
    }
  }
  for (double& v : q) v /= sum;
  return q;
}

double TsneKl(const std::vector<double>& p, const std::vector<Point2>& y) {
  const auto q = TsneSimilarities(y);
  double kl = 0.0;
  for (size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0.0) kl += p[k] * std::log(p[k] / std::max(q[k], 1e-300));
  }
  return kl;
}

TsneResult TsneProject(const std::vector<std::vector<float>>& x, const TsneOptions& opts) {
  if (opts.iterations < 1) throw InvalidInput("t-SNE iterations must be >= 1");
  const auto p = TsneAffinities(x, opts.perplexity, opts.perplexity_tolerance);
  const size_t n = x.size();

  Rng rng(opts.seed);
  std::vector<Point2> y(n), vel(n, Point2{0.0, 0.0}), grad(n), cand(n);
  for (auto& pt : y) pt = {rng.Normal(0.0, opts.init_sd), rng.Normal(0.0, opts.init_sd)};

  auto gradient = [&](const std::vector<Point2>& yy, double exag) {
    std::vector<double> num(n * n, 0.0);
    double sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = i + 1; j < n; ++j) {
        const double dx = yy[i][0] - yy[j][0], dy = yy[i][1] - yy[j][1];
        const double v = 1.0 / (1.0 + dx * dx + dy * dy);
        num[i * n + j] = num[j * n + i] = v;
        sum += 2.0 * v;
      }
    }
    for (size_t i = 0; i < n; ++i) {
      double gx = 0.0, gy = 0.0;
      for (size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double w = (exag * p[i * n + j] - num[i * n + j] / sum) * num[i * n + j];
        gx += w * (yy[i][0] - yy[j][0]);
        gy += w * (yy[i][1] - yy[j][1]);
      }
      grad[i] = {4.0 * gx, 4.0 * gy};
    }
  };
  auto center = [&](std::vector<Point2>& yy) {
    double mx = 0.0, my = 0.0;
    for (const auto& pt : yy) {
      mx += pt[0];
      my += pt[1];
    }
    mx /= n;
    my /= n;
    for (auto& pt : yy) {
      pt[0] -= mx;
      pt[1] -= my;
    }
  };

  TsneResult result;
  double kl = 0.0;
  double scale = 1.0;  // step multiplier, shrunk on rejected steps
  for (int it = 0; it < opts.iterations; ++it) {
    const bool exaggerating = it < opts.exaggeration_iterations;
    const double momentum = it < opts.momentum_switch ? opts.initial_momentum : opts.final_momentum;
    gradient(y, exaggerating ? opts.exaggeration : 1.0);
    if (exaggerating) {
      for (size_t i = 0; i < n; ++i) {
        for (int c = 0; c < 2; ++c) {
          vel[i][c] = momentum * vel[i][c] - opts.learning_rate * grad[i][c];
          y[i][c] += vel[i][c];
        }
      }
      center(y);
      continue;
    }
    if (it == opts.exaggeration_iterations) kl = TsneKl(p, y);
    bool accepted = false;
    for (int attempt = 0; attempt < 50 && !accepted; ++attempt) {
      std::vector<Point2> trial_vel(n);
      for (size_t i = 0; i < n; ++i) {
        for (int c = 0; c < 2; ++c) {
          trial_vel[i][c] = momentum * vel[i][c] - scale * opts.learning_rate * grad[i][c];
          cand[i][c] = y[i][c] + trial_vel[i][c];
        }
      }
      center(cand);
      const double kl_new = TsneKl(p, cand);
      if (std::isfinite(kl_new) && kl_new <= kl) {
        y.swap(cand);
        vel.swap(trial_vel);
        kl = kl_new;
        scale = std::min(1.0, scale * 1.25);
        accepted = true;
      } else {
        scale *= 0.5;
        vel.assign(n, Point2{0.0, 0.0});
      }
    }
    result.kl_history.push_back(kl);
  }
  for (const auto& pt : y) {
    if (!std::isfinite(pt[0]) || !std::isfinite(pt[1])) throw RuntimeFailure("t-SNE diverged");
  }
  result.coords = std::move(y);
  return result;
}

std::string TsneToTsv(const std::vector<Point2>& coords, const std::vector<TsneLabel>& labels) {
  if (coords.size() != labels.size()) throw InvalidInput("t-SNE: label count mismatch");
  std::string out = "utt_id\tx\ty\tspeaker_id\tdigit\n";
  char buf[96];
  for (size_t i = 0; i < coords.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "\t%.9g\t%.9g\t", coords[i][0], coords[i][1]);
    out += labels[i].utt_id + buf + labels[i].speaker_id + "\t" + std::to_string(labels[i].digit) + "\n";
  }
  return out;
}

std::string TsneToSvg(const std::vector<Point2>& coords, const std::vector<TsneLabel>& labels) {
  if (coords.size() != labels.size()) throw InvalidInput("t-SNE: label count mismatch");
  constexpr double kSize = 800.0, kMargin = 30.0;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!coords.empty()) {
    x0 = x1 = coords[0][0];
    y0 = y1 = coords[0][1];
    for (const auto& c : coords) {
      x0 = std::min(x0, c[0]);
      x1 = std::max(x1, c[0]);
      y0 = std::min(y0, c[1]);
      y1 = std::max(y1, c[1]);
    }
  }
  const double span = std::max({x1 - x0, y1 - y0, 1e-12});
  std::map<std::string, size_t> color_index;
  for (const auto& l : labels) color_index.emplace(l.speaker_id, 0);
  size_t k = 0;
  for (auto& [spk, idx] : color_index) idx = k++;

  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                "font-family=\"sans-serif\" font-size=\"9\">\n<rect width=\"100%%\" height=\"100%%\" "
                "fill=\"white\"/>\n",
                kSize, kSize);
  out += buf;
  for (size_t i = 0; i < coords.size(); ++i) {
    const double px = kMargin + (coords[i][0] - x0) / span * (kSize - 2 * kMargin);
    const double py = kSize - kMargin - (coords[i][1] - y0) / span * (kSize - 2 * kMargin);
    // Golden-angle hue spacing keeps neighbouring speaker indices distinct.
    const double hue = std::fmod(color_index[labels[i].speaker_id] * 137.508, 360.0);
    std::snprintf(buf, sizeof(buf),
                  "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"hsl(%.1f,70%%,45%%)\"/>"
                  "<text x=\"%.2f\" y=\"%.2f\" fill=\"hsl(%.1f,70%%,30%%)\">%d</text>\n",
                  px, py, hue, px + 4, py - 4, hue, labels[i].digit);
    out += buf;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace dsv::metrics
