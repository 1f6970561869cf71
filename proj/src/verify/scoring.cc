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

#include "dsv/verify/scoring.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "json.hpp"

#include "dsv/common/binary_io.h"
#include "dsv/common/error.h"
#include "dsv/common/parallel.h"

namespace dsv::verify {

const DigitModel& EnrollmentModel::Digit(int digit) const {
  auto it = digits.find(digit);
  if (it == digits.end()) {
    throw InvalidInput("incomplete enrollment: model '" + model_id + "' has no digit " +
                       std::to_string(digit));
  }
  return it->second;
}

EnrollmentModel BuildEnrollment(const std::string& model_id,
                                std::span<const DigitEmbedding> sessions) {
  EnrollmentModel out{model_id, {}};
  std::map<int, std::vector<double>> sums;
  for (const auto& s : sessions) {
    if (s.digit < 0 || s.digit >= corpus::kNumDigits) {
      throw InvalidInput("enrollment '" + model_id + "': digit out of range");
    }
    auto& acc = sums[s.digit];
    if (acc.empty()) acc.assign(s.embedding.size(), 0.0);
    if (acc.size() != s.embedding.size()) {
      throw InvalidInput("enrollment '" + model_id + "': embedding dimensions differ");
    }
    for (size_t i = 0; i < acc.size(); ++i) acc[i] += s.embedding[i];
    ++out.digits[s.digit].sessions;
  }
  for (auto& [digit, acc] : sums) {
    DigitModel& dm = out.digits[digit];
    dm.mean.resize(acc.size());
    for (size_t i = 0; i < acc.size(); ++i) {
      dm.mean[i] = static_cast<float>(acc[i] / dm.sessions);
    }
  }
  return out;
}

double CosineScore(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw InvalidInput("cosine: dimension mismatch " + std::to_string(a.size()) + " vs " +
                       std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw InvalidInput("cosine: zero-norm embedding (degenerate extraction)");
  }
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

ScoreRecord ScorePassphrase(const EnrollmentModel& enrollment,
                            std::span<const DigitEmbedding> test) {
  if (test.empty()) throw InvalidInput("empty passphrase");
  ScoreRecord rec;
  rec.model_id = enrollment.model_id;
  for (const auto& t : test) {
    rec.sub_scores.push_back(CosineScore(enrollment.Digit(t.digit).mean, t.embedding));
  }
  std::vector<double> sorted = rec.sub_scores;
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double v : sorted) sum += v;
  rec.score = sum / static_cast<double>(sorted.size());
  return rec;
}

EnrollmentSet EnrollAll(std::span<const corpus::EnrollmentRecord> records,
                        const trainer::EmbeddingTable& embeddings) {
  EnrollmentSet out;
  for (const auto& r : records) {
    std::vector<DigitEmbedding> sessions;
    for (const auto& ref : r.utterances) sessions.push_back({ref.digit, embeddings.Get(ref.utt_id)});
    if (out.count(r.model_id)) throw InvalidInput("duplicate enrollment model '" + r.model_id + "'");
    out.emplace(r.model_id, BuildEnrollment(r.model_id, sessions));
  }
  return out;
}

std::vector<ScoreRecord> RunProtocol(std::span<const corpus::TrialRecord> trials,
                                     const EnrollmentSet& enrollment,
                                     const trainer::EmbeddingTable& embeddings, int workers) {
  // Validate all references before scoring anything.
  for (size_t i = 0; i < trials.size(); ++i) {
    if (!enrollment.count(trials[i].model_id)) {
      throw InvalidInput("trial " + std::to_string(i) + ": unknown model '" + trials[i].model_id + "'");
    }
    for (const auto& ref : trials[i].passphrase) {
      if (!embeddings.Contains(ref.utt_id)) {
        throw InvalidInput("trial " + std::to_string(i) + ": dangling utterance '" + ref.utt_id + "'");
      }
    }
  }
  std::vector<ScoreRecord> out(trials.size());
  ParallelFor(trials.size(), workers, [&](size_t i) {
    const auto& t = trials[i];
    std::vector<DigitEmbedding> test;
    for (const auto& ref : t.passphrase) test.push_back({ref.digit, embeddings.Get(ref.utt_id)});
    out[i] = ScorePassphrase(enrollment.at(t.model_id), test);
    out[i].trial_index = i;
    out[i].label = t.label;
  });
  return out;
}

std::string SerializeScores(std::span<const ScoreRecord> scores) {
  std::string out;
  char buf[64];
  for (const auto& s : scores) {
    std::snprintf(buf, sizeof(buf), "%.9f", s.score);
    out += s.model_id + "\t" + std::to_string(s.trial_index) + "\t" + buf + "\t" +
           corpus::LabelName(s.label) + "\n";
  }
  return out;
}

std::vector<ScoreRecord> ParseScores(const std::string& text, const std::string& name) {
  std::vector<ScoreRecord> out;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = name + ":" + std::to_string(lineno) + ": ";
    auto f = corpus::SplitFields(line, '\t');
    if (f.size() != 4) throw InvalidInput(where + "expected 4 tab-separated fields");
    ScoreRecord r;
    r.model_id = f[0];
    char* end = nullptr;
    const unsigned long long idx = std::strtoull(f[1].c_str(), &end, 10);
    if (f[1].empty() || *end != '\0') throw InvalidInput(where + "bad trial index '" + f[1] + "'");
    r.trial_index = static_cast<size_t>(idx);
    r.score = std::strtod(f[2].c_str(), &end);
    if (f[2].empty() || *end != '\0' || !std::isfinite(r.score)) {
      throw InvalidInput(where + "bad score '" + f[2] + "'");
    }
    try {
      r.label = corpus::ParseLabel(f[3]);
    } catch (const InvalidInput& e) {
      throw InvalidInput(where + e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ScoreRecord> ReadScores(const std::string& path) {
  return ParseScores(ReadFileBytes(path), path);
}

std::string SerializeEnrollment(const EnrollmentSet& models) {
  std::string out;
  for (const auto& [id, m] : models) {
    for (const auto& [digit, dm] : m.digits) {
      nlohmann::ordered_json obj;
      obj["model_id"] = id;
      obj["digit"] = digit;
      obj["sessions"] = dm.sessions;
      obj["mean"] = dm.mean;
      out += obj.dump();
      out += '\n';
    }
  }
  return out;
}

EnrollmentSet ParseEnrollment(const std::string& text, const std::string& name) {
  EnrollmentSet out;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = name + ":" + std::to_string(lineno) + ": ";
    try {
      auto obj = nlohmann::json::parse(line);
      const std::string id = obj.at("model_id").get<std::string>();
      const int digit = obj.at("digit").get<int>();
      if (digit < 0 || digit >= corpus::kNumDigits) throw InvalidInput("digit out of range");
      DigitModel dm;
      dm.sessions = obj.at("sessions").get<int>();
      dm.mean = obj.at("mean").get<std::vector<float>>();
      if (dm.sessions < 1) throw InvalidInput("sessions must be >= 1");
      EnrollmentModel& m = out[id];
      m.model_id = id;
      if (!m.digits.emplace(digit, std::move(dm)).second) throw InvalidInput("duplicate digit");
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput(where + e.what());
    } catch (const InvalidInput& e) {
      throw InvalidInput(where + e.what());
    }
  }
  return out;
}

}  // namespace dsv::verify
