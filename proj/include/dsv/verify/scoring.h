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

#ifndef DSV_VERIFY_SCORING_H_
#define DSV_VERIFY_SCORING_H_

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dsv/corpus/protocol.h"
#include "dsv/trainer/embeddings.h"

namespace dsv::verify {

// Sessions in the canonical enrollment protocol.
inline constexpr int kCanonicalSessions = 3;

struct DigitModel {
  std::vector<float> mean;  // arithmetic mean, not length-normalized
  int sessions = 0;
  // Set when fewer than kCanonicalSessions sessions were averaged.
  bool below_canonical() const { return sessions < kCanonicalSessions; }
  bool operator==(const DigitModel&) const = default;
};

struct EnrollmentModel {
  std::string model_id;
  std::map<int, DigitModel> digits;

  bool HasDigit(int digit) const { return digits.count(digit) > 0; }
  const DigitModel& Digit(int digit) const;  // throws "incomplete enrollment"
  bool operator==(const EnrollmentModel&) const = default;
};

struct DigitEmbedding {
  int digit;
  std::span<const float> embedding;
};

// Per-digit mean over the supplied sessions.
EnrollmentModel BuildEnrollment(const std::string& model_id,
                                std::span<const DigitEmbedding> sessions);

// a.b / (|a| |b|), computed in double and clamped to [-1, 1]. Throws on a
// zero vector or a dimension mismatch.
double CosineScore(std::span<const float> a, std::span<const float> b);

struct ScoreRecord {
  size_t trial_index = 0;
  std::string model_id;
  double score = 0.0;
  std::vector<double> sub_scores;  // one per passphrase position
  corpus::TrialLabel label = corpus::TrialLabel::kUnknown;
};

// Each test digit is scored against the same digit's enrollment mean; the
// trial score is the mean over all passphrase positions (repeats included).
// The mean is accumulated in sorted order so it does not depend on digit order.
ScoreRecord ScorePassphrase(const EnrollmentModel& enrollment,
                            std::span<const DigitEmbedding> test);

using EnrollmentSet = std::map<std::string, EnrollmentModel>;

// Builds one model per enrollment record from the embedding table.
EnrollmentSet EnrollAll(std::span<const corpus::EnrollmentRecord> records,
                        const trainer::EmbeddingTable& embeddings);

// One score per trial, in trial order. No score normalization.
std::vector<ScoreRecord> RunProtocol(std::span<const corpus::TrialRecord> trials,
                                     const EnrollmentSet& enrollment,
                                     const trainer::EmbeddingTable& embeddings, int workers = 1);

// Score file: model_id <TAB> trial index <TAB> score (%.9f) <TAB> label.
std::string SerializeScores(std::span<const ScoreRecord> scores);
std::vector<ScoreRecord> ParseScores(const std::string& text, const std::string& name);
std::vector<ScoreRecord> ReadScores(const std::string& path);

// Enrollment store: JSON-lines {"model_id", "digit", "sessions", "mean"}.
std::string SerializeEnrollment(const EnrollmentSet& models);
EnrollmentSet ParseEnrollment(const std::string& text, const std::string& name);

}  // namespace dsv::verify

#endif  // DSV_VERIFY_SCORING_H_
