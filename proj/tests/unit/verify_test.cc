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


#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "doctest.h"

#include "dsv/common/error.h"
#include "dsv/common/random.h"
#include "dsv/verify/scoring.h"

namespace dsv::verify {
namespace {

using corpus::DigitRef;
using corpus::TrialLabel;
using corpus::TrialRecord;

std::vector<float> RandomVec(Rng& rng, size_t dim) {
  std::vector<float> v(dim);
  for (float& x : v) x = static_cast<float>(rng.Normal());
  return v;
}

TEST_CASE("enrollment means") {
  const std::vector<float> v = {0.25f, -1.5f, 3.0f};
  std::vector<DigitEmbedding> same = {{4, v}, {4, v}, {4, v}};
  const EnrollmentModel a = BuildEnrollment("m", same);
  CHECK(a.Digit(4).mean == v);
  CHECK(a.Digit(4).sessions == 3);
  CHECK_FALSE(a.Digit(4).below_canonical());

  const std::vector<float> e1 = {1, 0}, e2 = {0, 1}, e3 = {1, 1};
  std::vector<DigitEmbedding> three = {{0, e1}, {0, e2}, {0, e3}};
  const EnrollmentModel b = BuildEnrollment("m", three);
  CHECK(b.Digit(0).mean[0] == static_cast<float>(2.0 / 3.0));
  CHECK(b.Digit(0).mean[1] == static_cast<float>(2.0 / 3.0));

  std::vector<DigitEmbedding> two = {{2, e1}, {2, e3}};
  const EnrollmentModel c = BuildEnrollment("m", two);
  CHECK(c.Digit(2).sessions == 2);
  CHECK(c.Digit(2).below_canonical());
  CHECK(c.Digit(2).mean == std::vector<float>{1.0f, 0.5f});
  CHECK_FALSE(c.HasDigit(3));
  CHECK_THROWS_WITH_AS(c.Digit(3), doctest::Contains("incomplete enrollment"), InvalidInput);

  std::vector<DigitEmbedding> mixed = {{2, e1}, {2, v}};
  CHECK_THROWS_AS(BuildEnrollment("m", mixed), InvalidInput);
}

TEST_CASE("cosine examples and errors") {
  const std::vector<float> x = {1, 0}, y = {0, 1}, d = {1, 1}, z = {0, 0};
  const std::vector<float> v = {0.3f, -2.0f, 7.5f};
  CHECK(CosineScore(v, v) == 1.0);
  CHECK(CosineScore(x, y) == 0.0);
  CHECK(CosineScore(x, d) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  const std::vector<float> neg = {-0.3f, 2.0f, -7.5f};
  CHECK(CosineScore(v, neg) == -1.0);
  CHECK_THROWS_AS(CosineScore(x, z), InvalidInput);
  CHECK_THROWS_AS(CosineScore(x, v), InvalidInput);
}

TEST_CASE("cosine is scale invariant") {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = RandomVec(rng, 128), b = RandomVec(rng, 128);
    const double alpha = std::exp(rng.Uniform(-7.0, 7.0));
    const double beta = std::exp(rng.Uniform(-7.0, 7.0));
    std::vector<float> sa(a), sb(b);
    for (float& x : sa) x = static_cast<float>(x * alpha);
    for (float& x : sb) x = static_cast<float>(x * beta);
    const double s = CosineScore(a, b);
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);
    CHECK(std::abs(CosineScore(sa, sb) - s) < 1e-6);
  }
}

EnrollmentModel Model(const std::vector<std::vector<float>>& means) {
  EnrollmentModel m;
  m.model_id = "m";
  for (size_t d = 0; d < means.size(); ++d) m.digits[static_cast<int>(d)] = {means[d], 3};
  return m;
}

TEST_CASE("passphrase score examples") {
  const std::vector<float> x = {1, 0}, y = {0, 1};
  const EnrollmentModel m = Model({x, y});
  // cos(60 deg) = 0.5 against x, cos(45.57 deg) = 0.7 against y.
  const std::vector<float> t0 = {0.5f, static_cast<float>(std::sqrt(0.75))};
  const std::vector<float> t1 = {static_cast<float>(std::sqrt(0.51)), 0.7f};
  std::vector<DigitEmbedding> test = {{0, t0}, {1, t1}};
  const ScoreRecord r = ScorePassphrase(m, test);
  REQUIRE(r.sub_scores.size() == 2);
  CHECK(r.sub_scores[0] == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(r.sub_scores[1] == doctest::Approx(0.7).epsilon(1e-7));
  CHECK(r.score == doctest::Approx(0.6).epsilon(1e-7));
  CHECK(r.score == (r.sub_scores[0] + r.sub_scores[1]) / 2.0);

  std::vector<DigitEmbedding> one = {{1, t1}};
  CHECK(ScorePassphrase(m, one).score == CosineScore(y, t1));

  std::vector<DigitEmbedding> seven = {{0, t0}, {7, t1}};
  CHECK_THROWS_WITH_AS(ScorePassphrase(m, seven), doctest::Contains("incomplete enrollment"),
                       InvalidInput);
  CHECK_THROWS_AS(ScorePassphrase(m, std::vector<DigitEmbedding>{}), InvalidInput);
}

TEST_CASE("passphrase score is exactly permutation invariant") {
  Rng rng(5);
  std::vector<std::vector<float>> means;
  for (int d = 0; d < 10; ++d) means.push_back(RandomVec(rng, 64));
  const EnrollmentModel m = Model(means);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<float>> vecs;
    std::vector<int> digits;
    for (int k = 0; k < 5; ++k) {
      digits.push_back(static_cast<int>(rng.Index(10)));
      vecs.push_back(RandomVec(rng, 64));
    }
    std::vector<size_t> order = {0, 1, 2, 3, 4};
    std::vector<DigitEmbedding> base;
    for (size_t k : order) base.push_back({digits[k], vecs[k]});
    const double ref = ScorePassphrase(m, base).score;
    for (int p = 0; p < 10; ++p) {
      rng.Shuffle(std::span<size_t>(order));
      std::vector<DigitEmbedding> perm;
      for (size_t k : order) perm.push_back({digits[k], vecs[k]});
      CHECK(ScorePassphrase(m, perm).score == ref);
    }
  }
}

TEST_CASE("test embeddings equal to enrollment means score exactly one") {
  Rng rng(9);
  std::vector<std::vector<float>> sessions;
  for (int i = 0; i < 30; ++i) sessions.push_back(RandomVec(rng, 256));
  std::vector<DigitEmbedding> enr;
  for (int d = 0; d < 10; ++d) {
    for (int s = 0; s < 3; ++s) enr.push_back({d, sessions[d * 3 + s]});
  }
  const EnrollmentModel m = BuildEnrollment("spk", enr);
  std::vector<DigitEmbedding> test;
  for (int d : {3, 1, 4, 1, 5}) test.push_back({d, m.Digit(d).mean});
  const ScoreRecord r = ScorePassphrase(m, test);
  CHECK(r.score == 1.0);
  for (double s : r.sub_scores) CHECK(s == 1.0);
}

TEST_CASE("repeated digits count every occurrence") {
  const std::vector<float> x = {1, 0}, y = {0, 1}, d = {1, 1};
  const EnrollmentModel m = Model({x, y});
  std::vector<DigitEmbedding> test = {{0, d}, {0, d}, {1, y}};
  const ScoreRecord r = ScorePassphrase(m, test);
  REQUIRE(r.sub_scores.size() == 3);
  CHECK(r.score == doctest::Approx((2.0 / std::sqrt(2.0) + 1.0) / 3.0).epsilon(1e-12));
}

TEST_CASE("dropping a digit recomputes the mean over the rest") {
  Rng rng(13);
  std::vector<std::vector<float>> means, tests;
  for (int d = 0; d < 5; ++d) {
    means.push_back(RandomVec(rng, 32));
    tests.push_back(RandomVec(rng, 32));
  }
  const EnrollmentModel full = Model(means);
  std::vector<DigitEmbedding> all;
  for (int d = 0; d < 5; ++d) all.push_back({d, tests[d]});
  const ScoreRecord r = ScorePassphrase(full, all);
  for (int drop = 0; drop < 5; ++drop) {
    EnrollmentModel reduced = full;
    reduced.digits.erase(drop);
    std::vector<DigitEmbedding> rest;
    double sum = 0.0;
    for (int d = 0; d < 5; ++d) {
      if (d == drop) continue;
      rest.push_back({d, tests[d]});
      sum += r.sub_scores[d];
    }
    CHECK(ScorePassphrase(reduced, rest).score == doctest::Approx(sum / 4.0).epsilon(1e-14));
  }
}

struct Fixture {
  trainer::EmbeddingTable table{4};
  std::vector<corpus::EnrollmentRecord> records;
  Fixture() {
    Rng rng(17);
    for (int s = 0; s < 3; ++s) {
      corpus::EnrollmentRecord rec;
      rec.model_id = "spk" + std::to_string(s);
      for (int d = 0; d < 3; ++d) {
        for (int k = 0; k < 3; ++k) {
          const std::string id = rec.model_id + "_e" + std::to_string(k) + "_" + std::to_string(d);
          table.Add(id, RandomVec(rng, 4));
          rec.utterances.push_back({d, id});
        }
        const std::string tid = rec.model_id + "_t_" + std::to_string(d);
        table.Add(tid, RandomVec(rng, 4));
      }
      records.push_back(rec);
    }
  }
  TrialRecord Trial(int model, int speaker, TrialLabel label) const {
    TrialRecord t;
    t.model_id = "spk" + std::to_string(model);
    for (int d : {2, 0, 1}) {
      t.passphrase.push_back({d, "spk" + std::to_string(speaker) + "_t_" + std::to_string(d)});
    }
    t.label = label;
    return t;
  }
};

TEST_CASE("protocol run preserves order and labels") {
  Fixture f;
  const EnrollmentSet enr = EnrollAll(f.records, f.table);
  REQUIRE(enr.size() == 3);
  CHECK(enr.at("spk1").Digit(2).sessions == 3);
  std::vector<TrialRecord> trials;
  for (int m = 0; m < 3; ++m) {
    for (int s = 0; s < 3; ++s) {
      trials.push_back(f.Trial(m, s, m == s ? TrialLabel::kTarget : TrialLabel::kNontarget));
    }
  }
  const auto scores = RunProtocol(trials, enr, f.table, 1);
  REQUIRE(scores.size() == trials.size());
  for (size_t i = 0; i < trials.size(); ++i) {
    CHECK(scores[i].trial_index == i);
    CHECK(scores[i].model_id == trials[i].model_id);
    CHECK(scores[i].label == trials[i].label);
    std::vector<DigitEmbedding> test;
    for (const auto& ref : trials[i].passphrase) test.push_back({ref.digit, f.table.Get(ref.utt_id)});
    CHECK(scores[i].score == ScorePassphrase(enr.at(trials[i].model_id), test).score);
  }
  const auto parallel = RunProtocol(trials, enr, f.table, 4);
  CHECK(SerializeScores(parallel) == SerializeScores(scores));
  CHECK(RunProtocol(std::vector<TrialRecord>{}, enr, f.table, 1).empty());
}

TEST_CASE("identical embeddings everywhere score one") {
  trainer::EmbeddingTable table(3);
  corpus::EnrollmentRecord rec{"spk", {}};
  for (int d = 0; d < 10; ++d) {
    for (int k = 0; k < 3; ++k) {
      const std::string id = "e" + std::to_string(d) + "_" + std::to_string(k);
      table.Add(id, {0.2f, -0.7f, 1.1f});
      rec.utterances.push_back({d, id});
    }
    table.Add("t" + std::to_string(d), {0.2f, -0.7f, 1.1f});
  }
  const EnrollmentSet enr = EnrollAll(std::vector<corpus::EnrollmentRecord>{rec}, table);
  TrialRecord t{"spk", {{3, "t3"}, {9, "t9"}, {0, "t0"}, {3, "t3"}, {5, "t5"}}, TrialLabel::kTarget};
  const auto scores = RunProtocol(std::vector<TrialRecord>{t, t}, enr, table, 1);
  for (const auto& s : scores) CHECK(s.score == 1.0);
}

TEST_CASE("dangling references are rejected") {
  Fixture f;
  const EnrollmentSet enr = EnrollAll(f.records, f.table);
  TrialRecord bad_utt = f.Trial(0, 1, TrialLabel::kNontarget);
  bad_utt.passphrase[1].utt_id = "nowhere";
  CHECK_THROWS_AS(RunProtocol(std::vector<TrialRecord>{bad_utt}, enr, f.table, 1), InvalidInput);
  TrialRecord bad_model = f.Trial(0, 1, TrialLabel::kNontarget);
  bad_model.model_id = "spk9";
  CHECK_THROWS_AS(RunProtocol(std::vector<TrialRecord>{bad_model}, enr, f.table, 1), InvalidInput);
  TrialRecord bad_digit = f.Trial(0, 0, TrialLabel::kTarget);
  bad_digit.passphrase[0].digit = 8;
  CHECK_THROWS_WITH_AS(RunProtocol(std::vector<TrialRecord>{bad_digit}, enr, f.table, 1),
                       doctest::Contains("incomplete enrollment"), InvalidInput);
  auto records = f.records;
  records[0].utterances[0].utt_id = "nowhere";
  CHECK_THROWS_AS(EnrollAll(records, f.table), InvalidInput);
}

TEST_CASE("score file round trip") {
  std::vector<ScoreRecord> scores(3);
  scores[0] = {0, "spk_a", 0.123456789, {}, TrialLabel::kTarget};
  scores[1] = {1, "spk_b", -0.5, {}, TrialLabel::kNontarget};
  scores[2] = {2, "spk_a", 1.0, {}, TrialLabel::kUnknown};
  const std::string text = SerializeScores(scores);
  CHECK(text ==
        "spk_a\t0\t0.123456789\ttarget\n"
        "spk_b\t1\t-0.500000000\tnontarget\n"
        "spk_a\t2\t1.000000000\tunknown\n");
  const auto back = ParseScores(text, "mem");
  REQUIRE(back.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(back[i].model_id == scores[i].model_id);
    CHECK(back[i].trial_index == scores[i].trial_index);
    CHECK(back[i].score == scores[i].score);
    CHECK(back[i].label == scores[i].label);
  }
  CHECK(SerializeScores(back) == text);
  CHECK_THROWS_AS(ParseScores("spk\t0\tabc\ttarget\n", "mem"), InvalidInput);
  CHECK_THROWS_AS(ParseScores("spk\t0\t0.5\n", "mem"), InvalidInput);
  CHECK_THROWS_AS(ParseScores("spk\t0\t0.5\tmaybe\n", "mem"), InvalidInput);
}

TEST_CASE("enrollment store round trip") {
  Fixture f;
  const EnrollmentSet enr = EnrollAll(f.records, f.table);
  const std::string text = SerializeEnrollment(enr);
  const EnrollmentSet back = ParseEnrollment(text, "mem");
  CHECK(back == enr);
  CHECK(SerializeEnrollment(back) == text);
  CHECK_THROWS_AS(ParseEnrollment("{\"model_id\": \"x\"}\n", "mem"), InvalidInput);
  CHECK_THROWS_AS(ParseEnrollment("not json\n", "mem"), InvalidInput);
}

}  // namespace
}  // namespace dsv::verify
