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

#ifndef DSV_CORPUS_PROTOCOL_H_
#define DSV_CORPUS_PROTOCOL_H_

#include <string>
#include <vector>

namespace dsv::corpus {

enum class TrialLabel { kTarget, kNontarget, kUnknown };

const char* LabelName(TrialLabel label);
// Accepts exactly "target", "nontarget" or "unknown".
TrialLabel ParseLabel(const std::string& token);

struct DigitRef {
  int digit = 0;
  std::string utt_id;
  bool operator==(const DigitRef&) const = default;
};

// A claimed identity and the digits spoken in the test passphrase.
struct TrialRecord {
  std::string model_id;
  std::vector<DigitRef> passphrase;
  TrialLabel label = TrialLabel::kUnknown;
  bool operator==(const TrialRecord&) const = default;
};

// Utterances used to enroll one model, tagged by digit.
struct EnrollmentRecord {
  std::string model_id;
  std::vector<DigitRef> utterances;
  bool operator==(const EnrollmentRecord&) const = default;
};

// "3:u1,1:u2" <-> digit refs. Throws InvalidInput on malformed pairs or an
// empty list.
std::vector<DigitRef> ParseDigitRefs(const std::string& field);
std::string FormatDigitRefs(const std::vector<DigitRef>& refs);

// Trial list: model_id <TAB> digit:utt,... <TAB> label, one per line.
std::vector<TrialRecord> ParseTrials(const std::string& text, const std::string& name);
std::vector<TrialRecord> ReadTrials(const std::string& path);
std::string SerializeTrials(const std::vector<TrialRecord>& trials);

// Enrollment list: model_id <TAB> digit:utt,... one model per line.
std::vector<EnrollmentRecord> ParseEnrollmentList(const std::string& text, const std::string& name);
std::vector<EnrollmentRecord> ReadEnrollmentList(const std::string& path);
std::string SerializeEnrollmentList(const std::vector<EnrollmentRecord>& records);

// Splits on a single character, keeping empty fields.
std::vector<std::string> SplitFields(const std::string& line, char sep);

}  // namespace dsv::corpus

#endif  // DSV_CORPUS_PROTOCOL_H_
