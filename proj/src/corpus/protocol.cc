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

#include "dsv/corpus/protocol.h"

#include <charconv>
#include <sstream>

#include "dsv/common/binary_io.h"
#include "dsv/common/error.h"
#include "dsv/corpus/manifest.h"

namespace dsv::corpus {

namespace {

// Iterates non-blank lines with CR stripped; fn(lineno, line).
template <typename Fn>
void ForEachLine(const std::string& text, Fn fn) {
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    fn(lineno, line);
  }
}

std::string Where(const std::string& name, size_t lineno) {
  return name + ":" + std::to_string(lineno) + ": ";
}

}  // namespace

const char* LabelName(TrialLabel label) {
  switch (label) {
    case TrialLabel::kTarget: return "target";
    case TrialLabel::kNontarget: return "nontarget";
    case TrialLabel::kUnknown: return "unknown";
  }
  return "unknown";
}

TrialLabel ParseLabel(const std::string& token) {
  if (token == "target") return TrialLabel::kTarget;
  if (token == "nontarget") return TrialLabel::kNontarget;
  if (token == "unknown") return TrialLabel::kUnknown;
  throw InvalidInput("unknown trial label '" + token + "' (expected target, nontarget or unknown)");
}

std::vector<std::string> SplitFields(const std::string& line, char sep) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    size_t next = line.find(sep, pos);
    out.push_back(line.substr(pos, next - pos));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

std::vector<DigitRef> ParseDigitRefs(const std::string& field) {
  if (field.empty()) throw InvalidInput("empty digit list");
  std::vector<DigitRef> refs;
  for (const std::string& pair : SplitFields(field, ',')) {
    const size_t colon = pair.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == pair.size()) {
      throw InvalidInput("malformed digit:utt pair '" + pair + "'");
    }
    int digit = -1;
    const char* b = pair.data();
    auto [p, ec] = std::from_chars(b, b + colon, digit);
    if (ec != std::errc() || p != b + colon) {
      throw InvalidInput("malformed digit in pair '" + pair + "'");
    }
    if (digit < 0 || digit >= kNumDigits) {
      throw InvalidInput("digit out of range 0..9 in pair '" + pair + "'");
    }
    refs.push_back({digit, pair.substr(colon + 1)});
  }
  return refs;
}

std::string FormatDigitRefs(const std::vector<DigitRef>& refs) {
  std::string out;
  for (size_t i = 0; i < refs.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(refs[i].digit) + ":" + refs[i].utt_id;
  }
  return out;
}

std::vector<TrialRecord> ParseTrials(const std::string& text, const std::string& name) {
  std::vector<TrialRecord> out;
  ForEachLine(text, [&](size_t lineno, const std::string& line) {
    auto fields = SplitFields(line, '\t');
    if (fields.size() != 3) {
      throw InvalidInput(Where(name, lineno) + "expected 3 tab-separated fields, got " +
                         std::to_string(fields.size()));
    }
    try {
      TrialRecord t;
      t.model_id = fields[0];
      if (t.model_id.empty()) throw InvalidInput("empty model_id");
      t.passphrase = ParseDigitRefs(fields[1]);
      t.label = ParseLabel(fields[2]);
      out.push_back(std::move(t));
    } catch (const InvalidInput& e) {
      throw InvalidInput(Where(name, lineno) + e.what());
    }
  });
  return out;
}

std::vector<TrialRecord> ReadTrials(const std::string& path) {
  return ParseTrials(ReadFileBytes(path), path);
}

std::string SerializeTrials(const std::vector<TrialRecord>& trials) {
  std::string out;
  for (const auto& t : trials) {
    out += t.model_id + "\t" + FormatDigitRefs(t.passphrase) + "\t" + LabelName(t.label) + "\n";
  }
  return out;
}

std::vector<EnrollmentRecord> ParseEnrollmentList(const std::string& text, const std::string& name) {
  std::vector<EnrollmentRecord> out;
  ForEachLine(text, [&](size_t lineno, const std::string& line) {
    auto fields = SplitFields(line, '\t');
    if (fields.size() != 2) {
      throw InvalidInput(Where(name, lineno) + "expected 2 tab-separated fields, got " +
                         std::to_string(fields.size()));
    }
    try {
      EnrollmentRecord r;
      r.model_id = fields[0];
      if (r.model_id.empty()) throw InvalidInput("empty model_id");
      r.utterances = ParseDigitRefs(fields[1]);
      out.push_back(std::move(r));
    } catch (const InvalidInput& e) {
      throw InvalidInput(Where(name, lineno) + e.what());
    }
  });
  return out;
}

std::vector<EnrollmentRecord> ReadEnrollmentList(const std::string& path) {
  return ParseEnrollmentList(ReadFileBytes(path), path);
}

std::string SerializeEnrollmentList(const std::vector<EnrollmentRecord>& records) {
  std::string out;
  for (const auto& r : records) out += r.model_id + "\t" + FormatDigitRefs(r.utterances) + "\n";
  return out;
}

}  // namespace dsv::corpus
