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

#include "dsv/corpus/manifest.h"

#include <filesystem>
#include <set>
#include <sstream>

#include "json.hpp"

#include "dsv/common/binary_io.h"
#include "dsv/common/error.h"

namespace dsv::corpus {

namespace {

using Json = nlohmann::ordered_json;

const std::set<std::string>& FieldNames() {
  static const std::set<std::string> kFields{"utt_id", "speaker_id", "digit", "session",
                                             "path",   "start_s",    "end_s"};
  return kFields;
}

[[noreturn]] void Fail(const std::string& name, size_t line, const std::string& why) {
  throw InvalidInput(name + ":" + std::to_string(line) + ": " + why);
}

}  // namespace

std::vector<ManifestEntry> ParseManifest(const std::string& text, const std::string& name) {
  std::vector<ManifestEntry> out;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json obj;
    try {
      obj = Json::parse(line);
    } catch (const Json::parse_error& e) {
      Fail(name, lineno, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) Fail(name, lineno, "expected a JSON object");
    for (const auto& [key, _] : obj.items()) {
      if (!FieldNames().count(key)) Fail(name, lineno, "unknown field '" + key + "'");
    }
    for (const auto& key : FieldNames()) {
      if (!obj.contains(key)) Fail(name, lineno, "missing field '" + key + "'");
    }
    ManifestEntry e;
    auto str = [&](const char* key) {
      if (!obj[key].is_string()) Fail(name, lineno, std::string("field '") + key + "' must be a string");
      return obj[key].get<std::string>();
    };
    auto integer = [&](const char* key) {
      if (!obj[key].is_number_integer()) Fail(name, lineno, std::string("field '") + key + "' must be an integer");
      return obj[key].get<long>();
    };
    auto number = [&](const char* key) {
      if (!obj[key].is_number()) Fail(name, lineno, std::string("field '") + key + "' must be a number");
      return obj[key].get<double>();
    };
    e.utt_id = str("utt_id");
    e.speaker_id = str("speaker_id");
    e.path = str("path");
    const long digit = integer("digit");
    if (digit < 0 || digit >= kNumDigits) {
      Fail(name, lineno, "digit " + std::to_string(digit) + " out of range 0..9");
    }
    e.digit = static_cast<int>(digit);
    e.session = static_cast<int>(integer("session"));
    e.start_s = number("start_s");
    e.end_s = number("end_s");
    if (e.utt_id.empty()) Fail(name, lineno, "empty utt_id");
    if (e.speaker_id.empty()) Fail(name, lineno, "empty speaker_id");
    if (e.start_s < 0.0 || !(e.end_s > e.start_s)) {
      Fail(name, lineno, "segment must satisfy 0 <= start_s < end_s");
    }
    if (!seen.insert(e.utt_id).second) {
      Fail(name, lineno, "duplicate utt_id '" + e.utt_id + "'");
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ManifestEntry> ReadManifest(const std::string& path) {
  return ParseManifest(ReadFileBytes(path), path);
}

std::string SerializeManifest(const std::vector<ManifestEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    Json obj;
    obj["utt_id"] = e.utt_id;
    obj["speaker_id"] = e.speaker_id;
    obj["digit"] = e.digit;
    obj["session"] = e.session;
    obj["path"] = e.path;
    obj["start_s"] = e.start_s;
    obj["end_s"] = e.end_s;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void WriteManifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
  WriteFileBytes(path, SerializeManifest(entries));
}

std::string ManifestBaseDir(const std::string& manifest_path) {
  return std::filesystem::path(manifest_path).parent_path().string();
}

std::string ResolvePath(const std::string& base_dir, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p.string();
  return (std::filesystem::path(base_dir) / p).string();
}

std::vector<std::pair<double, double>> UniformSplit(double start_s, double end_s, int n) {
  if (n < 1) throw InvalidInput("UniformSplit: need at least one segment");
  if (!(end_s > start_s)) throw InvalidInput("UniformSplit: empty span");
  std::vector<std::pair<double, double>> out;
  const double step = (end_s - start_s) / n;
  for (int i = 0; i < n; ++i) {
    out.emplace_back(start_s + i * step, i + 1 == n ? end_s : start_s + (i + 1) * step);
  }
  return out;
}

}  // namespace dsv::corpus
