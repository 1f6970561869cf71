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

#include "dsv/trainer/label_map.h"

#include <algorithm>
#include <cstdio>
#include <set>

#include "dsv/common/error.h"

namespace dsv::trainer {

const char* TaskModeName(TaskMode mode) {
  return mode == TaskMode::kMultitask ? "multitask" : "single-task";
}

TaskMode ParseTaskMode(const std::string& text) {
  if (text == "multitask") return TaskMode::kMultitask;
  if (text == "single-task" || text == "singletask" || text == "single") return TaskMode::kSingleTask;
  throw InvalidInput("unknown training mode '" + text + "' (expected multitask or single-task)");
}

LabelMap::LabelMap(TaskMode mode, std::vector<std::string> sorted_speakers, int n_digits)
    : mode_(mode), speakers_(std::move(sorted_speakers)), n_digits_(n_digits) {
  if (speakers_.empty()) throw InvalidInput("label map needs at least one speaker");
  if (n_digits_ < 1) throw InvalidInput("label map needs at least one digit");
  for (size_t i = 0; i < speakers_.size(); ++i) {
    if (!index_.emplace(speakers_[i], static_cast<int>(i)).second) {
      throw InvalidInput("duplicate speaker '" + speakers_[i] + "' in label map");
    }
  }
}

int LabelMap::n_classes() const {
  return mode_ == TaskMode::kMultitask ? n_speakers() * n_digits_ : n_speakers();
}

int LabelMap::SpeakerIndex(const std::string& speaker_id) const {
  auto it = index_.find(speaker_id);
  if (it == index_.end()) throw InvalidInput("speaker '" + speaker_id + "' not in label map");
  return it->second;
}

int LabelMap::ClassOf(int speaker_index, int digit) const {
  if (speaker_index < 0 || speaker_index >= n_speakers()) {
    throw InvalidInput("speaker index " + std::to_string(speaker_index) + " out of range");
  }
  if (digit < 0 || digit >= n_digits_) {
    throw InvalidInput("digit " + std::to_string(digit) + " out of range");
  }
  return mode_ == TaskMode::kMultitask ? speaker_index * n_digits_ + digit : speaker_index;
}

int LabelMap::ClassOf(const corpus::ManifestEntry& entry) const {
  return ClassOf(SpeakerIndex(entry.speaker_id), entry.digit);
}

std::pair<int, int> LabelMap::Decode(int cls) const {
  if (cls < 0 || cls >= n_classes()) throw InvalidInput("class " + std::to_string(cls) + " out of range");
  if (mode_ == TaskMode::kMultitask) return {cls / n_digits_, cls % n_digits_};
  return {cls, -1};
}

std::string LabelMap::Digest() const {
  // FNV-1a, 64 bit.
  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  };
  mix(TaskModeName(mode_));
  mix(std::to_string(n_digits_));
  for (const auto& s : speakers_) mix(s);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

LabelMap BuildLabelMap(std::span<const corpus::ManifestEntry> entries, TaskMode mode) {
  if (entries.empty()) throw InvalidInput("cannot build a label map from an empty manifest");
  std::set<std::string> speakers;
  for (const auto& e : entries) {
    if (e.digit < 0 || e.digit >= corpus::kNumDigits) {
      throw InvalidInput("utterance '" + e.utt_id + "': digit " + std::to_string(e.digit) +
                         " out of range 0..9");
    }
    speakers.insert(e.speaker_id);
  }
  return LabelMap(mode, std::vector<std::string>(speakers.begin(), speakers.end()));
}

}  // namespace dsv::trainer
