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

#ifndef DSV_TRAINER_LABEL_MAP_H_
#define DSV_TRAINER_LABEL_MAP_H_

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dsv/corpus/manifest.h"

namespace dsv::trainer {

enum class TaskMode { kSingleTask, kMultitask };

const char* TaskModeName(TaskMode mode);
TaskMode ParseTaskMode(const std::string& text);

// Class construction for training. Single-task: one class per speaker.
// Multitask: one class per (speaker, digit), class = speaker * n_digits + digit.
class LabelMap {
 public:
  LabelMap(TaskMode mode, std::vector<std::string> sorted_speakers,
           int n_digits = corpus::kNumDigits);

  TaskMode mode() const { return mode_; }
  int n_speakers() const { return static_cast<int>(speakers_.size()); }
  int n_digits() const { return n_digits_; }
  int n_classes() const;
  const std::vector<std::string>& speakers() const { return speakers_; }

  int SpeakerIndex(const std::string& speaker_id) const;
  int ClassOf(int speaker_index, int digit) const;
  int ClassOf(const corpus::ManifestEntry& entry) const;
  // Multitask: (speaker, digit). Single-task: (speaker, -1).
  std::pair<int, int> Decode(int cls) const;

  // 16 hex digits identifying mode, digit count and speaker table.
  std::string Digest() const;

 private:
  TaskMode mode_;
  std::vector<std::string> speakers_;
  std::map<std::string, int> index_;
  int n_digits_;
};

// Speakers are indexed in sorted id order. Throws on an empty manifest.
LabelMap BuildLabelMap(std::span<const corpus::ManifestEntry> entries, TaskMode mode);

}  // namespace dsv::trainer

#endif  // DSV_TRAINER_LABEL_MAP_H_
