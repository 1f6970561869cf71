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

#ifndef DSV_MODEL_CHECKPOINT_H_
#define DSV_MODEL_CHECKPOINT_H_

#include <optional>
#include <string>

#include "dsv/model/light_cnn.h"

namespace dsv::model {

// Provenance stored alongside the weights.
struct TrainingMetadata {
  uint32_t epochs = 0;
  double final_loss = 0.0;
  std::string mode;          // "single-task", "multitask" or empty
  std::string label_digest;  // hex digest of the label map
  bool operator==(const TrainingMetadata&) const = default;
};

class CheckpointError : public InvalidInput {
 public:
  enum class Kind { kFormat, kVersion, kChecksum, kTruncated, kShapeMismatch };
  CheckpointError(Kind kind, const std::string& what) : InvalidInput(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct LoadedModel {
  LightCnn<float> model;
  TrainingMetadata metadata;
};

// Layout (little-endian):
//   "VDCK" u32 version=1
//   config:   u32 width_num, u32 width_den, u32 n_out, u64 seed
//   metadata: u32 epochs, f64 final_loss, str mode, str label_digest
//   u32 n_params, then per parameter: str name, u32 rank, u32 dims[rank],
//     f32 payload
//   u32 CRC-32 of every preceding byte
// where str is a u32 length followed by the bytes.
std::string EncodeCheckpoint(const LightCnn<float>& model, const TrainingMetadata& meta);
LoadedModel DecodeCheckpoint(const std::string& bytes, const std::string& name,
                             const std::optional<ModelConfig>& expected = std::nullopt);

void SaveCheckpoint(const std::string& path, const LightCnn<float>& model,
                    const TrainingMetadata& meta);
// If `expected` is given, every stored parameter shape must match the shapes
// a model built from it would have.
LoadedModel LoadCheckpoint(const std::string& path,
                           const std::optional<ModelConfig>& expected = std::nullopt);

}  // namespace dsv::model

#endif  // DSV_MODEL_CHECKPOINT_H_
