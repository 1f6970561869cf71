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

#ifndef DSV_TRAINER_EMBEDDINGS_H_
#define DSV_TRAINER_EMBEDDINGS_H_

#include <map>
#include <span>
#include <string>
#include <vector>

#include "dsv/corpus/manifest.h"
#include "dsv/model/light_cnn.h"
#include "dsv/trainer/feature_source.h"

namespace dsv::trainer {

// utt_id -> embedding, kept in insertion order for stable serialization.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(size_t dim) : dim_(dim) {}

  size_t dim() const { return dim_; }
  size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }

  void Add(const std::string& utt_id, std::vector<float> embedding);
  bool Contains(const std::string& utt_id) const { return index_.count(utt_id) > 0; }
  // Throws InvalidInput naming the id when absent.
  const std::vector<float>& Get(const std::string& utt_id) const;

  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<float>& at(size_t i) const { return rows_[i]; }

  bool operator==(const EmbeddingTable& o) const { return dim_ == o.dim_ && ids_ == o.ids_ && rows_ == o.rows_; }

 private:
  size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<std::vector<float>> rows_;
  std::map<std::string, size_t> index_;
};

// "VDEM" u32 version=1, u32 dim, then records until EOF:
//   u32 id length, id bytes, dim x f32.
std::string EncodeEmbeddings(const EmbeddingTable& table);
EmbeddingTable DecodeEmbeddings(const std::string& bytes, const std::string& name);
void WriteEmbeddings(const std::string& path, const EmbeddingTable& table);
EmbeddingTable ReadEmbeddings(const std::string& path);

// One embedding per manifest row in manifest order. Rows are independent, so
// the result does not depend on `workers`.
EmbeddingTable ExtractAllEmbeddings(model::LightCnn<float>& net,
                                    std::span<const corpus::ManifestEntry> entries,
                                    const FeatureSource& source, int workers = 1);

}  // namespace dsv::trainer

#endif  // DSV_TRAINER_EMBEDDINGS_H_
