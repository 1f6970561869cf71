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

#include "dsv/trainer/embeddings.h"

#include "dsv/common/binary_io.h"
#include "dsv/common/error.h"
#include "dsv/common/parallel.h"

namespace dsv::trainer {

namespace {
constexpr char kMagic[] = "VDEM";
constexpr uint32_t kVersion = 1;
}  // namespace

void EmbeddingTable::Add(const std::string& utt_id, std::vector<float> embedding) {
  if (ids_.empty() && dim_ == 0) dim_ = embedding.size();
  if (embedding.size() != dim_) {
    throw InvalidInput("embedding for '" + utt_id + "' has dimension " +
                       std::to_string(embedding.size()) + ", table has " + std::to_string(dim_));
  }
  if (!index_.emplace(utt_id, ids_.size()).second) {
    throw InvalidInput("duplicate embedding id '" + utt_id + "'");
  }
  ids_.push_back(utt_id);
  rows_.push_back(std::move(embedding));
}

const std::vector<float>& EmbeddingTable::Get(const std::string& utt_id) const {
  auto it = index_.find(utt_id);
  if (it == index_.end()) throw InvalidInput("no embedding for utterance '" + utt_id + "'");
  return rows_[it->second];
}

std::string EncodeEmbeddings(const EmbeddingTable& table) {
  ByteWriter w;
  w.PutBytes(kMagic);
  w.PutU32(kVersion);
  w.PutU32(static_cast<uint32_t>(table.dim()));
  for (size_t i = 0; i < table.size(); ++i) {
    w.PutString(table.ids()[i]);
    w.PutF32Array(table.at(i));
  }
  return w.Release();
}

EmbeddingTable DecodeEmbeddings(const std::string& bytes, const std::string& name) {
  ByteReader r(bytes, name);
  if (bytes.size() < 4 || r.GetBytes(4) != kMagic) throw InvalidInput(name + ": not a VDEM embedding file");
  if (uint32_t v = r.GetU32(); v != kVersion) {
    throw InvalidInput(name + ": unsupported embedding file version " + std::to_string(v));
  }
  const uint32_t dim = r.GetU32();
  EmbeddingTable table(dim);
  while (!r.AtEnd()) {
    std::string id = r.GetString();
    std::vector<float> row(dim);
    r.GetF32Array(row);
    table.Add(id, std::move(row));
  }
  return table;
}

void WriteEmbeddings(const std::string& path, const EmbeddingTable& table) {
  WriteFileBytes(path, EncodeEmbeddings(table));
}

EmbeddingTable ReadEmbeddings(const std::string& path) {
  return DecodeEmbeddings(ReadFileBytes(path), path);
}

EmbeddingTable ExtractAllEmbeddings(model::LightCnn<float>& net,
                                    std::span<const corpus::ManifestEntry> entries,
                                    const FeatureSource& source, int workers) {
  std::vector<std::vector<float>> rows(entries.size());
  ParallelFor(entries.size(), workers, [&](size_t i) {
    rows[i] = net.ForwardEmbedding(source.Get(entries[i]));
  });
  EmbeddingTable table(net.config().embedding_dim());
  for (size_t i = 0; i < entries.size(); ++i) table.Add(entries[i].utt_id, std::move(rows[i]));
  return table;
}

}  // namespace dsv::trainer
