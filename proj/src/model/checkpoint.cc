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

#include "dsv/model/checkpoint.h"

#include <zlib.h>

#include "dsv/common/binary_io.h"

namespace dsv::model {

namespace {

constexpr char kMagic[] = "VDCK";
constexpr uint32_t kVersion = 1;

uint32_t Crc32(std::string_view bytes) {
  return static_cast<uint32_t>(
      crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(bytes.data()),
            static_cast<uInt>(bytes.size())));
}

std::string Describe(const tensor::Shape& s) { return tensor::ShapeString(s); }

}  // namespace

std::string EncodeCheckpoint(const LightCnn<float>& model, const TrainingMetadata& meta) {
  const ModelConfig& cfg = model.config();
  ByteWriter w;
  w.PutBytes(kMagic);
  w.PutU32(kVersion);
  w.PutU32(cfg.width.num);
  w.PutU32(cfg.width.den);
  w.PutU32(static_cast<uint32_t>(cfg.n_out));
  w.PutU64(cfg.seed);
  w.PutU32(meta.epochs);
  w.PutF64(meta.final_loss);
  w.PutString(meta.mode);
  w.PutString(meta.label_digest);
  w.PutU32(static_cast<uint32_t>(model.params().size()));
  for (const auto& p : model.params()) {
    w.PutString(p.name);
    w.PutU32(static_cast<uint32_t>(p.value.rank()));
    for (size_t d : p.value.shape) w.PutU32(static_cast<uint32_t>(d));
    w.PutF32Array(p.value.data);
  }
  const uint32_t crc = Crc32(w.bytes());
  w.PutU32(crc);
  return w.Release();
}

LoadedModel DecodeCheckpoint(const std::string& bytes, const std::string& name,
                             const std::optional<ModelConfig>& expected) {
  using Kind = CheckpointError::Kind;
  if (bytes.size() < 4 || bytes.compare(0, 4, kMagic) != 0) {
    throw CheckpointError(Kind::kFormat, name + ": not a VDCK checkpoint");
  }
  if (bytes.size() < 12) throw CheckpointError(Kind::kTruncated, name + ": truncated checkpoint");
  {
    ByteReader head(std::string_view(bytes).substr(4, 4), name);
    if (uint32_t v = head.GetU32(); v != kVersion) {
      throw CheckpointError(Kind::kVersion, name + ": checkpoint version " + std::to_string(v) +
                                                " is not supported (expected " +
                                                std::to_string(kVersion) + ")");
    }
  }
  const std::string_view body(bytes.data(), bytes.size() - 4);
  ByteReader tail(std::string_view(bytes).substr(bytes.size() - 4), name);
  if (tail.GetU32() != Crc32(body)) {
    throw CheckpointError(Kind::kChecksum, name + ": checksum mismatch (file corrupt or truncated)");
  }

  ByteReader r(body, name);
  r.GetBytes(8);
  ModelConfig cfg;
  TrainingMetadata meta;
  std::vector<tensor::Parameter<float>> stored;
  try {
    cfg.width.num = r.GetU32();
    cfg.width.den = r.GetU32();
    cfg.n_out = static_cast<int>(r.GetU32());
    cfg.seed = r.GetU64();
    meta.epochs = r.GetU32();
    meta.final_loss = r.GetF64();
    meta.mode = r.GetString();
    meta.label_digest = r.GetString();
    const uint32_t n = r.GetU32();
    for (uint32_t i = 0; i < n; ++i) {
      std::string pname = r.GetString();
      const uint32_t rank = r.GetU32();
      if (rank > 8) throw CheckpointError(Kind::kFormat, name + ": implausible rank");
      tensor::Shape shape(rank);
      for (auto& d : shape) d = r.GetU32();
      tensor::Tensor<float> t(shape);
      r.GetF32Array(t.data);
      stored.emplace_back(std::move(pname), std::move(t));
    }
  } catch (const CheckpointError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw CheckpointError(Kind::kTruncated, e.what());
  }
  if (!r.AtEnd()) throw CheckpointError(Kind::kFormat, name + ": trailing bytes before checksum");

  if (expected && !(expected->width == cfg.width && expected->n_out == cfg.n_out)) {
    throw CheckpointError(Kind::kShapeMismatch,
                          name + ": shape mismatch: checkpoint has width " + cfg.width.ToString() +
                              ", n_out " + std::to_string(cfg.n_out) + "; requested width " +
                              expected->width.ToString() + ", n_out " +
                              std::to_string(expected->n_out));
  }
  LoadedModel out{LightCnn<float>(cfg), meta};
  auto& params = out.model.params();
  if (params.size() != stored.size()) {
    throw CheckpointError(Kind::kShapeMismatch,
                          name + ": shape mismatch: " + std::to_string(stored.size()) +
                              " parameters stored, architecture has " +
                              std::to_string(params.size()));
  }
  for (size_t i = 0; i < params.size(); ++i) {
    if (params[i].name != stored[i].name || params[i].value.shape != stored[i].value.shape) {
      throw CheckpointError(Kind::kShapeMismatch,
                            name + ": shape mismatch at '" + stored[i].name + "' " +
                                Describe(stored[i].value.shape) + ", expected '" +
                                params[i].name + "' " + Describe(params[i].value.shape));
    }
    params[i].value = std::move(stored[i].value);
  }
  return out;
}

void SaveCheckpoint(const std::string& path, const LightCnn<float>& model,
                    const TrainingMetadata& meta) {
  WriteFileBytes(path, EncodeCheckpoint(model, meta));
}

LoadedModel LoadCheckpoint(const std::string& path, const std::optional<ModelConfig>& expected) {
  return DecodeCheckpoint(ReadFileBytes(path), path, expected);
}

}  // namespace dsv::model
