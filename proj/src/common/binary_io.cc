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

#include "dsv/common/binary_io.h"

#include <bit>
#include <fstream>
#include <sstream>

#include "dsv/common/error.h"

namespace dsv {

namespace {

template <typename U>
void AppendLe(std::string* buf, U v) {
  for (size_t i = 0; i < sizeof(U); ++i) {
    buf->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

template <typename U>
U LoadLe(const char* p) {
  U v = 0;
  for (size_t i = 0; i < sizeof(U); ++i) {
    v |= static_cast<U>(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  return v;
}

}  // namespace

void ByteWriter::PutU32(uint32_t v) { AppendLe(&buf_, v); }
void ByteWriter::PutU64(uint64_t v) { AppendLe(&buf_, v); }
void ByteWriter::PutF32(float v) { AppendLe(&buf_, std::bit_cast<uint32_t>(v)); }
void ByteWriter::PutF64(double v) { AppendLe(&buf_, std::bit_cast<uint64_t>(v)); }

void ByteWriter::PutF32Array(std::span<const float> values) {
  buf_.reserve(buf_.size() + 4 * values.size());
  for (float v : values) PutF32(v);
}

void ByteWriter::PutString(std::string_view s) {
  PutU32(static_cast<uint32_t>(s.size()));
  buf_.append(s);
}

void ByteReader::Need(size_t n) const {
  if (n > remaining()) {
    throw InvalidInput(context_ + ": truncated data (need " + std::to_string(n) +
                       " bytes at offset " + std::to_string(pos_) + ", have " +
                       std::to_string(remaining()) + ")");
  }
}

std::string_view ByteReader::GetBytes(size_t n) {
  Need(n);
  std::string_view out = data_.substr(pos_, n);
  pos_ += n;
  return out;
}

uint32_t ByteReader::GetU32() { return LoadLe<uint32_t>(GetBytes(4).data()); }
uint64_t ByteReader::GetU64() { return LoadLe<uint64_t>(GetBytes(8).data()); }
float ByteReader::GetF32() { return std::bit_cast<float>(GetU32()); }
double ByteReader::GetF64() { return std::bit_cast<double>(GetU64()); }

void ByteReader::GetF32Array(std::span<float> out) {
  Need(4 * out.size());
  for (float& v : out) v = GetF32();
}

std::string ByteReader::GetString() {
  uint32_t n = GetU32();
  return std::string(GetBytes(n));
}

std::string ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void WriteFileBytes(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw RuntimeFailure("write failed: " + path);
}

}  // namespace dsv
