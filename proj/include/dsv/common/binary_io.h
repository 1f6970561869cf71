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

#ifndef DSV_COMMON_BINARY_IO_H_
#define DSV_COMMON_BINARY_IO_H_

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dsv {

// Little-endian byte sink. All on-disk formats of the toolkit go through
// this so files are identical regardless of host endianness.
class ByteWriter {
 public:
  void PutBytes(std::string_view bytes) { buf_.append(bytes); }
  void PutU32(uint32_t v);
  void PutU64(uint64_t v);
  void PutF32(float v);
  void PutF64(double v);
  void PutF32Array(std::span<const float> values);
  // u32 length followed by raw bytes.
  void PutString(std::string_view s);

  const std::string& bytes() const { return buf_; }
  std::string&& Release() { return std::move(buf_); }

 private:
  std::string buf_;
};

// Bounds-checked little-endian reader. Running off the end throws
// InvalidInput with `context` in the message.
class ByteReader {
 public:
  ByteReader(std::string_view data, std::string context)
      : data_(data), context_(std::move(context)) {}

  std::string_view GetBytes(size_t n);
  uint32_t GetU32();
  uint64_t GetU64();
  float GetF32();
  double GetF64();
  void GetF32Array(std::span<float> out);
  std::string GetString();

  size_t position() const { return pos_; }
  size_t remaining() const { return data_.size() - pos_; }
  bool AtEnd() const { return pos_ == data_.size(); }

 private:
  void Need(size_t n) const;

  std::string_view data_;
  std::string context_;
  size_t pos_ = 0;
};

std::string ReadFileBytes(const std::string& path);
void WriteFileBytes(const std::string& path, std::string_view bytes);

}  // namespace dsv

#endif  // DSV_COMMON_BINARY_IO_H_
