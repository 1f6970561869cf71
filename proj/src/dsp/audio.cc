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

#include "dsv/dsp/audio.h"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "dsv/common/binary_io.h"

namespace dsv::dsp {

namespace {

constexpr uint16_t kFormatPcm = 1;

WavError Malformed(const std::string& name, const std::string& why) {
  return WavError(WavError::Kind::kMalformedHeader,
                  name + ": malformed WAV header: " + why);
}

}  // namespace

AudioBuffer ParseWav(const std::string& bytes, const std::string& name) {
  ByteReader r(bytes, name);
  if (bytes.size() < 12 || r.GetBytes(4) != "RIFF") {
    throw Malformed(name, "missing RIFF tag");
  }
  r.GetU32();  // riff size, not trusted
  if (r.GetBytes(4) != "WAVE") throw Malformed(name, "missing WAVE tag");

  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  while (r.remaining() >= 8) {
    std::string id(r.GetBytes(4));
    uint32_t size = r.GetU32();
    if (id == "fmt ") {
      if (size < 16 || size > r.remaining()) throw Malformed(name, "bad fmt chunk");
      ByteReader fmt(r.GetBytes(size), name);
      uint32_t w0 = fmt.GetU32();
      format = static_cast<uint16_t>(w0 & 0xffff);
      channels = static_cast<uint16_t>(w0 >> 16);
      rate = fmt.GetU32();
      fmt.GetU32();  // byte rate
      uint32_t w3 = fmt.GetU32();
      bits = static_cast<uint16_t>(w3 >> 16);
      have_fmt = true;
      if (size % 2 == 1 && r.remaining() > 0) r.GetBytes(1);
    } else if (id == "data") {
      if (!have_fmt) throw Malformed(name, "data chunk before fmt chunk");
      if (format != kFormatPcm || bits != 16) {
        throw WavError(WavError::Kind::kUnsupportedEncoding,
                       name + ": unsupported encoding (format " +
                           std::to_string(format) + ", " +
                           std::to_string(bits) +
                           " bits); need 16-bit PCM");
      }
      if (channels != 1) {
        throw WavError(WavError::Kind::kUnsupportedChannelCount,
                       name + ": unsupported channel count " +
                           std::to_string(channels));
      }
      if (rate == 0) throw Malformed(name, "zero sample rate");
      if (size > r.remaining()) throw Malformed(name, "data chunk truncated");
      if (size < 2) {
        throw WavError(WavError::Kind::kEmptyPayload, name + ": empty payload");
      }
      AudioBuffer audio;
      audio.sample_rate = static_cast<int>(rate);
      audio.samples.resize(size / 2);
      for (float& s : audio.samples) {
        uint32_t lo = static_cast<unsigned char>(r.GetBytes(1)[0]);
        uint32_t hi = static_cast<unsigned char>(r.GetBytes(1)[0]);
        auto v = static_cast<int16_t>(static_cast<uint16_t>(lo | (hi << 8)));
        s = static_cast<float>(v) / 32768.0f;
      }
      return audio;
    } else {
      if (size > r.remaining()) throw Malformed(name, "chunk '" + id + "' truncated");
      r.GetBytes(size);
      if (size % 2 == 1 && r.remaining() > 0) r.GetBytes(1);
    }
  }
  if (!have_fmt) throw Malformed(name, "no fmt chunk");
  throw Malformed(name, "no data chunk");
}

AudioBuffer ReadWav(const std::string& path) {
  return ParseWav(ReadFileBytes(path), path);
}

std::string EncodeWav(const AudioBuffer& audio) {
  if (audio.sample_rate <= 0) throw InvalidInput("EncodeWav: sample rate must be > 0");
  const auto data_bytes = static_cast<uint32_t>(2 * audio.samples.size());
  ByteWriter w;
  w.PutBytes("RIFF");
  w.PutU32(36 + data_bytes);
  w.PutBytes("WAVE");
  w.PutBytes("fmt ");
  w.PutU32(16);
  w.PutU32(kFormatPcm | (1u << 16));
  w.PutU32(static_cast<uint32_t>(audio.sample_rate));
  w.PutU32(static_cast<uint32_t>(audio.sample_rate) * 2);
  w.PutU32(2u | (16u << 16));
  w.PutBytes("data");
  w.PutU32(data_bytes);
  std::string payload(data_bytes, '\0');
  for (size_t i = 0; i < audio.samples.size(); ++i) {
    double v = std::nearbyint(static_cast<double>(audio.samples[i]) * 32768.0);
    auto q = static_cast<int16_t>(std::clamp(v, -32768.0, 32767.0));
    auto u = static_cast<uint16_t>(q);
    payload[2 * i] = static_cast<char>(u & 0xff);
    payload[2 * i + 1] = static_cast<char>(u >> 8);
  }
  w.PutBytes(payload);
  return w.Release();
}

void WriteWav(const std::string& path, const AudioBuffer& audio) {
  WriteFileBytes(path, EncodeWav(audio));
}

AudioBuffer Slice(const AudioBuffer& audio, double start_s, double end_s) {
  if (!(end_s > start_s)) throw InvalidInput("Slice: end must exceed start");
  const auto n = static_cast<long>(audio.samples.size());
  long b = std::clamp(std::lround(start_s * audio.sample_rate), 0L, n);
  long e = std::clamp(std::lround(end_s * audio.sample_rate), 0L, n);
  AudioBuffer out;
  out.sample_rate = audio.sample_rate;
  out.samples.assign(audio.samples.begin() + b, audio.samples.begin() + e);
  return out;
}

}  // namespace dsv::dsp
