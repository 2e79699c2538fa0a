// Copyright 2026 The ZSDC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "zsdc/wav.h"

#include <fstream>
#include <iterator>
#include <string>

#include "bytes.h"
#include "zsdc/error.h"

namespace zsdc {
namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

AudioClip ParseWav(std::span<const uint8_t> bytes) {
  internal::ByteReader in(bytes);
  try {
    if (in.GetString(4) != "RIFF") Fail(ErrorCode::kFormat, "missing RIFF tag");
    in.Get<uint32_t>();  // riff size; not trusted
    if (in.GetString(4) != "WAVE") Fail(ErrorCode::kFormat, "missing WAVE tag");

    bool have_fmt = false;
    uint16_t format = 0, channels = 0, bits = 0;
    uint32_t rate = 0;
    while (true) {
      const std::string id = in.GetString(4);
      const uint32_t size = in.Get<uint32_t>();
      if (id == "fmt ") {
        if (size < 16) Fail(ErrorCode::kFormat, "fmt chunk too short");
        auto fmt = in.GetBytes(size);
        internal::ByteReader f(fmt);
        format = f.Get<uint16_t>();
        channels = f.Get<uint16_t>();
        rate = f.Get<uint32_t>();
        f.Get<uint32_t>();  // byte rate
        f.Get<uint16_t>();  // block align
        bits = f.Get<uint16_t>();
        if (format == kFormatExtensible && size >= 40) {
          f.Get<uint16_t>();  // cb size
          f.Get<uint16_t>();  // valid bits
          f.Get<uint32_t>();  // channel mask
          format = f.Get<uint16_t>();  // first two bytes of the subformat GUID
        }
        if (size % 2 == 1 && in.remaining() > 0) in.GetBytes(1);
        have_fmt = true;
      } else if (id == "data") {
        if (!have_fmt) Fail(ErrorCode::kFormat, "data chunk before fmt chunk");
        if (channels != 1) {
          Fail(ErrorCode::kUnsupportedLayout,
               "only mono is supported, file has " + std::to_string(channels) +
                   " channels");
        }
        if (rate == 0) Fail(ErrorCode::kFormat, "zero sample rate");
        AudioClip clip;
        clip.sample_rate = static_cast<int>(rate);
        if (format == kFormatFloat && bits == 32) {
          if (size % 4 != 0) Fail(ErrorCode::kFormat, "ragged float data");
          clip.samples.resize(size / 4);
          for (float& s : clip.samples) s = in.Get<float>();
        } else if (format == kFormatPcm && bits == 16) {
          if (size % 2 != 0) Fail(ErrorCode::kFormat, "ragged pcm data");
          clip.samples.resize(size / 2);
          for (float& s : clip.samples) {
            s = static_cast<float>(in.Get<int16_t>()) / 32768.0f;
          }
        } else {
          Fail(ErrorCode::kFormat, "unsupported sample format " +
                                       std::to_string(format) + "/" +
                                       std::to_string(bits) + " bits");
        }
        return clip;
      } else {
        in.GetBytes(size + (size % 2));
      }
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kTruncated) {
      Fail(ErrorCode::kFormat, std::string("truncated wav: ") + e.what());
    }
    throw;
  }
}

AudioClip LoadWav(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) Fail(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(file)),
                             std::istreambuf_iterator<char>());
  return ParseWav(bytes);
}

std::vector<uint8_t> EncodeWav(const AudioClip& clip) {
  clip.Validate();
  const uint32_t data_bytes = static_cast<uint32_t>(4 * clip.samples.size());
  std::vector<uint8_t> out;
  out.reserve(WavFileBytes(clip.samples.size()));
  internal::ByteWriter w(&out);
  w.PutBytes("RIFF");
  w.Put<uint32_t>(36 + data_bytes);
  w.PutBytes("WAVE");
  w.PutBytes("fmt ");
  w.Put<uint32_t>(16);
  w.Put<uint16_t>(kFormatFloat);
  w.Put<uint16_t>(1);
  w.Put<uint32_t>(static_cast<uint32_t>(clip.sample_rate));
  w.Put<uint32_t>(static_cast<uint32_t>(clip.sample_rate) * 4);
  w.Put<uint16_t>(4);
  w.Put<uint16_t>(32);
  w.PutBytes("data");
  w.Put<uint32_t>(data_bytes);
  for (float s : clip.samples) w.Put<float>(s);
  return out;
}

size_t SaveWav(const AudioClip& clip, const std::filesystem::path& path) {
  const std::vector<uint8_t> bytes = EncodeWav(clip);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) Fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  file.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
  if (!file) Fail(ErrorCode::kIo, "write failed for " + path.string());
  return bytes.size();
}

}  // namespace zsdc
