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

// The "ZSDC" latent bitstream. Layout (little-endian), 64-byte header:
//
//   0  magic "ZSDC"
//   4  u8  format version (1)
//   5  u8  index bits (log2 codebook size)
//   6  u8  RVQ stages
//   7  u8  post id length (<= 32)
//   8  u16 subvectors per frame
//  10  u16 codec version
//  12  i64 captured_at (UTC seconds)
//  20  u32 source sample rate
//  24  u32 frames
//  28  u32 samples at the canonical rate
//  32  32 bytes post id, zero padded
//  64  u16 gain code per frame
//      indices bit-packed LSB-first, frame-major, then subvector, then
//      stage; the last byte is zero padded.

#ifndef ZSDC_LATENT_H_
#define ZSDC_LATENT_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace zsdc {

inline constexpr size_t kLatentHeaderBytes = 64;
inline constexpr size_t kMaxPostIdBytes = 32;
inline constexpr uint8_t kLatentFormatVersion = 1;

struct LatentHeader {
  uint16_t codec_version = 1;
  std::string post_id;
  int64_t captured_at = 0;
  uint32_t source_rate = 0;
  uint32_t n_frames = 0;
  uint32_t n_samples = 0;
  uint8_t index_bits = 10;
  uint8_t n_stages = 2;
  uint16_t n_subvectors = 32;

  bool operator==(const LatentHeader&) const = default;
};

struct LatentCode {
  LatentHeader header;
  // One log-gain code per frame.
  std::vector<uint16_t> gains;
  // [n_frames x n_subvectors x n_stages], stage fastest.
  std::vector<uint16_t> indices;

  size_t index_at(size_t frame, size_t subvector, size_t stage) const {
    return (frame * header.n_subvectors + subvector) * header.n_stages + stage;
  }

  bool operator==(const LatentCode&) const = default;
};

// Exact serialized size for a latent with this shape.
size_t SerializedLatentBytes(uint32_t n_frames, uint16_t n_subvectors,
                             uint8_t n_stages, uint8_t index_bits);

// Throws kInvalidArgument if the latent is internally inconsistent.
std::vector<uint8_t> SerializeLatent(const LatentCode& z);

// Errors: kBadMagic, kTruncated, kVersionMismatch, or kFormat for any other
// malformed content. Never reads out of bounds.
LatentCode DeserializeLatent(std::span<const uint8_t> bytes);

}  // namespace zsdc

#endif  // ZSDC_LATENT_H_
