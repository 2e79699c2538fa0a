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

#include "zsdc/latent.h"

#include <string>

#include "bytes.h"
#include "zsdc/error.h"

namespace zsdc {
namespace {

constexpr char kMagic[] = "ZSDC";

size_t IndexCount(const LatentHeader& h) {
  return static_cast<size_t>(h.n_frames) * h.n_subvectors * h.n_stages;
}

void CheckShape(const LatentCode& z) {
  const LatentHeader& h = z.header;
  if (h.index_bits == 0 || h.index_bits > 16) {
    Fail(ErrorCode::kInvalidArgument, "index bits must be in [1, 16]");
  }
  if (h.post_id.size() > kMaxPostIdBytes) {
    Fail(ErrorCode::kInvalidArgument, "post id longer than 32 bytes");
  }
  if (z.gains.size() != h.n_frames || z.indices.size() != IndexCount(h)) {
    Fail(ErrorCode::kInvalidArgument, "latent arrays do not match header");
  }
  const uint32_t limit = 1u << h.index_bits;
  for (uint16_t i : z.indices) {
    if (i >= limit) Fail(ErrorCode::kInvalidArgument, "index exceeds index bits");
  }
}

}  // namespace

size_t SerializedLatentBytes(uint32_t n_frames, uint16_t n_subvectors,
                             uint8_t n_stages, uint8_t index_bits) {
  const uint64_t bits =
      static_cast<uint64_t>(n_frames) * n_subvectors * n_stages * index_bits;
  return kLatentHeaderBytes + 2 * static_cast<size_t>(n_frames) +
         static_cast<size_t>((bits + 7) / 8);
}

std::vector<uint8_t> SerializeLatent(const LatentCode& z) {
  CheckShape(z);
  const LatentHeader& h = z.header;
  std::vector<uint8_t> out;
  out.reserve(SerializedLatentBytes(h.n_frames, h.n_subvectors, h.n_stages,
                                    h.index_bits));
  internal::ByteWriter w(&out);
  w.PutBytes(kMagic);
  w.Put<uint8_t>(kLatentFormatVersion);
  w.Put<uint8_t>(h.index_bits);
  w.Put<uint8_t>(h.n_stages);
  w.Put<uint8_t>(static_cast<uint8_t>(h.post_id.size()));
  w.Put<uint16_t>(h.n_subvectors);
  w.Put<uint16_t>(h.codec_version);
  w.Put<int64_t>(h.captured_at);
  w.Put<uint32_t>(h.source_rate);
  w.Put<uint32_t>(h.n_frames);
  w.Put<uint32_t>(h.n_samples);
  w.PutBytes(h.post_id);
  for (size_t i = h.post_id.size(); i < kMaxPostIdBytes; ++i) w.Put<uint8_t>(0);
  for (uint16_t g : z.gains) w.Put<uint16_t>(g);

  uint64_t acc = 0;
  int filled = 0;
  for (uint16_t index : z.indices) {
    acc |= static_cast<uint64_t>(index) << filled;
    filled += h.index_bits;
    while (filled >= 8) {
      out.push_back(static_cast<uint8_t>(acc & 0xFF));
      acc >>= 8;
      filled -= 8;
    }
  }
  if (filled > 0) out.push_back(static_cast<uint8_t>(acc & 0xFF));
  return out;
}

LatentCode DeserializeLatent(std::span<const uint8_t> bytes) {
  if (bytes.size() >= 4 && std::string(bytes.begin(), bytes.begin() + 4) != kMagic) {
    Fail(ErrorCode::kBadMagic, "latent does not start with ZSDC");
  }
  internal::ByteReader in(bytes);
  if (bytes.size() < kLatentHeaderBytes) {
    Fail(ErrorCode::kTruncated, "latent shorter than its 64-byte header");
  }
  in.GetBytes(4);
  const uint8_t format = in.Get<uint8_t>();
  if (format != kLatentFormatVersion) {
    Fail(ErrorCode::kVersionMismatch,
         "unsupported latent format version " + std::to_string(format));
  }
  LatentCode z;
  LatentHeader& h = z.header;
  h.index_bits = in.Get<uint8_t>();
  h.n_stages = in.Get<uint8_t>();
  const uint8_t post_len = in.Get<uint8_t>();
  h.n_subvectors = in.Get<uint16_t>();
  h.codec_version = in.Get<uint16_t>();
  h.captured_at = in.Get<int64_t>();
  h.source_rate = in.Get<uint32_t>();
  h.n_frames = in.Get<uint32_t>();
  h.n_samples = in.Get<uint32_t>();
  auto post = in.GetBytes(kMaxPostIdBytes);
  if (h.index_bits == 0 || h.index_bits > 16) {
    Fail(ErrorCode::kFormat, "index bits out of range");
  }
  if (post_len > kMaxPostIdBytes) Fail(ErrorCode::kFormat, "post id too long");
  for (size_t i = post_len; i < kMaxPostIdBytes; ++i) {
    if (post[i] != 0) Fail(ErrorCode::kFormat, "post id padding is not zero");
  }
  h.post_id.assign(post.begin(), post.begin() + post_len);

  const size_t expected = SerializedLatentBytes(h.n_frames, h.n_subvectors,
                                                h.n_stages, h.index_bits);
  if (bytes.size() < expected) {
    Fail(ErrorCode::kTruncated, "latent payload is truncated");
  }
  if (bytes.size() > expected) {
    Fail(ErrorCode::kFormat, "trailing bytes after latent payload");
  }

  z.gains.resize(h.n_frames);
  for (uint16_t& g : z.gains) g = in.Get<uint16_t>();

  const size_t count = IndexCount(h);
  z.indices.resize(count);
  auto packed = in.GetBytes(in.remaining());
  const uint64_t mask = (1u << h.index_bits) - 1;
  uint64_t acc = 0;
  int filled = 0;
  size_t pos = 0;
  for (size_t i = 0; i < count; ++i) {
    while (filled < h.index_bits) {
      acc |= static_cast<uint64_t>(packed[pos++]) << filled;
      filled += 8;
    }
    z.indices[i] = static_cast<uint16_t>(acc & mask);
    acc >>= h.index_bits;
    filled -= h.index_bits;
  }
  if (acc != 0) Fail(ErrorCode::kFormat, "nonzero padding bits");
  return z;
}

}  // namespace zsdc
