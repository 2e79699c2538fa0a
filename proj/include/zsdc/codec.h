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

// Transform + residual vector quantization codec.
//
// Encoder: canonicalize to 44.1 kHz, sine-window MDCT (hop = frame_size/2),
// per-frame RMS gain quantized to 16 bits in the log2 domain, then each
// gain-normalized subvector of the hop coefficients goes through n_stages
// residual codebooks. Decoder: sum the selected centroids, rescale, inverse
// MDCT with overlap-add, clamp to [-1, 1]. Output is always 44.1 kHz.

#ifndef ZSDC_CODEC_H_
#define ZSDC_CODEC_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "zsdc/audio.h"
#include "zsdc/latent.h"

namespace zsdc {

struct CodecSpec {
  int frame_size = 2048;
  int hop = 1024;
  int n_subvectors = 32;
  int n_stages = 2;
  int codebook_size = 1024;
  int byte_budget_per_second = 5120;

  int coefficients() const { return hop; }
  int subvector_dim() const { return hop / n_subvectors; }
  int index_bits() const;
  // 16 gain bits + n_subvectors * n_stages * index_bits per frame.
  int bits_per_frame() const;
  // At the canonical rate.
  double frames_per_second() const;
  double predicted_bytes_per_second() const;

  // Throws kInvalidArgument listing the first violated constraint.
  void Validate() const;

  bool operator==(const CodecSpec&) const = default;
};

// Log2 gain range covered by the 16-bit gain code. Code 0 is reserved for
// exact silence.
inline constexpr double kMinLog2Gain = -30.0;
inline constexpr double kMaxLog2Gain = 2.0;
uint16_t QuantizeGain(double gain);
double DequantizeGain(uint16_t code);

struct Codec {
  CodecSpec spec;
  // codebooks[subvector * n_stages + stage], each [dim x codebook_size]
  // with one centroid per column.
  std::vector<Eigen::MatrixXf> codebooks;
  uint16_t version = 1;

  const Eigen::MatrixXf& codebook(int subvector, int stage) const {
    return codebooks[static_cast<size_t>(subvector) * spec.n_stages + stage];
  }
  // Throws kInvalidArgument on missing/misshapen or non-finite codebooks.
  void Validate() const;
};

struct TrainReport {
  // Mean squared norm of the normalized subvectors left after each stage,
  // averaged over subvectors. Stage s trains on the residual of stage s-1.
  std::vector<double> stage_residual_energy;
  int training_frames = 0;
  std::vector<std::string> warnings;
};

struct TrainResult {
  Codec codec;
  TrainReport report;
};

inline constexpr int kKMeansIterations = 25;

// Requires at least 10 * codebook_size MDCT frames across the corpus
// (kTrainingData otherwise). Deterministic in `seed`.
TrainResult TrainCodec(const CodecSpec& spec, std::span<const AudioClip> corpus,
                       uint64_t seed, uint16_t version = 1);

LatentCode Encode(const Codec& codec, const AudioClip& clip);

// kIncompatibleLatent on a codec-version or layout mismatch or an
// out-of-range index.
AudioClip Decode(const Codec& codec, const LatentCode& z);

// Dequantized MDCT coefficients, row-major [n_frames x hop].
std::vector<double> ReconstructCoefficients(const Codec& codec,
                                            const LatentCode& z);

// coded / raw; lower is better.
double CompressionRatio(int64_t raw_bytes, int64_t coded_bytes);

// "ZSDM" model file: magic, u16 format (1), u16 codec version, six u32
// spec fields, then float-32 codebooks (subvector-major, then stage, then
// centroid, then dimension).
void SaveCodec(const Codec& codec, const std::filesystem::path& path);
Codec LoadCodec(const std::filesystem::path& path);
std::vector<uint8_t> SerializeCodec(const Codec& codec);
Codec DeserializeCodec(std::span<const uint8_t> bytes);

}  // namespace zsdc

#endif  // ZSDC_CODEC_H_
