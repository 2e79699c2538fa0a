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

#include "zsdc/codec.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "bytes.h"
#include "zsdc/error.h"
#include "zsdc/kmeans.h"
#include "zsdc/mdct.h"
#include "zsdc/resample.h"
#include "zsdc/rng.h"

namespace zsdc {
namespace {

constexpr char kModelMagic[] = "ZSDM";
constexpr uint16_t kModelFormat = 1;
constexpr int kGainBits = 16;
constexpr double kGainCodeMax = 65535.0;

// Per-frame RMS gains and gain-normalized coefficients, one matrix per
// subvector ([dim x n_frames]).
struct NormalizedFrames {
  std::vector<uint16_t> gain_codes;
  std::vector<Eigen::MatrixXf> subvectors;
};

NormalizedFrames Normalize(const CodecSpec& spec, std::span<const double> coefs,
                           int n_frames, NormalizedFrames* append_to = nullptr) {
  NormalizedFrames local;
  NormalizedFrames& out = append_to ? *append_to : local;
  const int dim = spec.subvector_dim();
  const int hop = spec.hop;
  const Eigen::Index offset =
      out.subvectors.empty() ? 0 : out.subvectors.front().cols();
  if (out.subvectors.empty()) out.subvectors.resize(spec.n_subvectors);
  for (auto& m : out.subvectors) m.conservativeResize(dim, offset + n_frames);
  for (int f = 0; f < n_frames; ++f) {
    const double* row = coefs.data() + static_cast<size_t>(f) * hop;
    double energy = 0.0;
    for (int k = 0; k < hop; ++k) energy += row[k] * row[k];
    const uint16_t code = QuantizeGain(std::sqrt(energy / hop));
    out.gain_codes.push_back(code);
    const double g = DequantizeGain(code);
    const double inv = g > 0.0 ? 1.0 / g : 0.0;
    for (int s = 0; s < spec.n_subvectors; ++s) {
      for (int d = 0; d < dim; ++d) {
        out.subvectors[s](d, offset + f) =
            static_cast<float>(row[s * dim + d] * inv);
      }
    }
  }
  return local;
}

void CheckLatentAgainst(const Codec& codec, const LatentCode& z) {
  const CodecSpec& spec = codec.spec;
  const LatentHeader& h = z.header;
  if (h.codec_version != codec.version) {
    Fail(ErrorCode::kIncompatibleLatent,
         "latent codec version " + std::to_string(h.codec_version) +
             " does not match codec version " + std::to_string(codec.version));
  }
  if (h.n_subvectors != spec.n_subvectors || h.n_stages != spec.n_stages ||
      h.index_bits != spec.index_bits()) {
    Fail(ErrorCode::kIncompatibleLatent, "latent layout does not match codec");
  }
  if (z.gains.size() != h.n_frames ||
      z.indices.size() !=
          static_cast<size_t>(h.n_frames) * h.n_subvectors * h.n_stages) {
    Fail(ErrorCode::kIncompatibleLatent, "latent arrays do not match header");
  }
  for (uint16_t i : z.indices) {
    if (i >= spec.codebook_size) {
      Fail(ErrorCode::kIncompatibleLatent,
           "codebook index " + std::to_string(i) + " out of range");
    }
  }
  if (h.n_frames < 1 ||
      static_cast<int64_t>(h.n_frames) !=
          MdctFrameCount(h.n_samples, spec.hop)) {
    Fail(ErrorCode::kIncompatibleLatent, "frame count does not match samples");
  }
}

}  // namespace

int CodecSpec::index_bits() const {
  return codebook_size > 0 ? std::countr_zero(static_cast<unsigned>(codebook_size))
                           : 0;
}

int CodecSpec::bits_per_frame() const {
  return kGainBits + n_subvectors * n_stages * index_bits();
}

double CodecSpec::frames_per_second() const {
  return static_cast<double>(kCanonicalRate) / hop;
}

double CodecSpec::predicted_bytes_per_second() const {
  return frames_per_second() * bits_per_frame() / 8.0;
}

void CodecSpec::Validate() const {
  auto bad = [](const std::string& what) {
    Fail(ErrorCode::kInvalidArgument, "invalid codec spec: " + what);
  };
  if (frame_size <= 0 || hop <= 0) bad("frame_size and hop must be positive");
  if (hop * 2 != frame_size) bad("hop must be frame_size / 2 (50% overlap)");
  if (hop % 2 != 0) bad("hop must be even");
  if (n_subvectors <= 0 || n_stages <= 0) bad("need at least one subvector and stage");
  if (frame_size % n_subvectors != 0 || hop % n_subvectors != 0) {
    bad("frame coefficients must split evenly into subvectors");
  }
  if (n_stages > 255 || n_subvectors > 65535) bad("too many stages or subvectors");
  if (codebook_size < 2 || !std::has_single_bit(static_cast<unsigned>(codebook_size)) ||
      codebook_size > 65536) {
    bad("codebook_size must be a power of two in [2, 65536]");
  }
  if (predicted_bytes_per_second() > byte_budget_per_second) {
    bad("predicted rate " + std::to_string(predicted_bytes_per_second()) +
        " B/s exceeds budget " + std::to_string(byte_budget_per_second));
  }
}

uint16_t QuantizeGain(double gain) {
  if (!(gain > 0.0)) return 0;
  const double t = (std::log2(gain) - kMinLog2Gain) / (kMaxLog2Gain - kMinLog2Gain);
  const double code = std::round(std::clamp(t, 0.0, 1.0) * kGainCodeMax);
  return static_cast<uint16_t>(code);
}

double DequantizeGain(uint16_t code) {
  if (code == 0) return 0.0;
  return std::exp2(kMinLog2Gain +
                   (kMaxLog2Gain - kMinLog2Gain) * (code / kGainCodeMax));
}

void Codec::Validate() const {
  spec.Validate();
  const size_t slots = static_cast<size_t>(spec.n_subvectors) * spec.n_stages;
  if (codebooks.size() != slots) {
    Fail(ErrorCode::kInvalidArgument, "codec is missing codebooks");
  }
  for (const auto& cb : codebooks) {
    if (cb.rows() != spec.subvector_dim() || cb.cols() != spec.codebook_size) {
      Fail(ErrorCode::kInvalidArgument, "codebook has the wrong shape");
    }
    if (!cb.allFinite()) {
      Fail(ErrorCode::kInvalidArgument, "codebook has a non-finite centroid");
    }
  }
}

TrainResult TrainCodec(const CodecSpec& spec, std::span<const AudioClip> corpus,
                       uint64_t seed, uint16_t version) {
  spec.Validate();
  const Mdct mdct(spec.hop);
  NormalizedFrames frames;
  for (const AudioClip& clip : corpus) {
    if (clip.samples.empty()) continue;
    const AudioClip canon = Canonicalize(clip);
    const std::vector<double> coefs = MdctAnalyze(mdct, canon.samples);
    Normalize(spec, coefs, MdctFrameCount(canon.samples.size(), spec.hop), &frames);
  }
  const int n_frames = static_cast<int>(frames.gain_codes.size());
  const int needed = 10 * spec.codebook_size;
  if (n_frames < needed) {
    Fail(ErrorCode::kTrainingData,
         "corpus yields " + std::to_string(n_frames) + " frames, need " +
             std::to_string(needed));
  }

  TrainResult result;
  result.codec.spec = spec;
  result.codec.version = version;
  result.codec.codebooks.resize(static_cast<size_t>(spec.n_subvectors) * spec.n_stages);
  result.report.training_frames = n_frames;
  result.report.stage_residual_energy.assign(spec.n_stages, 0.0);

  int degenerate_slots = 0;
  for (int s = 0; s < spec.n_subvectors; ++s) {
    Eigen::MatrixXf& residual = frames.subvectors[s];
    for (int t = 0; t < spec.n_stages; ++t) {
      const uint64_t slot_seed =
          DeriveSeed(seed, static_cast<uint64_t>(s) * 256 + static_cast<uint64_t>(t));
      KMeansResult km = KMeans(residual, spec.codebook_size, kKMeansIterations, slot_seed);
      if (km.degenerate) ++degenerate_slots;
      for (Eigen::Index i = 0; i < residual.cols(); ++i) {
        residual.col(i) -= km.centroids.col(km.assignment[i]);
      }
      result.report.stage_residual_energy[t] +=
          static_cast<double>(residual.colwise().squaredNorm().sum()) /
          residual.cols() / spec.n_subvectors;
      result.codec.codebooks[static_cast<size_t>(s) * spec.n_stages + t] =
          std::move(km.centroids);
    }
  }
  if (degenerate_slots > 0) {
    result.report.warnings.push_back(
        "degenerate corpus: " + std::to_string(degenerate_slots) +
        " codebooks collapsed to a single point (all training vectors identical)");
  }
  return result;
}

LatentCode Encode(const Codec& codec, const AudioClip& clip) {
  clip.Validate();
  if (clip.samples.empty()) Fail(ErrorCode::kInvalidArgument, "cannot encode an empty clip");
  const CodecSpec& spec = codec.spec;
  if (clip.post_id && clip.post_id->size() > kMaxPostIdBytes) {
    Fail(ErrorCode::kInvalidArgument, "post id longer than 32 bytes");
  }

  const AudioClip canon = Canonicalize(clip);
  const Mdct mdct(spec.hop);
  const std::vector<double> coefs = MdctAnalyze(mdct, canon.samples);
  const int n_frames = MdctFrameCount(canon.samples.size(), spec.hop);
  NormalizedFrames frames = Normalize(spec, coefs, n_frames);

  LatentCode z;
  LatentHeader& h = z.header;
  h.codec_version = codec.version;
  h.post_id = clip.post_id.value_or("");
  h.captured_at = clip.captured_at.value_or(0);
  h.source_rate = static_cast<uint32_t>(clip.sample_rate);
  h.n_frames = static_cast<uint32_t>(n_frames);
  h.n_samples = static_cast<uint32_t>(canon.samples.size());
  h.index_bits = static_cast<uint8_t>(spec.index_bits());
  h.n_stages = static_cast<uint8_t>(spec.n_stages);
  h.n_subvectors = static_cast<uint16_t>(spec.n_subvectors);
  z.gains = std::move(frames.gain_codes);
  z.indices.resize(static_cast<size_t>(n_frames) * spec.n_subvectors * spec.n_stages);

  std::vector<int> nearest;
  for (int s = 0; s < spec.n_subvectors; ++s) {
    Eigen::MatrixXf& residual = frames.subvectors[s];
    for (int t = 0; t < spec.n_stages; ++t) {
      const Eigen::MatrixXf& cb = codec.codebook(s, t);
      const Eigen::VectorXf norms = cb.colwise().squaredNorm().transpose();
      NearestCentroids(cb, norms, residual, &nearest, nullptr);
      for (int f = 0; f < n_frames; ++f) {
        residual.col(f) -= cb.col(nearest[f]);
        z.indices[z.index_at(f, s, t)] = static_cast<uint16_t>(nearest[f]);
      }
    }
  }
  return z;
}

std::vector<double> ReconstructCoefficients(const Codec& codec, const LatentCode& z) {
  CheckLatentAgainst(codec, z);
  const CodecSpec& spec = codec.spec;
  const int dim = spec.subvector_dim();
  const int n_frames = static_cast<int>(z.header.n_frames);
  std::vector<double> coefs(static_cast<size_t>(n_frames) * spec.hop, 0.0);
  Eigen::VectorXf v(dim);
  for (int f = 0; f < n_frames; ++f) {
    const double g = DequantizeGain(z.gains[f]);
    if (g == 0.0) continue;
    double* row = coefs.data() + static_cast<size_t>(f) * spec.hop;
    for (int s = 0; s < spec.n_subvectors; ++s) {
      v.setZero();
      for (int t = 0; t < spec.n_stages; ++t) {
        v += codec.codebook(s, t).col(z.indices[z.index_at(f, s, t)]);
      }
      for (int d = 0; d < dim; ++d) row[s * dim + d] = g * v[d];
    }
  }
  return coefs;
}

AudioClip Decode(const Codec& codec, const LatentCode& z) {
  const std::vector<double> coefs = ReconstructCoefficients(codec, z);
  const Mdct mdct(codec.spec.hop);
  const std::vector<double> samples = MdctSynthesize(
      mdct, coefs, static_cast<int>(z.header.n_frames), z.header.n_samples);
  AudioClip out;
  out.sample_rate = kCanonicalRate;
  if (!z.header.post_id.empty()) out.post_id = z.header.post_id;
  out.captured_at = z.header.captured_at;
  out.samples.resize(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    const double s = std::isfinite(samples[i]) ? samples[i] : 0.0;
    out.samples[i] = static_cast<float>(std::clamp(s, -1.0, 1.0));
  }
  return out;
}

double CompressionRatio(int64_t raw_bytes, int64_t coded_bytes) {
  if (raw_bytes <= 0 || coded_bytes <= 0) {
    Fail(ErrorCode::kInvalidArgument, "compression ratio needs positive sizes");
  }
  return static_cast<double>(coded_bytes) / static_cast<double>(raw_bytes);
}

std::vector<uint8_t> SerializeCodec(const Codec& codec) {
  codec.Validate();
  const CodecSpec& s = codec.spec;
  std::vector<uint8_t> out;
  internal::ByteWriter w(&out);
  w.PutBytes(kModelMagic);
  w.Put<uint16_t>(kModelFormat);
  w.Put<uint16_t>(codec.version);
  for (int v : {s.frame_size, s.hop, s.n_subvectors, s.n_stages, s.codebook_size,
                s.byte_budget_per_second}) {
    w.Put<uint32_t>(static_cast<uint32_t>(v));
  }
  for (const auto& cb : codec.codebooks) {
    // Column-major storage: centroid-major, dimension fastest.
    for (Eigen::Index i = 0; i < cb.size(); ++i) w.Put<float>(cb.data()[i]);
  }
  return out;
}

Codec DeserializeCodec(std::span<const uint8_t> bytes) {
  internal::ByteReader in(bytes);
  if (bytes.size() < 4 || std::string(bytes.begin(), bytes.begin() + 4) != kModelMagic) {
    Fail(ErrorCode::kBadMagic, "codec model does not start with ZSDM");
  }
  in.GetBytes(4);
  const uint16_t format = in.Get<uint16_t>();
  if (format != kModelFormat) {
    Fail(ErrorCode::kVersionMismatch,
         "unsupported codec model format " + std::to_string(format));
  }
  Codec codec;
  codec.version = in.Get<uint16_t>();
  CodecSpec& s = codec.spec;
  s.frame_size = static_cast<int>(in.Get<uint32_t>());
  s.hop = static_cast<int>(in.Get<uint32_t>());
  s.n_subvectors = static_cast<int>(in.Get<uint32_t>());
  s.n_stages = static_cast<int>(in.Get<uint32_t>());
  s.codebook_size = static_cast<int>(in.Get<uint32_t>());
  s.byte_budget_per_second = static_cast<int>(in.Get<uint32_t>());
  s.Validate();
  const size_t per_book = static_cast<size_t>(s.subvector_dim()) * s.codebook_size;
  const size_t books = static_cast<size_t>(s.n_subvectors) * s.n_stages;
  if (in.remaining() != books * per_book * 4) {
    Fail(in.remaining() < books * per_book * 4 ? ErrorCode::kTruncated
                                               : ErrorCode::kFormat,
         "codec model payload has the wrong size");
  }
  codec.codebooks.resize(books);
  for (auto& cb : codec.codebooks) {
    cb.resize(s.subvector_dim(), s.codebook_size);
    for (Eigen::Index i = 0; i < cb.size(); ++i) cb.data()[i] = in.Get<float>();
  }
  codec.Validate();
  return codec;
}

void SaveCodec(const Codec& codec, const std::filesystem::path& path) {
  const std::vector<uint8_t> bytes = SerializeCodec(codec);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) Fail(ErrorCode::kIo, "cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

Codec LoadCodec(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) Fail(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                             std::istreambuf_iterator<char>());
  return DeserializeCodec(bytes);
}

}  // namespace zsdc
