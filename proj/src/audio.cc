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

#include "zsdc/audio.h"

#include <algorithm>
#include <cmath>

#include "zsdc/error.h"
#include "zsdc/resample.h"

namespace zsdc {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kUnsupportedLayout: return "unsupported-layout";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kInsufficientLength: return "insufficient-length";
    case ErrorCode::kTrainingData: return "training-data";
    case ErrorCode::kIncompatibleLatent: return "incompatible-latent";
    case ErrorCode::kBadMagic: return "bad-magic";
    case ErrorCode::kTruncated: return "truncated";
    case ErrorCode::kVersionMismatch: return "version-mismatch";
    case ErrorCode::kRecordTooLarge: return "record-too-large";
    case ErrorCode::kRetriable: return "retriable";
    case ErrorCode::kProtocol: return "protocol";
    case ErrorCode::kCorpusIntegrity: return "corpus-integrity";
    case ErrorCode::kContractViolation: return "contract-violation";
    case ErrorCode::kUndefinedAuroc: return "undefined-auroc";
  }
  return "unknown";
}

void AudioClip::Validate() const {
  if (sample_rate <= 0) {
    Fail(ErrorCode::kInvalidArgument,
         "sample rate must be positive, got " + std::to_string(sample_rate));
  }
  for (size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i])) {
      Fail(ErrorCode::kInvalidArgument,
           "non-finite sample at index " + std::to_string(i));
    }
  }
}

double Mse(const AudioClip& reference, const AudioClip& candidate) {
  if (reference.samples.empty() || candidate.samples.empty()) {
    Fail(ErrorCode::kInvalidArgument, "mse needs two non-empty clips");
  }
  const AudioClip a = Canonicalize(reference);
  const AudioClip b = Canonicalize(candidate);
  const size_t n = std::min(a.samples.size(), b.samples.size());
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(a.samples[i]) - b.samples[i];
    sum += d * d;
  }
  return sum / static_cast<double>(n);
}

double Rms(const AudioClip& clip) {
  if (clip.samples.empty()) return 0.0;
  double sum = 0.0;
  for (float s : clip.samples) sum += static_cast<double>(s) * s;
  return std::sqrt(sum / static_cast<double>(clip.samples.size()));
}

}  // namespace zsdc
