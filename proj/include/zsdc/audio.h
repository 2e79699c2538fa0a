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

#ifndef ZSDC_AUDIO_H_
#define ZSDC_AUDIO_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace zsdc {

// Hi-Fi rate; every cross-rate comparison canonicalizes to it first.
inline constexpr int kCanonicalRate = 44100;
inline constexpr int kHalfRate = 22050;
inline constexpr int kQuarterRate = 11025;

// Mono waveform. Samples are nominally in [-1, 1].
struct AudioClip {
  std::vector<float> samples;
  int sample_rate = kCanonicalRate;
  std::optional<std::string> post_id;
  // UTC seconds.
  std::optional<int64_t> captured_at;

  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                           : 0.0;
  }

  // Throws kInvalidArgument on a non-positive rate or a non-finite sample.
  void Validate() const;

  bool operator==(const AudioClip&) const = default;
};

// Mean squared sample difference after both clips are resampled to
// kCanonicalRate and truncated to the shorter length.
double Mse(const AudioClip& reference, const AudioClip& candidate);

// Root mean square of the samples; 0 for an empty clip.
double Rms(const AudioClip& clip);

}  // namespace zsdc

#endif  // ZSDC_AUDIO_H_
