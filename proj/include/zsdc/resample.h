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

#ifndef ZSDC_RESAMPLE_H_
#define ZSDC_RESAMPLE_H_

#include "zsdc/audio.h"

namespace zsdc {

// Polyphase windowed-sinc resampler (Kaiser, beta 8.6).
//
// The filter spans 64 taps measured at the lower of the two rates, so
// each polyphase branch of an upsampler has exactly 64 taps and a
// decimator by M integrates 64 * M input samples per output. The cutoff
// sits just below the lower Nyquist frequency so the stop band starts
// at it.
//
// Output length is round(len * target / source). Returns an exact copy
// when the rates match, which makes resampling idempotent at a fixed rate.
AudioClip Resample(const AudioClip& clip, int target_rate);

// Convenience for the canonical Hi-Fi rate.
inline AudioClip Canonicalize(const AudioClip& clip) {
  return Resample(clip, kCanonicalRate);
}

}  // namespace zsdc

#endif  // ZSDC_RESAMPLE_H_
