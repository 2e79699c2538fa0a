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

// Fixtures and independent oracles shared by the test binaries. The oracles
// never call into the library code paths they are used to check.

#ifndef ZSDC_TESTS_TEST_SUPPORT_H_
#define ZSDC_TESTS_TEST_SUPPORT_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "zsdc/audio.h"
#include "zsdc/codec.h"

namespace zsdc::testing {

AudioClip Sine(double freq_hz, double seconds, int rate, double amplitude = 0.5);
AudioClip Silence(double seconds, int rate);

// Gaussian noise band-limited to [low_hz, high_hz] by summing random-phase
// sinusoids on a 1 Hz grid, normalized to the given RMS.
AudioClip BandNoise(double low_hz, double high_hz, double seconds, int rate,
                    double rms, uint64_t seed);

// Magnitude of the DFT of `x` at `freq_hz` (Goertzel recurrence).
double GoertzelMagnitude(const std::vector<float>& x, int rate, double freq_hz);

// Frequency in [lo, hi] (1 Hz grid) with the largest Goertzel magnitude.
double PeakFrequency(const std::vector<float>& x, int rate, double lo, double hi);

// Direct sum of squared differences over the common prefix.
double DirectMse(const std::vector<float>& a, const std::vector<float>& b);

// Default-spec codec trained on the generic corpus with `seed`. Training
// takes tens of seconds, so the model is cached under the test cache dir and
// shared across test binaries.
const Codec& TrainedCodec(uint64_t seed = 1234);

// Fresh empty directory under the test cache dir.
std::filesystem::path ScratchDir(const std::string& name);

}  // namespace zsdc::testing

#endif  // ZSDC_TESTS_TEST_SUPPORT_H_
