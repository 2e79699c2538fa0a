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

#ifndef ZSDC_MEL_H_
#define ZSDC_MEL_H_

#include <cstddef>
#include <vector>

#include "zsdc/audio.h"

namespace zsdc {

inline constexpr int kDefaultNfft = 1024;
inline constexpr int kDefaultHop = 512;
inline constexpr int kDefaultMels = 64;
inline constexpr double kLogMelEpsilon = 1e-10;

// Row-major [n_frames x n_mels] matrix of log10(mel power + 1e-10).
struct MelFrames {
  std::vector<double> values;
  int n_frames = 0;
  int n_fft = kDefaultNfft;
  int hop = kDefaultHop;
  int n_mels = kDefaultMels;
  int source_rate = kCanonicalRate;

  double at(int frame, int band) const {
    return values[static_cast<size_t>(frame) * n_mels + band];
  }
};

// Triangular filter geometry in Hz (HTK mel scale, 0 Hz to Nyquist).
struct MelBand {
  double lower_hz;
  double center_hz;
  double upper_hz;
};
std::vector<MelBand> MelBandLayout(int n_mels, int sample_rate);

// floor((len - n_fft) / hop) + 1; requires len >= n_fft.
int MelFrameCount(size_t n_samples, int n_fft, int hop);

// Hann-windowed STFT power -> mel filterbank -> log10(x + 1e-10).
// Throws kInsufficientLength when the clip is shorter than n_fft.
MelFrames MelSpectrogram(const AudioClip& clip, int n_fft = kDefaultNfft,
                         int hop = kDefaultHop, int n_mels = kDefaultMels);

// Linear mel power summed over all frames, per band.
std::vector<double> MelBandEnergy(const MelFrames& mel);

// Fraction of linear mel energy in bands whose lower edge is at or above
// `cutoff_hz`.
double MelEnergyFractionAbove(const MelFrames& mel, double cutoff_hz);

}  // namespace zsdc

#endif  // ZSDC_MEL_H_
