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

#include "zsdc/mel.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "fft.h"
#include "zsdc/error.h"

namespace zsdc {
namespace {

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

// [n_mels x (n_fft/2 + 1)] triangular weights, row-major.
std::vector<double> Filterbank(int n_mels, int n_fft, int sample_rate) {
  const int n_bins = n_fft / 2 + 1;
  const std::vector<MelBand> bands = MelBandLayout(n_mels, sample_rate);
  std::vector<double> weights(static_cast<size_t>(n_mels) * n_bins, 0.0);
  for (int m = 0; m < n_mels; ++m) {
    const MelBand& b = bands[m];
    for (int k = 0; k < n_bins; ++k) {
      const double hz = static_cast<double>(k) * sample_rate / n_fft;
      double w = 0.0;
      if (hz > b.lower_hz && hz <= b.center_hz) {
        w = (hz - b.lower_hz) / (b.center_hz - b.lower_hz);
      } else if (hz > b.center_hz && hz < b.upper_hz) {
        w = (b.upper_hz - hz) / (b.upper_hz - b.center_hz);
      }
      weights[static_cast<size_t>(m) * n_bins + k] = w;
    }
  }
  return weights;
}

}  // namespace

std::vector<MelBand> MelBandLayout(int n_mels, int sample_rate) {
  if (n_mels <= 0 || sample_rate <= 0) {
    Fail(ErrorCode::kInvalidArgument, "n_mels and sample_rate must be positive");
  }
  const double top = HzToMel(sample_rate / 2.0);
  std::vector<double> edges(n_mels + 2);
  for (int i = 0; i < n_mels + 2; ++i) {
    edges[i] = MelToHz(top * i / (n_mels + 1));
  }
  std::vector<MelBand> bands(n_mels);
  for (int m = 0; m < n_mels; ++m) {
    bands[m] = {edges[m], edges[m + 1], edges[m + 2]};
  }
  return bands;
}

int MelFrameCount(size_t n_samples, int n_fft, int hop) {
  if (n_samples < static_cast<size_t>(n_fft)) return 0;
  return static_cast<int>((n_samples - n_fft) / hop) + 1;
}

MelFrames MelSpectrogram(const AudioClip& clip, int n_fft, int hop,
                         int n_mels) {
  if (n_fft <= 1 || hop <= 0 || n_mels <= 0) {
    Fail(ErrorCode::kInvalidArgument, "invalid mel parameters");
  }
  clip.Validate();
  if (clip.samples.size() < static_cast<size_t>(n_fft)) {
    Fail(ErrorCode::kInsufficientLength,
         "clip has " + std::to_string(clip.samples.size()) +
             " samples, mel spectrogram needs at least " +
             std::to_string(n_fft));
  }

  MelFrames mel;
  mel.n_fft = n_fft;
  mel.hop = hop;
  mel.n_mels = n_mels;
  mel.source_rate = clip.sample_rate;
  mel.n_frames = MelFrameCount(clip.samples.size(), n_fft, hop);
  mel.values.resize(static_cast<size_t>(mel.n_frames) * n_mels);

  const int n_bins = n_fft / 2 + 1;
  const std::vector<double> weights = Filterbank(n_mels, n_fft, clip.sample_rate);
  std::vector<double> window(n_fft);
  double window_sum = 0.0;
  for (int i = 0; i < n_fft; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n_fft);
    window_sum += window[i];
  }
  // Spectrum scaling: a full-scale sine lands at power 1/4 in its peak bin.
  const double power_scale = 1.0 / (window_sum * window_sum);

  std::vector<double> frame(n_fft);
  std::vector<std::complex<double>> spectrum(n_bins);
  std::vector<double> power(n_bins);
  for (int f = 0; f < mel.n_frames; ++f) {
    const float* x = clip.samples.data() + static_cast<size_t>(f) * hop;
    for (int i = 0; i < n_fft; ++i) frame[i] = x[i] * window[i];
    internal::RealFft(frame, spectrum);
    for (int k = 0; k < n_bins; ++k) power[k] = std::norm(spectrum[k]) * power_scale;
    for (int m = 0; m < n_mels; ++m) {
      const double* w = weights.data() + static_cast<size_t>(m) * n_bins;
      double e = 0.0;
      for (int k = 0; k < n_bins; ++k) e += w[k] * power[k];
      mel.values[static_cast<size_t>(f) * n_mels + m] =
          std::log10(e + kLogMelEpsilon);
    }
  }
  return mel;
}

std::vector<double> MelBandEnergy(const MelFrames& mel) {
  std::vector<double> energy(mel.n_mels, 0.0);
  for (int f = 0; f < mel.n_frames; ++f) {
    for (int m = 0; m < mel.n_mels; ++m) {
      energy[m] += std::max(0.0, std::pow(10.0, mel.at(f, m)) - kLogMelEpsilon);
    }
  }
  return energy;
}

double MelEnergyFractionAbove(const MelFrames& mel, double cutoff_hz) {
  const std::vector<double> energy = MelBandEnergy(mel);
  const std::vector<MelBand> bands = MelBandLayout(mel.n_mels, mel.source_rate);
  double total = 0.0, above = 0.0;
  for (int m = 0; m < mel.n_mels; ++m) {
    total += energy[m];
    if (bands[m].lower_hz >= cutoff_hz) above += energy[m];
  }
  return total > 0.0 ? above / total : 0.0;
}

}  // namespace zsdc
