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

#include "zsdc/resample.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <vector>

#include "zsdc/error.h"

namespace zsdc {
namespace {

constexpr double kKaiserBeta = 8.6;
constexpr int kTapsPerPhase = 64;
// Cutoff as a fraction of the lower Nyquist frequency. With 64 taps and
// beta 8.6 the transition band is ~0.086 of the lower rate wide, so this
// places the stop-band edge at the lower Nyquist frequency.
constexpr double kRolloff = 0.91;
// Above this many phases, kernels are evaluated per output sample.
constexpr int64_t kMaxTabulatedPhases = 8192;

double Sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

class Kernel {
 public:
  // Rates reduced by their gcd: `up` = L, `down` = M.
  Kernel(int64_t up, int64_t down) {
    const double ratio = static_cast<double>(up) / static_cast<double>(down);
    // Cycles per input sample.
    cutoff_ = 0.5 * std::min(1.0, ratio) * kRolloff;
    half_width_ = 0.5 * kTapsPerPhase * std::max(1.0, 1.0 / ratio);
    reach_ = static_cast<int64_t>(std::ceil(half_width_));
    i0_beta_ = std::cyl_bessel_i(0.0, kKaiserBeta);
  }

  int64_t reach() const { return reach_; }
  int64_t taps() const { return 2 * reach_ + 1; }

  // Taps for input offsets t in [-reach, reach] relative to floor(p),
  // where p = floor(p) + frac. Normalized to unit DC gain.
  void Fill(double frac, double* out) const {
    double sum = 0.0;
    for (int64_t t = -reach_; t <= reach_; ++t) {
      const double tau = frac - static_cast<double>(t);
      double v = 0.0;
      if (std::abs(tau) < half_width_) {
        const double r = tau / half_width_;
        const double w =
            std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) /
            i0_beta_;
        v = 2.0 * cutoff_ * Sinc(2.0 * cutoff_ * tau) * w;
      }
      out[t + reach_] = v;
      sum += v;
    }
    if (sum != 0.0) {
      for (int64_t i = 0; i < taps(); ++i) out[i] /= sum;
    }
  }

 private:
  double cutoff_;
  double half_width_;
  int64_t reach_;
  double i0_beta_;
};

}  // namespace

AudioClip Resample(const AudioClip& clip, int target_rate) {
  if (target_rate <= 0) {
    Fail(ErrorCode::kInvalidArgument,
         "target rate must be positive, got " + std::to_string(target_rate));
  }
  clip.Validate();
  if (target_rate == clip.sample_rate) return clip;

  const int64_t g = std::gcd<int64_t, int64_t>(clip.sample_rate, target_rate);
  const int64_t up = target_rate / g;
  const int64_t down = clip.sample_rate / g;
  const int64_t n_in = static_cast<int64_t>(clip.samples.size());
  const int64_t n_out =
      (n_in * target_rate + clip.sample_rate / 2) / clip.sample_rate;

  AudioClip out;
  out.sample_rate = target_rate;
  out.post_id = clip.post_id;
  out.captured_at = clip.captured_at;
  out.samples.resize(static_cast<size_t>(n_out));

  const Kernel kernel(up, down);
  const int64_t taps = kernel.taps();
  const int64_t reach = kernel.reach();
  const bool tabulate = up <= kMaxTabulatedPhases;
  std::vector<double> table;
  if (tabulate) {
    table.resize(static_cast<size_t>(up * taps));
    for (int64_t phase = 0; phase < up; ++phase) {
      kernel.Fill(static_cast<double>(phase) / static_cast<double>(up),
                  table.data() + phase * taps);
    }
  }
  std::vector<double> scratch(tabulate ? 0 : static_cast<size_t>(taps));

  const float* x = clip.samples.data();
  for (int64_t j = 0; j < n_out; ++j) {
    const int64_t num = j * down;
    const int64_t base = num / up;
    const int64_t phase = num % up;
    const double* h;
    if (tabulate) {
      h = table.data() + phase * taps;
    } else {
      kernel.Fill(static_cast<double>(phase) / static_cast<double>(up),
                  scratch.data());
      h = scratch.data();
    }
    const int64_t first = std::max<int64_t>(0, base - reach);
    const int64_t last = std::min<int64_t>(n_in - 1, base + reach);
    double acc = 0.0;
    for (int64_t i = first; i <= last; ++i) {
      // Kernel index for input i is (i - base) + reach.
      acc += static_cast<double>(x[i]) * h[i - base + reach];
    }
    out.samples[static_cast<size_t>(j)] = static_cast<float>(acc);
  }
  return out;
}

}  // namespace zsdc
