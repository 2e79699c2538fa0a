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

#ifndef ZSDC_MDCT_H_
#define ZSDC_MDCT_H_

#include <cstddef>
#include <span>
#include <vector>

namespace zsdc {

// Sine-windowed MDCT with 50% overlap, orthonormal scaling sqrt(2 / hop)
// on both analysis and synthesis so windowed overlap-add is perfectly
// reconstructing.
//
// X[k] = sqrt(2/M) sum_{n<2M} w[n] x[n] cos(pi/M (n + 1/2 + M/2)(k + 1/2))
class Mdct {
 public:
  explicit Mdct(int hop);

  int hop() const { return hop_; }
  int window_size() const { return 2 * hop_; }
  const std::vector<double>& window() const { return window_; }

  // `block` has 2 * hop samples (unwindowed); `coefs` receives hop values.
  void Forward(std::span<const double> block, std::span<double> coefs) const;
  // `coefs` has hop values; `block` receives 2 * hop windowed samples for
  // overlap-add.
  void Inverse(std::span<const double> coefs, std::span<double> block) const;

 private:
  int hop_;
  std::vector<double> window_;
  double scale_;
};

// Number of frames needed to cover n samples when the signal is placed
// one hop into a zero-padded buffer: ceil(n / hop) + 1.
int MdctFrameCount(size_t n_samples, int hop);

// Row-major [frames x hop] coefficients of the padded signal.
std::vector<double> MdctAnalyze(const Mdct& mdct, std::span<const float> x);

// Overlap-adds `n_frames` coefficient rows and returns the n_samples
// samples that the matching MdctAnalyze call covered.
std::vector<double> MdctSynthesize(const Mdct& mdct, std::span<const double> coefs,
                                   int n_frames, size_t n_samples);

}  // namespace zsdc

#endif  // ZSDC_MDCT_H_
