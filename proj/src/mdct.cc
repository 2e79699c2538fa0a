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

#include "zsdc/mdct.h"

#include <cmath>
#include <numbers>
#include <string>

#include "fft.h"
#include "zsdc/error.h"

namespace zsdc {

Mdct::Mdct(int hop) : hop_(hop) {
  if (hop <= 0 || hop % 2 != 0) {
    Fail(ErrorCode::kInvalidArgument,
         "mdct hop must be positive and even, got " + std::to_string(hop));
  }
  window_.resize(2 * hop);
  for (int n = 0; n < 2 * hop; ++n) {
    window_[n] = std::sin(std::numbers::pi * (n + 0.5) / (2.0 * hop));
  }
  // FFTW's REDFT11 carries a factor of 2.
  scale_ = 0.5 * std::sqrt(2.0 / hop);
}

// The MDCT of a 2M block equals a DCT-IV of M folded samples. With the
// block split into quarters (a, b, c, d) of M/2 each, the folded input is
// (-c_r - d, a - b_r), where _r is reversal.
void Mdct::Forward(std::span<const double> block, std::span<double> coefs) const {
  const int m = hop_;
  const int h = m / 2;
  std::vector<double> xw(2 * m);
  for (int n = 0; n < 2 * m; ++n) xw[n] = block[n] * window_[n];
  std::vector<double> folded(m);
  for (int j = 0; j < h; ++j) {
    folded[j] = -xw[3 * h - 1 - j] - xw[3 * h + j];
  }
  for (int j = h; j < m; ++j) {
    folded[j] = xw[j - h] - xw[3 * h - 1 - j];
  }
  internal::Dct4(folded, coefs);
  for (int k = 0; k < m; ++k) coefs[k] *= scale_;
}

void Mdct::Inverse(std::span<const double> coefs, std::span<double> block) const {
  const int m = hop_;
  const int h = m / 2;
  std::vector<double> v(m);
  internal::Dct4(coefs, v);
  for (int n = 0; n < h; ++n) block[n] = v[n + h];
  for (int n = h; n < 3 * h; ++n) block[n] = -v[3 * h - 1 - n];
  for (int n = 3 * h; n < 2 * m; ++n) block[n] = -v[n - 3 * h];
  for (int n = 0; n < 2 * m; ++n) block[n] *= scale_ * window_[n];
}

int MdctFrameCount(size_t n_samples, int hop) {
  return static_cast<int>((n_samples + hop - 1) / hop) + 1;
}

std::vector<double> MdctAnalyze(const Mdct& mdct, std::span<const float> x) {
  const int hop = mdct.hop();
  const int n_frames = MdctFrameCount(x.size(), hop);
  std::vector<double> padded(static_cast<size_t>(n_frames + 1) * hop, 0.0);
  for (size_t i = 0; i < x.size(); ++i) padded[hop + i] = x[i];
  std::vector<double> coefs(static_cast<size_t>(n_frames) * hop);
  for (int f = 0; f < n_frames; ++f) {
    mdct.Forward(std::span<const double>(padded).subspan(
                     static_cast<size_t>(f) * hop, 2 * hop),
                 std::span<double>(coefs).subspan(static_cast<size_t>(f) * hop, hop));
  }
  return coefs;
}

std::vector<double> MdctSynthesize(const Mdct& mdct, std::span<const double> coefs,
                                   int n_frames, size_t n_samples) {
  const int hop = mdct.hop();
  std::vector<double> out(static_cast<size_t>(n_frames + 1) * hop, 0.0);
  std::vector<double> block(2 * hop);
  for (int f = 0; f < n_frames; ++f) {
    mdct.Inverse(coefs.subspan(static_cast<size_t>(f) * hop, hop), block);
    double* dst = out.data() + static_cast<size_t>(f) * hop;
    for (int n = 0; n < 2 * hop; ++n) dst[n] += block[n];
  }
  const size_t available = out.size() - hop;
  const size_t n = n_samples < available ? n_samples : available;
  return std::vector<double>(out.begin() + hop, out.begin() + hop + n);
}

}  // namespace zsdc
