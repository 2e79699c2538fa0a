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

// Thin wrappers over FFTW. Plans are created once per size under a global
// lock with FFTW_ESTIMATE (deterministic plan choice) and executed through
// the new-array interface, so concurrent execution is safe.

#ifndef ZSDC_SRC_FFT_H_
#define ZSDC_SRC_FFT_H_

#include <complex>
#include <span>

namespace zsdc::internal {

// out[k] = sum_j in[j] exp(-2 pi i j k / n), k in [0, n/2].
// `in` has n entries, `out` has n/2 + 1.
void RealFft(std::span<const double> in, std::span<std::complex<double>> out);

// out[k] = sum_j in[j] exp(+2 pi i j k / n) for a full complex input;
// `in` has n/2 + 1 entries (Hermitian half), `out` has n. Unnormalized.
void InverseRealFft(std::span<const std::complex<double>> in,
                    std::span<double> out);

// Unnormalized DCT-IV (FFTW REDFT11):
// out[k] = 2 sum_j in[j] cos(pi (j + 1/2) (k + 1/2) / n).
void Dct4(std::span<const double> in, std::span<double> out);

}  // namespace zsdc::internal

#endif  // ZSDC_SRC_FFT_H_
