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

#include "fft.h"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>
#include <vector>

namespace zsdc::internal {
namespace {

enum class PlanKind { kR2c, kC2r, kDct4 };

std::mutex& PlanMutex() {
  static std::mutex mu;
  return mu;
}

// Plans are never destroyed; the set of sizes used by a process is small.
fftw_plan GetPlan(PlanKind kind, int n) {
  static std::map<std::pair<PlanKind, int>, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(PlanMutex());
  auto it = plans.find({kind, n});
  if (it != plans.end()) return it->second;

  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::vector<double> real(n);
  std::vector<fftw_complex> cplx(n / 2 + 1);
  fftw_plan plan = nullptr;
  switch (kind) {
    case PlanKind::kR2c:
      plan = fftw_plan_dft_r2c_1d(n, real.data(), cplx.data(), flags);
      break;
    case PlanKind::kC2r:
      plan = fftw_plan_dft_c2r_1d(n, cplx.data(), real.data(), flags);
      break;
    case PlanKind::kDct4: {
      std::vector<double> out(n);
      plan = fftw_plan_r2r_1d(n, real.data(), out.data(), FFTW_REDFT11, flags);
      break;
    }
  }
  plans.emplace(std::make_pair(kind, n), plan);
  return plan;
}

}  // namespace

void RealFft(std::span<const double> in, std::span<std::complex<double>> out) {
  const int n = static_cast<int>(in.size());
  fftw_plan plan = GetPlan(PlanKind::kR2c, n);
  std::vector<double> scratch(in.begin(), in.end());
  fftw_execute_dft_r2c(plan, scratch.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void InverseRealFft(std::span<const std::complex<double>> in,
                    std::span<double> out) {
  const int n = static_cast<int>(out.size());
  fftw_plan plan = GetPlan(PlanKind::kC2r, n);
  // c2r destroys its input.
  std::vector<std::complex<double>> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(plan, reinterpret_cast<fftw_complex*>(scratch.data()),
                       out.data());
}

void Dct4(std::span<const double> in, std::span<double> out) {
  const int n = static_cast<int>(in.size());
  fftw_plan plan = GetPlan(PlanKind::kDct4, n);
  std::vector<double> scratch(in.begin(), in.end());
  fftw_execute_r2r(plan, scratch.data(), out.data());
}

}  // namespace zsdc::internal
