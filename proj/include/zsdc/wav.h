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

#ifndef ZSDC_WAV_H_
#define ZSDC_WAV_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "zsdc/audio.h"

namespace zsdc {

inline constexpr size_t kWavHeaderBytes = 44;

// Size of the float-32 mono file SaveWav writes for `n_samples` samples.
constexpr size_t WavFileBytes(size_t n_samples) {
  return kWavHeaderBytes + 4 * n_samples;
}

// Reads a mono RIFF/WAVE file holding IEEE float-32 or PCM-16 samples.
// Unknown chunks before "data" are skipped. PCM-16 is scaled by 1/32768.
AudioClip LoadWav(const std::filesystem::path& path);
AudioClip ParseWav(std::span<const uint8_t> bytes);

// Writes a float-32 mono file with the minimal 44-byte header and no extra
// chunks. Returns the number of bytes written.
size_t SaveWav(const AudioClip& clip, const std::filesystem::path& path);
std::vector<uint8_t> EncodeWav(const AudioClip& clip);

}  // namespace zsdc

#endif  // ZSDC_WAV_H_
