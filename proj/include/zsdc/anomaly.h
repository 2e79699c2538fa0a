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

// Diagonal-Gaussian anomaly detector on log-mel frames and AUROC
// evaluation across Hi-Fi, Lo-Fi and codec-restored variants.

#ifndef ZSDC_ANOMALY_H_
#define ZSDC_ANOMALY_H_

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zsdc/audio.h"
#include "zsdc/codec.h"
#include "zsdc/datagen.h"
#include "zsdc/mel.h"

namespace zsdc {

inline constexpr double kVarianceFloor = 1e-6;

struct DetectorModel {
  std::vector<double> mean;
  std::vector<double> variance;  // already includes kVarianceFloor
  int n_mels = 0;
  int trained_on_rate = kCanonicalRate;
};

// Per-band moments over every frame of every clip. kInvalidArgument on an
// empty set or mismatched band counts.
DetectorModel FitDetector(std::span<const MelFrames> normal_features);
// kContractViolation if any event is anomalous. Clips are canonicalized.
DetectorModel FitDetector(std::span<const LabeledEvent> normal_events);

// Mean over frames of sum_b (x - mean)^2 / variance.
double Score(const DetectorModel& model, const MelFrames& features);
double Score(const DetectorModel& model, const AudioClip& clip);

// Probability that a random positive outscores a random negative, ties
// counting 1/2. Exact for any input size. kUndefinedAuroc unless both
// classes are present; kInvalidArgument on a length mismatch.
double Auroc(std::span<const double> scores, const std::vector<bool>& labels);

enum class Variant { kHifi, kLofi22, kLofi11, kAsr };
inline constexpr std::array<Variant, 4> kAllVariants = {
    Variant::kHifi, Variant::kLofi22, Variant::kLofi11, Variant::kAsr};

// "f44", "f22", "f11", "asr".
std::string_view VariantName(Variant v);
Variant ParseVariant(std::string_view name);

// The variant as the central server would hold it, at its native rate:
// the original, the 2x or 4x downsampled clip, or decode(encode(original)).
AudioClip MakeVariant(Variant v, const AudioClip& clip, const Codec& codec);

struct AurocTable {
  // Posts present in the dataset (in Post order) followed by "Merge".
  std::vector<std::string> rows;
  // auroc[row][variant]
  std::vector<std::array<double, 4>> auroc;
  // Mean of all rows above, then average / Hi-Fi average.
  std::array<double, 4> average{};
  std::array<double, 4> ratio{};

  // Per-variant scores in event order; Merge is computed from these.
  std::array<std::vector<double>, 4> scores;
  std::vector<bool> labels;
  std::vector<Post> posts;
};

// Features of one event for each variant, computed after canonicalization
// to 44.1 kHz.
using VariantFeatures = std::array<MelFrames, 4>;
VariantFeatures ExtractVariantFeatures(const AudioClip& clip, const Codec& codec);
// As above, with the codec-restored clip supplied by the caller (for example
// read back from the central archive).
VariantFeatures ExtractVariantFeatures(const AudioClip& clip, const AudioClip& restored);

// Each variant fits its own detector on that variant's Dry events and scores
// every event. `features` is parallel to `events`.
AurocTable EvaluateConditions(std::span<const LabeledEvent> events,
                              std::span<const VariantFeatures> features);
AurocTable EvaluateConditions(std::span<const LabeledEvent> events,
                              const Codec& codec);

}  // namespace zsdc

#endif  // ZSDC_ANOMALY_H_
