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

// Seeded synthetic road audio (three sites, four road-surface conditions)
// and a road-free generic corpus for codec training.

#ifndef ZSDC_DATAGEN_H_
#define ZSDC_DATAGEN_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zsdc/audio.h"
#include "zsdc/uuid.h"

namespace zsdc {

enum class Post { kTunnel, kCity, kOuter };
enum class Condition { kDry, kWet, kSlush, kSnow };

inline constexpr std::array<Post, 3> kAllPosts = {Post::kTunnel, Post::kCity,
                                                  Post::kOuter};
inline constexpr std::array<Condition, 4> kAllConditions = {
    Condition::kDry, Condition::kWet, Condition::kSlush, Condition::kSnow};

// "Tunnel", "City", "Outer" / "Dry", "Wet", "Slush", "Snow".
std::string_view PostName(Post post);
std::string_view ConditionName(Condition condition);
// Case-insensitive; kInvalidArgument on unknown names.
Post ParsePost(std::string_view name);
Condition ParseCondition(std::string_view name);

struct ReflectionTap {
  double delay_ms = 0.0;
  double gain = 0.0;
};

struct SiteProfile {
  Post post = Post::kOuter;
  std::vector<ReflectionTap> reflection_taps;
  double ambient_level = 0.0;

  static SiteProfile For(Post post);
};

enum class Modulation { kNone, kSplashBursts, kLowpassMuffle };

struct WeatherProfile {
  Condition condition = Condition::kDry;
  // Applied above 1 kHz, dB per octave (negative darkens).
  double spectral_tilt_db_per_octave = 0.0;
  double hiss_boost_2to8khz_db = 0.0;
  Modulation modulation = Modulation::kNone;

  static WeatherProfile For(Condition condition);
};

inline constexpr double kEventSeconds = 10.0;

struct LabeledEvent {
  AudioClip clip;
  Post post = Post::kOuter;
  Condition condition = Condition::kDry;
  Uuid uuid;
  uint64_t seed = 0;

  bool is_anomalous() const { return condition != Condition::kDry; }
};

// 10 s at 44.1 kHz. Bit-identical for identical arguments. The tire-noise
// realization and the pass-by envelope are drawn before any weather- or
// site-specific randomness, so events that share a seed differ only by the
// profile effects.
LabeledEvent SynthEvent(const SiteProfile& site, const WeatherProfile& weather,
                        uint64_t seed);

// Reference event counts per (post, condition); 0 marks an absent cell.
int ReferenceEventCount(Post post, Condition condition);
// Number of 10-minute recordings per cell in the reference dataset.
int ReferenceRecordingCount(Post post, Condition condition);

struct EventPlan {
  Post post = Post::kOuter;
  Condition condition = Condition::kDry;
  Uuid uuid;
  uint64_t seed = 0;
  int recording = 0;  // index into DatasetPlan::recordings
  int64_t captured_at = 0;
};

struct RecordingPlan {
  Post post = Post::kOuter;
  Condition condition = Condition::kDry;
  int index_in_cell = 0;
  int64_t started_at = 0;
  double duration_seconds = 600.0;
  std::vector<int> events;
};

struct DatasetPlan {
  double scale = 0.0;
  uint64_t seed = 0;
  std::vector<EventPlan> events;  // grouped by post, then condition
  std::vector<RecordingPlan> recordings;

  int CellCount(Post post, Condition condition) const;
};

// ceil(scale * reference count) events per cell, absent cells stay empty.
// kInvalidArgument unless 0 < scale <= 1.
DatasetPlan PlanDataset(double scale, uint64_t seed);
LabeledEvent MaterializeEvent(const EventPlan& plan);

struct Dataset {
  DatasetPlan plan;
  std::vector<LabeledEvent> events;  // parallel to plan.events
};

Dataset SynthDataset(double scale, uint64_t seed);

// Writes <out_dir>/<post>/<condition>/<uuid>.wav per event, labels.csv
// (uuid,post,condition,path) and recordings.csv. Events are synthesized one
// at a time. Returns the number of events written.
int WriteDataset(const DatasetPlan& plan, const std::filesystem::path& out_dir);

// Tones, chirps, band-limited noise and AM/FM textures, `seconds` long each.
// kInvalidArgument when n_clips <= 0.
std::vector<AudioClip> SynthGenericCorpus(int n_clips, uint64_t seed,
                                          double seconds = 10.0);

}  // namespace zsdc

#endif  // ZSDC_DATAGEN_H_
