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

#include "zsdc/anomaly.h"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "zsdc/error.h"
#include "zsdc/resample.h"

namespace zsdc {

DetectorModel FitDetector(std::span<const MelFrames> normal_features) {
  if (normal_features.empty()) {
    Fail(ErrorCode::kInvalidArgument, "detector needs at least one normal event");
  }
  const int bands = normal_features[0].n_mels;
  std::vector<double> sum(bands, 0.0), sum_sq(bands, 0.0);
  int64_t frames = 0;
  // Two passes (mean, then centred squares) for numerical stability.
  for (const MelFrames& m : normal_features) {
    if (m.n_mels != bands) Fail(ErrorCode::kInvalidArgument, "band count mismatch");
    for (int f = 0; f < m.n_frames; ++f) {
      for (int b = 0; b < bands; ++b) sum[b] += m.at(f, b);
    }
    frames += m.n_frames;
  }
  if (frames == 0) Fail(ErrorCode::kInvalidArgument, "normal events have no frames");
  DetectorModel model;
  model.n_mels = bands;
  model.trained_on_rate = normal_features[0].source_rate;
  model.mean.resize(bands);
  for (int b = 0; b < bands; ++b) model.mean[b] = sum[b] / static_cast<double>(frames);
  for (const MelFrames& m : normal_features) {
    for (int f = 0; f < m.n_frames; ++f) {
      for (int b = 0; b < bands; ++b) {
        const double d = m.at(f, b) - model.mean[b];
        sum_sq[b] += d * d;
      }
    }
  }
  model.variance.resize(bands);
  for (int b = 0; b < bands; ++b) {
    model.variance[b] = sum_sq[b] / static_cast<double>(frames) + kVarianceFloor;
  }
  return model;
}

DetectorModel FitDetector(std::span<const LabeledEvent> normal_events) {
  std::vector<MelFrames> features;
  features.reserve(normal_events.size());
  for (const LabeledEvent& e : normal_events) {
    if (e.is_anomalous()) {
      Fail(ErrorCode::kContractViolation, "anomalous event in the training set");
    }
    features.push_back(MelSpectrogram(Canonicalize(e.clip)));
  }
  return FitDetector(features);
}

double Score(const DetectorModel& model, const MelFrames& features) {
  if (features.n_mels != model.n_mels) {
    Fail(ErrorCode::kInvalidArgument, "band count mismatch");
  }
  if (features.n_frames == 0) return 0.0;
  double total = 0.0;
  for (int f = 0; f < features.n_frames; ++f) {
    for (int b = 0; b < model.n_mels; ++b) {
      const double d = features.at(f, b) - model.mean[b];
      total += d * d / model.variance[b];
    }
  }
  return total / features.n_frames;
}

double Score(const DetectorModel& model, const AudioClip& clip) {
  return Score(model, MelSpectrogram(Canonicalize(clip)));
}

double Auroc(std::span<const double> scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) {
    Fail(ErrorCode::kInvalidArgument, "scores and labels differ in length");
  }
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  // Twice the Mann-Whitney U statistic, kept integral so the result is exact.
  uint64_t twice_u = 0, negatives_below = 0, positives = 0, negatives = 0;
  for (size_t i = 0; i < order.size();) {
    size_t j = i;
    uint64_t pos = 0, neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      labels[order[j]] ? ++pos : ++neg;
      ++j;
    }
    twice_u += pos * (2 * negatives_below + neg);
    negatives_below += neg;
    positives += pos;
    negatives += neg;
    i = j;
  }
  if (positives == 0 || negatives == 0) {
    Fail(ErrorCode::kUndefinedAuroc, "AUROC needs both positive and negative labels");
  }
  return static_cast<double>(twice_u) /
         (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

std::string_view VariantName(Variant v) {
  switch (v) {
    case Variant::kHifi: return "f44";
    case Variant::kLofi22: return "f22";
    case Variant::kLofi11: return "f11";
    case Variant::kAsr: return "asr";
  }
  return "?";
}

Variant ParseVariant(std::string_view name) {
  std::string n(name);
  for (char& c : n) c = static_cast<char>(std::tolower(c));
  for (Variant v : kAllVariants) {
    if (VariantName(v) == n) return v;
  }
  Fail(ErrorCode::kInvalidArgument, "unknown variant '" + n + "'");
}

AudioClip MakeVariant(Variant v, const AudioClip& clip, const Codec& codec) {
  switch (v) {
    case Variant::kHifi: return Canonicalize(clip);
    case Variant::kLofi22: return Resample(clip, kHalfRate);
    case Variant::kLofi11: return Resample(clip, kQuarterRate);
    case Variant::kAsr: return Decode(codec, Encode(codec, clip));
  }
  Fail(ErrorCode::kInvalidArgument, "unknown variant");
}

VariantFeatures ExtractVariantFeatures(const AudioClip& clip, const Codec& codec) {
  VariantFeatures out;
  for (Variant v : kAllVariants) {
    out[static_cast<int>(v)] = MelSpectrogram(Canonicalize(MakeVariant(v, clip, codec)));
  }
  return out;
}

VariantFeatures ExtractVariantFeatures(const AudioClip& clip, const AudioClip& restored) {
  VariantFeatures out;
  out[static_cast<int>(Variant::kHifi)] = MelSpectrogram(Canonicalize(clip));
  out[static_cast<int>(Variant::kLofi22)] = MelSpectrogram(Canonicalize(Resample(clip, kHalfRate)));
  out[static_cast<int>(Variant::kLofi11)] =
      MelSpectrogram(Canonicalize(Resample(clip, kQuarterRate)));
  out[static_cast<int>(Variant::kAsr)] = MelSpectrogram(Canonicalize(restored));
  return out;
}

AurocTable EvaluateConditions(std::span<const LabeledEvent> events,
                              std::span<const VariantFeatures> features) {
  if (events.size() != features.size()) {
    Fail(ErrorCode::kInvalidArgument, "events and features differ in length");
  }
  AurocTable table;
  for (const LabeledEvent& e : events) {
    table.labels.push_back(e.is_anomalous());
    table.posts.push_back(e.post);
  }
  for (Variant v : kAllVariants) {
    const int vi = static_cast<int>(v);
    std::vector<MelFrames> normal;
    for (size_t i = 0; i < events.size(); ++i) {
      if (!events[i].is_anomalous()) normal.push_back(features[i][vi]);
    }
    const DetectorModel model = FitDetector(normal);
    auto& scores = table.scores[vi];
    for (const VariantFeatures& f : features) scores.push_back(Score(model, f[vi]));
  }

  for (Post p : kAllPosts) {
    if (std::find(table.posts.begin(), table.posts.end(), p) == table.posts.end()) continue;
    table.rows.emplace_back(PostName(p));
    std::array<double, 4> row{};
    for (Variant v : kAllVariants) {
      const int vi = static_cast<int>(v);
      std::vector<double> s;
      std::vector<bool> l;
      for (size_t i = 0; i < events.size(); ++i) {
        if (table.posts[i] != p) continue;
        s.push_back(table.scores[vi][i]);
        l.push_back(table.labels[i]);
      }
      row[vi] = Auroc(s, l);
    }
    table.auroc.push_back(row);
  }
  table.rows.emplace_back("Merge");
  std::array<double, 4> merge{};
  for (Variant v : kAllVariants) {
    const int vi = static_cast<int>(v);
    merge[vi] = Auroc(table.scores[vi], table.labels);
  }
  table.auroc.push_back(merge);

  for (int vi = 0; vi < 4; ++vi) {
    double sum = 0.0;
    for (const auto& row : table.auroc) sum += row[vi];
    table.average[vi] = sum / static_cast<double>(table.auroc.size());
  }
  for (int vi = 0; vi < 4; ++vi) table.ratio[vi] = table.average[vi] / table.average[0];
  return table;
}

AurocTable EvaluateConditions(std::span<const LabeledEvent> events,
                              const Codec& codec) {
  std::vector<VariantFeatures> features;
  features.reserve(events.size());
  for (const LabeledEvent& e : events) {
    features.push_back(ExtractVariantFeatures(e.clip, codec));
  }
  return EvaluateConditions(events, features);
}

}  // namespace zsdc
