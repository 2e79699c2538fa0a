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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "test_support.h"
#include "zsdc/anomaly.h"
#include "zsdc/error.h"

namespace zsdc {
namespace {

MelFrames Frames(int n_mels, std::vector<double> values) {
  MelFrames m;
  m.n_mels = n_mels;
  m.n_frames = static_cast<int>(values.size()) / n_mels;
  m.values = std::move(values);
  return m;
}

LabeledEvent WithClip(AudioClip clip, Post post, Condition condition) {
  LabeledEvent e;
  e.clip = std::move(clip);
  e.post = post;
  e.condition = condition;
  return e;
}

LabeledEvent Road(Post p, Condition c, uint64_t seed) {
  return SynthEvent(SiteProfile::For(p), WeatherProfile::For(c), seed);
}

// Fraction of (positive, negative) pairs ordered correctly, ties as 1/2.
double PairwiseAuroc(const std::vector<double>& s, const std::vector<bool>& l) {
  double good = 0.0, pairs = 0.0;
  for (size_t i = 0; i < s.size(); ++i) {
    if (!l[i]) continue;
    for (size_t j = 0; j < s.size(); ++j) {
      if (l[j]) continue;
      pairs += 1.0;
      if (s[i] > s[j]) good += 1.0;
      if (s[i] == s[j]) good += 0.5;
    }
  }
  return good / pairs;
}

template <typename ErrorFn>
void ExpectCode(ErrorCode code, ErrorFn fn) {
  try {
    fn();
    ADD_FAILURE() << "no error thrown";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

TEST(FitDetector, SilentEventGivesFloor) {
  const std::vector<LabeledEvent> events = {
      WithClip(testing::Silence(10.0, kCanonicalRate), Post::kOuter, Condition::kDry)};
  const DetectorModel m = FitDetector(events);
  ASSERT_EQ(m.n_mels, kDefaultMels);
  EXPECT_EQ(m.trained_on_rate, kCanonicalRate);
  for (int b = 0; b < m.n_mels; ++b) {
    EXPECT_DOUBLE_EQ(m.mean[b], -10.0);
    EXPECT_DOUBLE_EQ(m.variance[b], kVarianceFloor);
  }
}

TEST(FitDetector, TwoEventsMatchHandMoments) {
  // 2 bands; event A has 2 frames, event B has 3.
  const std::vector<MelFrames> set = {Frames(2, {1, -2, 3, 0}),
                                      Frames(2, {2, 4, -1, 1, 5, 2})};
  const DetectorModel m = FitDetector(set);
  // Band 0: {1, 3, 2, -1, 5} mean 2, population variance (1+1+0+9+9)/5 = 4.
  // Band 1: {-2, 0, 4, 1, 2} mean 1, variance (9+1+9+0+1)/5 = 4.
  EXPECT_DOUBLE_EQ(m.mean[0], 2.0);
  EXPECT_DOUBLE_EQ(m.mean[1], 1.0);
  EXPECT_DOUBLE_EQ(m.variance[0], 4.0 + kVarianceFloor);
  EXPECT_DOUBLE_EQ(m.variance[1], 4.0 + kVarianceFloor);
}

TEST(FitDetector, DuplicatedSetGivesIdenticalModel) {
  std::vector<LabeledEvent> events;
  for (uint64_t s = 1; s <= 3; ++s) events.push_back(Road(Post::kCity, Condition::kDry, s));
  const DetectorModel a = FitDetector(events);
  const DetectorModel b = FitDetector(events);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.variance, b.variance);

  std::vector<LabeledEvent> twice = events;
  twice.insert(twice.end(), events.begin(), events.end());
  const DetectorModel c = FitDetector(twice);
  for (int k = 0; k < a.n_mels; ++k) {
    EXPECT_NEAR(c.mean[k], a.mean[k], 1e-12 * std::abs(a.mean[k]));
    EXPECT_NEAR(c.variance[k], a.variance[k], 1e-12 * a.variance[k]);
  }
}

TEST(FitDetector, RejectsBadTrainingSets) {
  const std::vector<LabeledEvent> wet = {Road(Post::kOuter, Condition::kWet, 1)};
  ExpectCode(ErrorCode::kContractViolation, [&] { FitDetector(wet); });
  ExpectCode(ErrorCode::kInvalidArgument,
             [] { FitDetector(std::span<const MelFrames>()); });
  const std::vector<MelFrames> mixed = {Frames(2, {0, 0}), Frames(3, {0, 0, 0})};
  ExpectCode(ErrorCode::kInvalidArgument, [&] { FitDetector(mixed); });
}

TEST(Score, MatchesDirectSum) {
  DetectorModel m;
  m.n_mels = 2;
  m.mean = {1.0, -1.0};
  m.variance = {4.0, 0.5};
  // Frame 0: 1/4 + 2 = 2.25. Frame 1: 4/4 + 0 = 1. Mean 1.625.
  EXPECT_DOUBLE_EQ(Score(m, Frames(2, {2.0, 0.0, -1.0, -1.0})), 1.625);
  ExpectCode(ErrorCode::kInvalidArgument, [&] { Score(m, Frames(3, {0, 0, 0})); });
}

TEST(Score, FrameStationaryEventScoresZeroAgainstItself) {
  // Exactly periodic in the hop, so every analysis frame is identical and the
  // fitted variance collapses to the floor.
  AudioClip clip;
  clip.sample_rate = kCanonicalRate;
  clip.samples.resize(10 * kCanonicalRate);
  for (size_t i = 0; i < clip.samples.size(); ++i) {
    clip.samples[i] = static_cast<float>(
        0.5 * std::sin(2 * std::numbers::pi * 20.0 * (i % kDefaultHop) / kDefaultHop));
  }
  const std::vector<LabeledEvent> events = {
      WithClip(clip, Post::kOuter, Condition::kDry)};
  const DetectorModel m = FitDetector(events);
  EXPECT_LT(Score(m, clip), 1e-9);
}

TEST(Score, TrainingEventsScoreNearBandCount) {
  std::vector<LabeledEvent> events;
  for (uint64_t s = 1; s <= 6; ++s) events.push_back(Road(Post::kOuter, Condition::kDry, s));
  const DetectorModel m = FitDetector(events);
  double mean = 0.0;
  for (const LabeledEvent& e : events) {
    const double s = Score(m, e.clip);
    EXPECT_GT(s, 0.5 * m.n_mels);
    EXPECT_LT(s, 2.0 * m.n_mels);
    mean += s / events.size();
  }
  // Equal frame counts, so the mean score is sum_b s_b^2 / (s_b^2 + floor).
  EXPECT_NEAR(mean, m.n_mels, 0.01 * m.n_mels);
  EXPECT_LE(mean, m.n_mels);
}

TEST(Score, WetScoresAboveDryMedian) {
  std::vector<LabeledEvent> train;
  for (uint64_t s = 1; s <= 8; ++s) train.push_back(Road(Post::kCity, Condition::kDry, s));
  const DetectorModel m = FitDetector(train);
  std::vector<double> dry;
  for (uint64_t s = 101; s <= 107; ++s) {
    dry.push_back(Score(m, Road(Post::kCity, Condition::kDry, s).clip));
  }
  std::nth_element(dry.begin(), dry.begin() + 3, dry.end());
  const double median = dry[3];
  for (uint64_t s = 201; s <= 204; ++s) {
    EXPECT_GT(Score(m, Road(Post::kCity, Condition::kWet, s).clip), median) << s;
  }
}

TEST(Auroc, ReferenceExamples) {
  EXPECT_DOUBLE_EQ(Auroc(std::vector<double>{0.1, 0.2, 0.15, 0.3}, {false, false, true, true}),
                   0.75);
  EXPECT_DOUBLE_EQ(Auroc(std::vector<double>{0.0, 1.0, 2.0, 3.0}, {false, false, true, true}),
                   1.0);
  EXPECT_DOUBLE_EQ(Auroc(std::vector<double>{4.0, 4.0, 4.0}, {false, true, true}), 0.5);
}

TEST(Auroc, Errors) {
  ExpectCode(ErrorCode::kUndefinedAuroc,
             [] { Auroc(std::vector<double>{1.0, 2.0}, {true, true}); });
  ExpectCode(ErrorCode::kUndefinedAuroc,
             [] { Auroc(std::vector<double>{1.0}, {false}); });
  ExpectCode(ErrorCode::kUndefinedAuroc, [] { Auroc(std::vector<double>{}, {}); });
  ExpectCode(ErrorCode::kInvalidArgument,
             [] { Auroc(std::vector<double>{1.0, 2.0}, {true}); });
}

TEST(Auroc, MatchesPairwiseOracleWithTies) {
  std::mt19937_64 gen(99);
  int checked = 0;
  while (checked < 200) {
    const int n = 2 + static_cast<int>(gen() % 99);
    // Small integer alphabet on half the instances forces many ties.
    const bool tied = gen() % 2 == 0;
    std::vector<double> s(n);
    std::vector<bool> l(n);
    for (int i = 0; i < n; ++i) {
      s[i] = tied ? static_cast<double>(gen() % 5)
                  : std::uniform_real_distribution<double>(-1, 1)(gen);
      l[i] = gen() % 3 == 0;
    }
    if (std::count(l.begin(), l.end(), true) == 0 ||
        std::count(l.begin(), l.end(), false) == 0) {
      continue;
    }
    ++checked;
    const double a = Auroc(s, l);
    EXPECT_NEAR(a, PairwiseAuroc(s, l), 1e-12);

    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) t[i] = std::exp(3.0 * s[i]) - 7.0;
    EXPECT_EQ(Auroc(t, l), a);

    std::vector<bool> flipped(n);
    for (int i = 0; i < n; ++i) flipped[i] = !l[i];
    EXPECT_EQ(a + Auroc(s, flipped), 1.0);
  }
}

TEST(Variant, NamesRoundTrip) {
  for (Variant v : kAllVariants) EXPECT_EQ(ParseVariant(VariantName(v)), v);
  EXPECT_EQ(ParseVariant("ASR"), Variant::kAsr);
  ExpectCode(ErrorCode::kInvalidArgument, [] { ParseVariant("f8"); });
}

TEST(Variant, NativeRates) {
  const Codec& codec = testing::TrainedCodec();
  const AudioClip clip = testing::Sine(440.0, 1.0, kCanonicalRate);
  EXPECT_EQ(MakeVariant(Variant::kHifi, clip, codec).sample_rate, 44100);
  EXPECT_EQ(MakeVariant(Variant::kLofi22, clip, codec).sample_rate, 22050);
  EXPECT_EQ(MakeVariant(Variant::kLofi11, clip, codec).sample_rate, 11025);
  const AudioClip asr = MakeVariant(Variant::kAsr, clip, codec);
  EXPECT_EQ(asr.sample_rate, 44100);
  EXPECT_EQ(asr.samples.size(), clip.samples.size());
}

// Labels and posts come from the events; features are random frames.
struct Fixture {
  std::vector<LabeledEvent> events;
  std::vector<VariantFeatures> features;
};

Fixture RandomFixture(uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  Fixture f;
  for (Post p : kAllPosts) {
    for (int i = 0; i < 12; ++i) {
      const bool anomalous = i % 3 == 0;
      LabeledEvent e;
      e.post = p;
      e.condition = anomalous ? Condition::kWet : Condition::kDry;
      f.events.push_back(e);
      VariantFeatures vf;
      for (int v = 0; v < 4; ++v) {
        std::vector<double> values(4 * 8);
        // Anomalies are shifted by less as the variant index grows.
        for (double& x : values) x = normal(gen) + (anomalous ? 0.6 / (1 + v) : 0.0);
        vf[v] = Frames(8, values);
      }
      f.features.push_back(vf);
    }
  }
  return f;
}

TEST(EvaluateConditions, RowsMergeAndRatio) {
  const Fixture f = RandomFixture(5);
  const AurocTable t = EvaluateConditions(f.events, f.features);
  ASSERT_EQ(t.rows, (std::vector<std::string>{"Tunnel", "City", "Outer", "Merge"}));
  ASSERT_EQ(t.auroc.size(), 4u);
  for (int v = 0; v < 4; ++v) {
    EXPECT_NEAR(t.auroc[3][v], PairwiseAuroc(t.scores[v], t.labels), 1e-12);
    // Per-post rows against the same oracle on the post's subset.
    for (int r = 0; r < 3; ++r) {
      std::vector<double> s;
      std::vector<bool> l;
      for (size_t i = 0; i < f.events.size(); ++i) {
        if (f.events[i].post != kAllPosts[r]) continue;
        s.push_back(t.scores[v][i]);
        l.push_back(t.labels[i]);
      }
      EXPECT_NEAR(t.auroc[r][v], PairwiseAuroc(s, l), 1e-12);
    }
    const double avg =
        (t.auroc[0][v] + t.auroc[1][v] + t.auroc[2][v] + t.auroc[3][v]) / 4.0;
    EXPECT_NEAR(t.average[v], avg, 1e-15);
  }
  EXPECT_EQ(t.ratio[0], 1.0);
  EXPECT_GT(t.average[0], t.average[3]);
}

TEST(EvaluateConditions, Deterministic) {
  const Fixture f = RandomFixture(6);
  const AurocTable a = EvaluateConditions(f.events, f.features);
  const AurocTable b = EvaluateConditions(f.events, f.features);
  EXPECT_EQ(a.auroc, b.auroc);
  EXPECT_EQ(a.scores, b.scores);
}

TEST(EvaluateConditions, SkipsAbsentPosts) {
  Fixture f = RandomFixture(7);
  Fixture g;
  for (size_t i = 0; i < f.events.size(); ++i) {
    if (f.events[i].post == Post::kTunnel) continue;
    g.events.push_back(f.events[i]);
    g.features.push_back(f.features[i]);
  }
  const AurocTable t = EvaluateConditions(g.events, g.features);
  EXPECT_EQ(t.rows, (std::vector<std::string>{"City", "Outer", "Merge"}));
}

TEST(EvaluateConditions, SingleClassPostIsUndefined) {
  Fixture f = RandomFixture(8);
  for (LabeledEvent& e : f.events) {
    if (e.post == Post::kTunnel) e.condition = Condition::kDry;
  }
  ExpectCode(ErrorCode::kUndefinedAuroc,
             [&] { EvaluateConditions(f.events, f.features); });
}

}  // namespace
}  // namespace zsdc
