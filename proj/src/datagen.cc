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

#include "zsdc/datagen.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <fstream>
#include <functional>
#include <numbers>
#include <span>

#include "fft.h"
#include "zsdc/error.h"
#include "zsdc/rng.h"
#include "zsdc/wav.h"

namespace zsdc {
namespace {

constexpr double kPi = std::numbers::pi;

// Tire noise: flat from 40 Hz to the knee, then rolling off, with a steeper
// air-absorption slope above 8 kHz.
constexpr double kTireKneeHz = 1000.0;
constexpr double kTireSlopeDbPerOctave = -6.0;
// Tread-pattern band, raised or lowered per vehicle by up to kTreadMaxDb.
constexpr double kTreadLoHz = 1500.0;
constexpr double kTreadHiHz = 5500.0;
constexpr double kTreadMaxDb = 9.0;
constexpr double kAmbientCornerHz = 200.0;
constexpr double kAbsorptionCornerHz = 8000.0;
constexpr double kAbsorptionSlopeDbPerOctave = -18.0;
constexpr double kPassByPeakRms = 0.12;
constexpr double kEnvelopeFloor = 0.08;
constexpr double kLevelJitterDb = 0.5;
constexpr double kPeakJitterSeconds = 1.0;
constexpr double kSplashRatePerSecond = 0.5;
constexpr int64_t kDatasetEpoch = 1'672'531'200;  // 2023-01-01T00:00:00Z

double DbToAmplitude(double db) { return std::pow(10.0, db / 20.0); }

// Multiplies the spectrum of `x` by gain(f) (amplitude, f in Hz).
void ShapeSpectrum(std::vector<double>& x, int rate,
                   const std::function<double(double)>& gain) {
  const size_t n = x.size();
  std::vector<std::complex<double>> spec(n / 2 + 1);
  internal::RealFft(x, spec);
  for (size_t k = 0; k < spec.size(); ++k) {
    spec[k] *= gain(static_cast<double>(k) * rate / static_cast<double>(n)) /
               static_cast<double>(n);
  }
  internal::InverseRealFft(spec, x);
}

void NormalizeRms(std::vector<double>& x, double target) {
  double e = 0.0;
  for (double v : x) e += v * v;
  const double rms = std::sqrt(e / std::max<size_t>(x.size(), 1));
  if (rms <= 0.0) return;
  for (double& v : x) v *= target / rms;
}

// 1 inside [lo, hi] with quarter-octave raised-cosine shoulders.
double BandWeight(double f, double lo_hz, double hi_hz) {
  constexpr double kRamp = 0.25;
  if (f <= 0.0) return 0.0;
  const double lo = std::log2(f / lo_hz), hi = std::log2(f / hi_hz);
  if (lo >= 0.0 && hi <= 0.0) return 1.0;
  const double d = lo < 0.0 ? -lo : hi;
  if (d >= kRamp) return 0.0;
  return 0.5 * (1.0 + std::cos(kPi * d / kRamp));
}

double TireGain(double f, double tread_db) {
  if (f <= 0.0) return 0.0;
  double db = tread_db * BandWeight(f, kTreadLoHz, kTreadHiHz);
  if (f < 40.0) db += 40.0 * std::log10(f / 40.0);
  if (f > kTireKneeHz) db += kTireSlopeDbPerOctave * std::log2(f / kTireKneeHz);
  if (f > kAbsorptionCornerHz) {
    db += kAbsorptionSlopeDbPerOctave * std::log2(f / kAbsorptionCornerHz);
  }
  return DbToAmplitude(db);
}

double WeatherGain(const WeatherProfile& w, double f) {
  double db = w.hiss_boost_2to8khz_db * BandWeight(f, 2000.0, 8000.0);
  if (f > 1000.0) db += w.spectral_tilt_db_per_octave * std::log2(f / 1000.0);
  return DbToAmplitude(db);
}

AudioClip ToClip(const std::vector<double>& x) {
  AudioClip clip;
  clip.sample_rate = kCanonicalRate;
  clip.samples.resize(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    clip.samples[i] = static_cast<float>(std::clamp(x[i], -1.0, 1.0));
  }
  return clip;
}

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(c));
  return out;
}

// Table of reference counts: events, recordings.
struct Cell {
  int events;
  int recordings;
};
constexpr Cell kReference[3][4] = {
    {{384, 10}, {21, 10}, {7, 4}, {0, 0}},        // Tunnel
    {{804, 10}, {529, 10}, {11, 2}, {0, 0}},      // City
    {{1153, 10}, {1032, 9}, {76, 10}, {5, 3}},    // Outer
};

}  // namespace

std::string_view PostName(Post post) {
  switch (post) {
    case Post::kTunnel: return "Tunnel";
    case Post::kCity: return "City";
    case Post::kOuter: return "Outer";
  }
  return "?";
}

std::string_view ConditionName(Condition condition) {
  switch (condition) {
    case Condition::kDry: return "Dry";
    case Condition::kWet: return "Wet";
    case Condition::kSlush: return "Slush";
    case Condition::kSnow: return "Snow";
  }
  return "?";
}

Post ParsePost(std::string_view name) {
  const std::string n = Lower(name);
  for (Post p : kAllPosts) {
    if (Lower(PostName(p)) == n) return p;
  }
  Fail(ErrorCode::kInvalidArgument, "unknown post '" + std::string(name) + "'");
}

Condition ParseCondition(std::string_view name) {
  const std::string n = Lower(name);
  for (Condition c : kAllConditions) {
    if (Lower(ConditionName(c)) == n) return c;
  }
  Fail(ErrorCode::kInvalidArgument,
       "unknown condition '" + std::string(name) + "'");
}

SiteProfile SiteProfile::For(Post post) {
  SiteProfile s;
  s.post = post;
  switch (post) {
    case Post::kTunnel:
      // Dense, exponentially decaying reverberation.
      for (int i = 0; i < 24; ++i) {
        s.reflection_taps.push_back(
            {7.0 + 5.3 * i + 1.7 * std::sin(1.3 * i), 0.6 * std::exp(-i / 8.0)});
      }
      s.ambient_level = 0.004;
      break;
    case Post::kCity:
      s.reflection_taps = {{11.3, 0.35}, {26.9, 0.22}, {47.2, 0.18},
                           {83.5, 0.12}};
      s.ambient_level = 0.003;
      break;
    case Post::kOuter:
      s.ambient_level = 0.002;
      break;
  }
  return s;
}

WeatherProfile WeatherProfile::For(Condition condition) {
  WeatherProfile w;
  w.condition = condition;
  switch (condition) {
    case Condition::kDry:
      break;
    case Condition::kWet:
      w.hiss_boost_2to8khz_db = 6.0;
      break;
    case Condition::kSlush:
      w.hiss_boost_2to8khz_db = 6.0;
      w.modulation = Modulation::kSplashBursts;
      break;
    case Condition::kSnow:
      w.spectral_tilt_db_per_octave = -12.0;
      w.modulation = Modulation::kLowpassMuffle;
      break;
  }
  return w;
}

LabeledEvent SynthEvent(const SiteProfile& site, const WeatherProfile& weather,
                        uint64_t seed) {
  const int rate = kCanonicalRate;
  const size_t n = static_cast<size_t>(kEventSeconds * rate);
  Rng rng(seed);

  std::vector<double> x(n);
  for (double& v : x) v = rng.Gaussian();
  const double peak_s =
      kEventSeconds / 2 + rng.Uniform(-kPeakJitterSeconds, kPeakJitterSeconds);
  const double level =
      kPassByPeakRms * DbToAmplitude(rng.Uniform(-kLevelJitterDb, kLevelJitterDb));
  // Vehicle-to-vehicle tire variation.
  const double tread_db = rng.Uniform(-kTreadMaxDb, kTreadMaxDb);

  // The tire spectrum is normalized before weather shaping so the hiss boost
  // adds energy instead of being renormalized away.
  ShapeSpectrum(x, rate, [&](double f) { return TireGain(f, tread_db); });
  NormalizeRms(x, 1.0);
  ShapeSpectrum(x, rate, [&](double f) { return WeatherGain(weather, f); });

  for (size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    const double phase = t < peak_s ? t / peak_s
                                    : 1.0 + (t - peak_s) / (kEventSeconds - peak_s);
    const double env = 0.5 * (1.0 - std::cos(kPi * phase));
    x[i] *= level * (kEnvelopeFloor + (1.0 - kEnvelopeFloor) * env);
  }

  if (weather.modulation == Modulation::kSplashBursts) {
    const int bursts = rng.Poisson(kSplashRatePerSecond * kEventSeconds);
    for (int b = 0; b < bursts; ++b) {
      const double start = rng.Uniform(0.0, kEventSeconds);
      const double dur = rng.Uniform(0.05, 0.15);
      const double amp = level * rng.Uniform(1.0, 2.0);
      const size_t i0 = static_cast<size_t>(start * rate);
      const size_t len = static_cast<size_t>(dur * rate);
      for (size_t j = 0; j < len; ++j) {
        const double g = rng.Gaussian();
        if (i0 + j >= n) continue;
        const double w = 0.5 * (1.0 - std::cos(2.0 * kPi * j / len));
        x[i0 + j] += amp * w * g;
      }
    }
  }

  if (!site.reflection_taps.empty()) {
    std::vector<double> y = x;
    double energy = 1.0;
    for (const ReflectionTap& tap : site.reflection_taps) {
      const size_t d = static_cast<size_t>(std::lround(tap.delay_ms * rate / 1000.0));
      for (size_t i = d; i < n; ++i) y[i] += tap.gain * x[i - d];
      energy += tap.gain * tap.gain;
    }
    const double norm = 1.0 / std::sqrt(energy);
    for (size_t i = 0; i < n; ++i) x[i] = y[i] * norm;
  }

  // Ambient rumble: white noise rolled off at -6 dB/octave above the corner.
  std::vector<double> ambient(n);
  for (double& v : ambient) v = rng.Gaussian();
  ShapeSpectrum(ambient, rate, [](double f) {
    return f <= 0.0 ? 0.0 : 1.0 / std::max(1.0, f / kAmbientCornerHz);
  });
  NormalizeRms(ambient, site.ambient_level);
  for (size_t i = 0; i < n; ++i) x[i] += ambient[i];

  LabeledEvent ev;
  ev.clip = ToClip(x);
  ev.post = site.post;
  ev.condition = weather.condition;
  ev.seed = seed;
  ev.uuid = Uuid::FromWords(Mix64(seed), Mix64(seed ^ 0x5bd1e995u));
  return ev;
}

int ReferenceEventCount(Post post, Condition condition) {
  return kReference[static_cast<int>(post)][static_cast<int>(condition)].events;
}

int ReferenceRecordingCount(Post post, Condition condition) {
  return kReference[static_cast<int>(post)][static_cast<int>(condition)]
      .recordings;
}

int DatasetPlan::CellCount(Post post, Condition condition) const {
  return static_cast<int>(std::count_if(
      events.begin(), events.end(), [&](const EventPlan& e) {
        return e.post == post && e.condition == condition;
      }));
}

DatasetPlan PlanDataset(double scale, uint64_t seed) {
  if (!(scale > 0.0 && scale <= 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "scale must be in (0, 1]");
  }
  DatasetPlan plan;
  plan.scale = scale;
  plan.seed = seed;
  int64_t clock = kDatasetEpoch;
  for (Post post : kAllPosts) {
    for (Condition cond : kAllConditions) {
      const int ref = ReferenceEventCount(post, cond);
      if (ref == 0) continue;
      // Guard against ceil(0.29 * 100) style round-up from binary scale.
      const int count =
          static_cast<int>(std::ceil(scale * ref - 1e-9));
      const int n_rec = std::clamp(
          static_cast<int>(std::ceil(scale * ReferenceRecordingCount(post, cond) - 1e-9)),
          1, count);
      const size_t first_rec = plan.recordings.size();
      for (int r = 0; r < n_rec; ++r) {
        RecordingPlan rec;
        rec.post = post;
        rec.condition = cond;
        rec.index_in_cell = r;
        rec.started_at = clock;
        clock += 3600;
        plan.recordings.push_back(rec);
      }
      for (int i = 0; i < count; ++i) {
        EventPlan ev;
        ev.post = post;
        ev.condition = cond;
        ev.seed = DeriveSeed(seed, plan.events.size());
        ev.uuid = Uuid::FromWords(Mix64(ev.seed), Mix64(ev.seed ^ 0x5bd1e995u));
        ev.recording = static_cast<int>(first_rec) + i % n_rec;
        RecordingPlan& rec = plan.recordings[ev.recording];
        // Events sit on a 12 s grid inside their 10-minute recording.
        ev.captured_at =
            rec.started_at + 12 * static_cast<int64_t>(rec.events.size() % 50);
        rec.events.push_back(static_cast<int>(plan.events.size()));
        plan.events.push_back(ev);
      }
    }
  }
  return plan;
}

LabeledEvent MaterializeEvent(const EventPlan& plan) {
  LabeledEvent ev = SynthEvent(SiteProfile::For(plan.post),
                               WeatherProfile::For(plan.condition), plan.seed);
  ev.uuid = plan.uuid;
  ev.clip.post_id = Lower(PostName(plan.post));
  ev.clip.captured_at = plan.captured_at;
  return ev;
}

Dataset SynthDataset(double scale, uint64_t seed) {
  Dataset ds;
  ds.plan = PlanDataset(scale, seed);
  ds.events.reserve(ds.plan.events.size());
  for (const EventPlan& e : ds.plan.events) {
    ds.events.push_back(MaterializeEvent(e));
  }
  return ds;
}

int WriteDataset(const DatasetPlan& plan, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) Fail(ErrorCode::kIo, "cannot create " + out_dir.string());
  std::ofstream labels(out_dir / "labels.csv");
  std::ofstream recordings(out_dir / "recordings.csv");
  if (!labels || !recordings) {
    Fail(ErrorCode::kIo, "cannot write manifests in " + out_dir.string());
  }
  labels << "uuid,post,condition,path\n";
  recordings << "recording,post,condition,started_at,duration_s,events\n";
  int written = 0;
  for (const EventPlan& e : plan.events) {
    const fs::path rel = fs::path(std::string(PostName(e.post))) /
                         std::string(ConditionName(e.condition)) /
                         (e.uuid.ToString() + ".wav");
    fs::create_directories((out_dir / rel).parent_path(), ec);
    SaveWav(MaterializeEvent(e).clip, out_dir / rel);
    labels << e.uuid.ToString() << ',' << PostName(e.post) << ','
           << ConditionName(e.condition) << ',' << rel.generic_string() << '\n';
    ++written;
  }
  for (size_t r = 0; r < plan.recordings.size(); ++r) {
    const RecordingPlan& rec = plan.recordings[r];
    recordings << r << ',' << PostName(rec.post) << ','
               << ConditionName(rec.condition) << ',' << rec.started_at << ','
               << rec.duration_seconds << ',' << rec.events.size() << '\n';
  }
  if (!labels || !recordings) Fail(ErrorCode::kIo, "manifest write failed");
  return written;
}

// --- Generic corpus --------------------------------------------------------

namespace {

constexpr size_t kNoiseBlock = 1 << 17;

double LogUniform(Rng& rng, double lo, double hi) {
  return lo * std::pow(hi / lo, rng.Uniform());
}

// Harmonic note sequence with vibrato.
void AddTones(Rng& rng, std::span<double> out, int rate) {
  const double f0 = LogUniform(rng, 70.0, 1200.0);
  const int harmonics = 1 + static_cast<int>(rng.Uniform() * 12);
  const double rolloff = rng.Uniform(0.5, 2.0);
  const double vib_rate = rng.Uniform(3.0, 7.0);
  const double vib_depth = rng.Uniform(0.0, 0.01);
  const double decay = rng.Uniform(0.0, 3.0);
  std::vector<double> phase(harmonics, 0.0);
  for (size_t i = 0; i < out.size(); ++i) {
    const double t = static_cast<double>(i) / rate;
    const double f = f0 * (1.0 + vib_depth * std::sin(2 * kPi * vib_rate * t));
    double s = 0.0;
    for (int h = 1; h <= harmonics; ++h) {
      if (f * h >= rate / 2.0) break;
      phase[h - 1] += 2 * kPi * f * h / rate;
      s += std::sin(phase[h - 1]) / std::pow(h, rolloff);
    }
    out[i] += s * std::exp(-decay * t);
  }
}

// Logarithmic sweep between two random frequencies.
void AddChirp(Rng& rng, std::span<double> out, int rate) {
  const double f1 = LogUniform(rng, 50.0, 18000.0);
  const double f2 = LogUniform(rng, 50.0, 18000.0);
  const double dur = static_cast<double>(out.size()) / rate;
  double phase = 0.0;
  for (size_t i = 0; i < out.size(); ++i) {
    const double t = static_cast<double>(i) / rate;
    phase += 2 * kPi * f1 * std::pow(f2 / f1, t / dur) / rate;
    out[i] += std::sin(phase);
  }
}

// Band-limited noise with a random centre, width and tilt.
void AddFilteredNoise(Rng& rng, std::span<double> out, int rate) {
  std::vector<double> block(kNoiseBlock);
  for (double& v : block) v = rng.Gaussian();
  const double centre = LogUniform(rng, 100.0, 16000.0);
  const double octaves = rng.Uniform(0.3, 5.0);
  const double tilt = rng.Uniform(-9.0, 3.0);
  ShapeSpectrum(block, rate, [&](double f) {
    if (f <= 0.0) return 0.0;
    const double d = std::log2(f / centre);
    if (std::abs(d) > octaves / 2) return 0.0;
    return DbToAmplitude(tilt * d);
  });
  NormalizeRms(block, 1.0);
  for (size_t i = 0; i < out.size(); ++i) out[i] += block[i % kNoiseBlock];
}

// AM/FM texture: sinusoidal FM carrier under a slow amplitude modulator.
void AddModulated(Rng& rng, std::span<double> out, int rate) {
  const double carrier = LogUniform(rng, 150.0, 9000.0);
  const double mod_f = LogUniform(rng, 0.5, 60.0);
  const double index = rng.Uniform(0.0, 8.0);
  const double am_f = LogUniform(rng, 0.2, 20.0);
  const double am_depth = rng.Uniform(0.0, 0.9);
  double phase = 0.0;
  for (size_t i = 0; i < out.size(); ++i) {
    const double t = static_cast<double>(i) / rate;
    const double inst =
        carrier + index * mod_f * std::cos(2 * kPi * mod_f * t);
    phase += 2 * kPi * std::clamp(inst, 0.0, rate / 2.0 - 1.0) / rate;
    out[i] += (1.0 - am_depth * (0.5 + 0.5 * std::sin(2 * kPi * am_f * t))) *
              std::sin(phase);
  }
}

using Generator = void (*)(Rng&, std::span<double>, int);
constexpr Generator kGenerators[] = {AddTones, AddChirp, AddFilteredNoise,
                                     AddModulated};
// Relative weights of kGenerators for the primary generator of a segment.
// Broadband noise is drawn half as often as the tonal generators.
constexpr double kGeneratorWeights[] = {2.0, 2.0, 1.0, 2.0};

int PickGenerator(Rng& rng) {
  double total = 0.0;
  for (double w : kGeneratorWeights) total += w;
  double u = rng.Uniform() * total;
  int g = 0;
  while (g < 3 && u >= kGeneratorWeights[g]) u -= kGeneratorWeights[g++];
  return g;
}

}  // namespace

std::vector<AudioClip> SynthGenericCorpus(int n_clips, uint64_t seed,
                                          double seconds) {
  if (n_clips <= 0) Fail(ErrorCode::kInvalidArgument, "n_clips must be > 0");
  if (!(seconds > 0.0)) Fail(ErrorCode::kInvalidArgument, "seconds must be > 0");
  const int rate = kCanonicalRate;
  const size_t n = static_cast<size_t>(seconds * rate);
  const size_t fade = static_cast<size_t>(0.01 * rate);
  std::vector<AudioClip> corpus;
  corpus.reserve(n_clips);
  for (int c = 0; c < n_clips; ++c) {
    Rng rng(DeriveSeed(seed, c));
    std::vector<double> x(n, 0.0);
    // Segments of 0.5-2.5 s; each mixes one or two generators.
    size_t pos = 0;
    while (pos < n) {
      const size_t len = std::min(
          n - pos, static_cast<size_t>(rng.Uniform(0.5, 2.5) * rate));
      std::vector<double> s(len, 0.0);
      kGenerators[PickGenerator(rng)](rng, s, rate);
      if (rng.Uniform() < 0.4) {
        std::vector<double> extra(len, 0.0);
        kGenerators[static_cast<int>(rng.Uniform() * 4) % 4](rng, extra, rate);
        const double mix = DbToAmplitude(rng.Uniform(-20.0, 0.0));
        for (size_t i = 0; i < len; ++i) s[i] += mix * extra[i];
      }
      NormalizeRms(s, DbToAmplitude(rng.Uniform(-30.0, -6.0)));
      for (size_t i = 0; i < len; ++i) {
        double g = 1.0;
        if (i < fade) g = static_cast<double>(i) / fade;
        if (len - i <= fade) g = std::min(g, static_cast<double>(len - i) / fade);
        x[pos + i] = s[i] * g;
      }
      pos += len;
    }
    corpus.push_back(ToClip(x));
  }
  return corpus;
}

}  // namespace zsdc
