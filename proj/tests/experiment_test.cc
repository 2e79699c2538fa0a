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

#include "zsdc/experiment.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numeric>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "test_support.h"
#include "zsdc/codec.h"
#include "zsdc/error.h"
#include "zsdc/mel.h"
#include "zsdc/resample.h"

namespace zsdc {
namespace {

namespace fs = std::filesystem;

template <typename Fn>
void ExpectCode(ErrorCode code, Fn fn, const std::string& needle = "") {
  try {
    fn();
    ADD_FAILURE() << "no error thrown";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
  }
}

fs::path CachedCodecPath() {
  testing::TrainedCodec(1234);
  return fs::path(ZSDC_TEST_CACHE_DIR) / "codec_1234.zsdm";
}

ExperimentConfig SmallConfig() {
  ExperimentConfig c;
  c.scale = 0.005;
  c.mse_events = 3;
  c.codec_model = CachedCodecPath().string();
  return c;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

ExperimentReport SampleReport() {
  ExperimentReport r;
  r.config = {{"scale", "0.02"}, {"note", "a,b \"quoted\""}};
  r.size_table = MakeSizeTable(3754);
  r.auroc_table.rows = {"Tunnel", "City"};
  r.auroc_table.auroc = {{0.9, 0.8, 0.7, 0.6}, {1.0, 0.5, 0.25, 0.125}};
  r.auroc_table.average = {0.95, 0.65, 0.475, 0.3625};
  r.auroc_table.ratio = {1.0, 0.65 / 0.95, 0.475 / 0.95, 0.3625 / 0.95};
  r.mse_table = {{"f44", 44100, 5.2348e-3}, {"f22", 22050, 5.2361e-3}, {"f11", 11025, 5.4351e-3}};
  r.mse_relative_spread = 0.0383;
  r.mse_max_event_spread = 0.0605;
  r.transmission = {1234567, 61234567, 1234567.0 / 61234567.0, 7, 2, 96};
  return r;
}

TEST(ConfigTest, DefaultsRoundTripThroughEntries) {
  ExperimentConfig a;
  a.seed = 77;
  a.scale = 0.125;
  a.net = true;
  a.archive_dir = "/tmp/x";
  ExperimentConfig b;
  for (const auto& [k, v] : ConfigEntries(a)) SetConfigValue(b, k, v);
  EXPECT_EQ(ConfigEntries(a), ConfigEntries(b));
}

TEST(ConfigTest, EntriesOmitEmptyPaths) {
  for (const auto& [k, v] : ConfigEntries(ExperimentConfig{})) {
    EXPECT_NE(k, "codec_model");
    EXPECT_NE(k, "archive_dir");
  }
}

TEST(ConfigTest, UnknownKeyAndBadValueAreRejected) {
  ExperimentConfig c;
  ExpectCode(ErrorCode::kInvalidArgument, [&] { SetConfigValue(c, "colour", "1"); }, "colour");
  ExpectCode(ErrorCode::kInvalidArgument, [&] { SetConfigValue(c, "seed", "-3x"); });
  ExpectCode(ErrorCode::kInvalidArgument, [&] { SetConfigValue(c, "net", "maybe"); });
}

TEST(ConfigTest, LoadParsesCommentsAndWhitespace) {
  const fs::path dir = testing::ScratchDir("config_load");
  WriteText(dir / "a.conf", "# experiment\n  scale = 0.5  # half\n\nseed=9\nnet=true\n");
  const ExperimentConfig c = LoadConfig(dir / "a.conf");
  EXPECT_DOUBLE_EQ(c.scale, 0.5);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_TRUE(c.net);
  EXPECT_EQ(c.codec_seed, ExperimentConfig{}.codec_seed);
}

TEST(ConfigTest, LoadErrorsNameTheLine) {
  const fs::path dir = testing::ScratchDir("config_errors");
  WriteText(dir / "syntax.conf", "scale=0.1\nseed 4\n");
  ExpectCode(ErrorCode::kFormat, [&] { LoadConfig(dir / "syntax.conf"); }, "syntax.conf:2");
  WriteText(dir / "key.conf", "\n\nbogus=1\n");
  ExpectCode(ErrorCode::kFormat, [&] { LoadConfig(dir / "key.conf"); }, "key.conf:3");
  ExpectCode(ErrorCode::kIo, [&] { LoadConfig(dir / "missing.conf"); });
}

TEST(ConfigTest, ValidateRejectsOutOfRange) {
  ExperimentConfig c;
  c.scale = 0.0;
  ExpectCode(ErrorCode::kInvalidArgument, [&] { c.Validate(); }, "scale");
  c = ExperimentConfig{};
  c.mse_events = 0;
  ExpectCode(ErrorCode::kInvalidArgument, [&] { c.Validate(); }, "mse_events");
}

TEST(SizeTableTest, MatchesWavArithmetic) {
  const std::vector<SizeRow> rows = MakeSizeTable(3754);
  ASSERT_EQ(rows.size(), 4u);
  const double raw = 44.0 + 4.0 * 44100.0;
  const std::vector<std::pair<std::string, uint64_t>> expected = {
      {"f44", 176444}, {"f22", 88244}, {"f11", 44144}, {"asr", 3754}};
  for (size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].variant, expected[i].first);
    EXPECT_EQ(rows[i].bytes, expected[i].second);
    EXPECT_DOUBLE_EQ(rows[i].ratio, static_cast<double>(expected[i].second) / raw);
  }
  EXPECT_EQ(rows[2].sample_rate, 11025);
}

TEST(ReportTest, JsonRoundTrip) {
  const ExperimentReport r = SampleReport();
  EXPECT_EQ(ReportFromJson(ReportToJson(r)), r);
}

TEST(ReportTest, JsonWithoutTransmissionRatio) {
  ExperimentReport r = SampleReport();
  r.transmission.ratio.reset();
  EXPECT_EQ(ReportFromJson(ReportToJson(r)), r);
}

TEST(ReportTest, CsvRoundTrip) {
  const ExperimentReport r = SampleReport();
  const std::string csv = ReportToCsv(r);
  EXPECT_EQ(csv.rfind("section,row,column,value\n", 0), 0u);
  EXPECT_EQ(ReportFromCsv(csv), r);
}

TEST(ReportTest, MalformedInputIsFormatError) {
  ExpectCode(ErrorCode::kFormat, [] { ReportFromJson("{\"config\": 3"); });
  ExpectCode(ErrorCode::kFormat, [] { ReportFromJson("{}"); });
  ExpectCode(ErrorCode::kFormat, [] { ReportFromCsv("section,row,column,value\nsize,f44\n"); });
  ExpectCode(ErrorCode::kFormat,
             [] { ReportFromCsv("section,row,column,value\nmse_spread,other,value,1\n"); });
}

TEST(ReportTest, TextNamesEverySection) {
  const std::string text = ReportToText(SampleReport());
  for (const char* needle : {"f44", "asr", "Tunnel", "City", "0.0383", "0.0605"}) {
    EXPECT_NE(text.find(needle), std::string::npos) << needle;
  }
}

TEST(ReconstructionTest, SpreadsFollowFromRows) {
  const std::vector<AudioClip> events = ReconstructionFixtures(2, 5);
  ASSERT_EQ(events.size(), 2u);
  const MseResult m = ReconstructionTable(testing::TrainedCodec(), events);
  ASSERT_EQ(m.rows.size(), 3u);
  std::vector<double> v;
  for (const MseRow& row : m.rows) v.push_back(row.mse);
  const double table = (*std::max_element(v.begin(), v.end()) -
                        *std::min_element(v.begin(), v.end())) / v[0];
  EXPECT_NEAR(m.relative_spread, table, 1e-12);
  // The spread of a mean never exceeds the largest per-event spread.
  EXPECT_LE(m.relative_spread, m.max_event_spread + 1e-12);

  double direct = 0.0;
  for (const AudioClip& x : events) {
    const AudioClip d = Decode(testing::TrainedCodec(), Encode(testing::TrainedCodec(), x));
    direct += testing::DirectMse(x.samples, d.samples);
  }
  EXPECT_NEAR(m.rows[0].mse, direct / 2.0, 1e-9 * direct);
}

TEST(ReconstructionTest, FixturesAreSeeded) {
  const auto a = ReconstructionFixtures(4, 11);
  const auto b = ReconstructionFixtures(4, 11);
  const auto c = ReconstructionFixtures(4, 12);
  ASSERT_EQ(a.size(), 4u);
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].samples, b[i].samples);
    EXPECT_NE(a[i].samples, c[i].samples);
  }
  ExpectCode(ErrorCode::kInvalidArgument,
             [] { ReconstructionTable(testing::TrainedCodec(), {}); });
}

TEST(RunExperimentTest, SmallRunIsConsistentAndDeterministic) {
  std::vector<std::string> stages;
  const ExperimentConfig config = SmallConfig();
  const ExperimentReport a =
      RunExperiment(config, [&](const std::string& s) { stages.push_back(s); });
  const ExperimentReport b = RunExperiment(config);
  EXPECT_EQ(ReportToJson(a), ReportToJson(b));
  EXPECT_EQ(stages, (std::vector<std::string>{"stage config", "stage gen-data",
                                              "stage train-codec", "stage pipeline",
                                              "stage evaluate"}));

  const TransmissionSummary& t = a.transmission;
  ASSERT_TRUE(t.ratio.has_value());
  EXPECT_DOUBLE_EQ(*t.ratio, static_cast<double>(t.bytes_sent) /
                                 static_cast<double>(t.raw_equivalent_bytes));
  EXPECT_GT(t.records_archived, 0u);
  EXPECT_GE(t.batches, 1u);

  const uint64_t one_second = 64 + 45 * 82;
  ASSERT_EQ(a.size_table.size(), 4u);
  EXPECT_EQ(a.size_table[3].bytes, one_second);
  EXPECT_EQ(a.mse_table.size(), 3u);
  for (size_t k = 0; k < 4; ++k) {
    const double avg =
        std::accumulate(a.auroc_table.auroc.begin(), a.auroc_table.auroc.end(), 0.0,
                        [&](double s, const std::array<double, 4>& row) { return s + row[k]; }) /
        static_cast<double>(a.auroc_table.auroc.size());
    EXPECT_NEAR(a.auroc_table.average[k], avg, 1e-12);
    EXPECT_NEAR(a.auroc_table.ratio[k], a.auroc_table.average[k] / a.auroc_table.average[0],
                1e-12);
  }
}

TEST(RunExperimentTest, ErrorsCarryTheStage) {
  ExperimentConfig c = SmallConfig();
  c.scale = 2.0;
  ExpectCode(ErrorCode::kInvalidArgument, [&] { RunExperiment(c); }, "stage config: ");
  c = SmallConfig();
  c.codec_model = (testing::ScratchDir("stage_errors") / "absent.zsdm").string();
  try {
    RunExperiment(c);
    ADD_FAILURE() << "no error thrown";
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()).rfind("stage train-codec: ", 0), 0u) << e.what();
  }
}

struct Pgm {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;
  double RowMean(int row) const {
    double s = 0.0;
    for (int x = 0; x < width; ++x) s += pixels[static_cast<size_t>(row) * width + x];
    return s / width;
  }
};

Pgm ParsePgm(const std::vector<uint8_t>& bytes) {
  const std::string text(bytes.begin(), bytes.end());
  Pgm p;
  int maxval = 0;
  char magic[3] = {};
  int consumed = 0;
  EXPECT_EQ(std::sscanf(text.c_str(), "%2s %d %d %d%n", magic, &p.width, &p.height, &maxval,
                        &consumed),
            4);
  EXPECT_STREQ(magic, "P5");
  EXPECT_EQ(maxval, 255);
  p.pixels.assign(bytes.begin() + consumed + 1, bytes.end());
  EXPECT_EQ(p.pixels.size(), static_cast<size_t>(p.width) * p.height);
  return p;
}

TEST(SpectrogramTest, HeaderAndDimensions) {
  const std::vector<uint8_t> bytes = RenderSpectrogramPgm(testing::Sine(1000.0, 1.0, 44100));
  const std::string header = "P5\n85 64\n255\n";
  ASSERT_GE(bytes.size(), header.size());
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + header.size()), header);
  EXPECT_EQ(bytes.size(), header.size() + 85u * 64u);
}

TEST(SpectrogramTest, SilenceIsUniform) {
  const Pgm p = ParsePgm(RenderSpectrogramPgm(testing::Silence(1.0, 44100)));
  EXPECT_TRUE(std::all_of(p.pixels.begin(), p.pixels.end(), [](uint8_t v) { return v == 0; }));
}

TEST(SpectrogramTest, LowBandsAreAtTheBottom) {
  const Pgm p = ParsePgm(RenderSpectrogramPgm(testing::Sine(200.0, 1.0, 44100)));
  double top = 0.0, bottom = 0.0;
  for (int r = 0; r < 8; ++r) top += p.RowMean(r);
  for (int r = p.height - 8; r < p.height; ++r) bottom += p.RowMean(r);
  EXPECT_GT(bottom, top);
}

TEST(SpectrogramTest, QuarterRateClipIsDarkAboveItsNyquist) {
  const AudioClip wide = testing::BandNoise(100.0, 15000.0, 2.0, 44100, 0.1, 3);
  const AudioClip f11 = Resample(wide, 11025);
  const Pgm p = ParsePgm(RenderSpectrogramPgm(f11));
  // Rows 0..15 hold the top 16 HTK mel bands, all above 7 kHz.
  double top = 0.0, low = 0.0;
  for (int r = 0; r < 16; ++r) top += p.RowMean(r) / 16.0;
  for (int r = 40; r < 64; ++r) low += p.RowMean(r) / 24.0;
  EXPECT_LT(top, 0.5 * low);

  const MelFrames mel = MelSpectrogram(Canonicalize(f11));
  EXPECT_LT(MelEnergyFractionAbove(mel, 5512.0), 0.01);
  const AudioClip asr = Decode(testing::TrainedCodec(), Encode(testing::TrainedCodec(), f11));
  EXPECT_GT(MelEnergyFractionAbove(MelSpectrogram(asr), 5512.0), 0.0);
}

TEST(SpectrogramTest, PlotWritesTheRenderedBytes) {
  const fs::path out = testing::ScratchDir("plot") / "s.pgm";
  const AudioClip clip = testing::Sine(440.0, 0.5, 22050);
  PlotSpectrogram(clip, out);
  std::ifstream in(out, std::ios::binary);
  const std::vector<uint8_t> file((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(file, RenderSpectrogramPgm(clip));
  ExpectCode(ErrorCode::kIo, [&] { PlotSpectrogram(clip, out.parent_path() / "no" / "x.pgm"); });
  ExpectCode(ErrorCode::kInsufficientLength,
             [] { RenderSpectrogramPgm(testing::Silence(0.01, 44100)); });
}

}  // namespace
}  // namespace zsdc
