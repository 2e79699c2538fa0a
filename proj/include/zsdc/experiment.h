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

// End-to-end experiment: synthesize the road dataset, train the codec on the
// generic corpus, push every event through edge storage, the wire protocol
// and the central archive, then tabulate sizes, AUROC and reconstruction
// error. Also renders log-mel spectrograms as PGM images.

#ifndef ZSDC_EXPERIMENT_H_
#define ZSDC_EXPERIMENT_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zsdc/anomaly.h"
#include "zsdc/audio.h"
#include "zsdc/codec.h"
#include "zsdc/edge.h"

namespace zsdc {

struct ExperimentConfig {
  double scale = 0.02;
  // Dataset seed; the fixtures for the reconstruction table derive from it.
  uint64_t seed = 1234;
  uint64_t codec_seed = 1234;
  int generic_clips = 24;
  double generic_seconds = 10.0;
  CodecSpec codec;
  // Events in the reconstruction-error table.
  int mse_events = 20;
  StoragePolicy storage;
  int64_t max_batch_bytes = 1 << 20;
  // Ship batches over a localhost TCP socket instead of an in-memory pipe.
  bool net = false;
  // Load this codec instead of training one (not part of the snapshot when
  // empty).
  std::string codec_model;
  // Keep the archive here; a fresh temporary directory otherwise.
  std::string archive_dir;

  // kInvalidArgument on out-of-range values.
  void Validate() const;
};

// Flat key=value view, in a fixed key order.
std::vector<std::pair<std::string, std::string>> ConfigEntries(const ExperimentConfig& config);
// kInvalidArgument on an unknown key or unparseable value.
void SetConfigValue(ExperimentConfig& config, const std::string& key, const std::string& value);
// Plain key=value lines; '#' starts a comment. kIo if unreadable, kFormat
// naming the line on a syntax error.
ExperimentConfig LoadConfig(const std::filesystem::path& path);

struct SizeRow {
  std::string variant;
  int sample_rate = 0;
  // Stored size of one second of audio.
  uint64_t bytes = 0;
  // bytes / the 44.1 kHz float-32 WAV size.
  double ratio = 0.0;
  bool operator==(const SizeRow&) const = default;
};

struct AurocSummary {
  std::vector<std::string> rows;
  std::vector<std::array<double, 4>> auroc;
  std::array<double, 4> average{};
  std::array<double, 4> ratio{};
  bool operator==(const AurocSummary&) const = default;
};

struct MseRow {
  std::string source;
  int sample_rate = 0;
  // Mean over events of MSE(original, decode(encode(source))).
  double mse = 0.0;
  bool operator==(const MseRow&) const = default;
};

struct TransmissionSummary {
  uint64_t bytes_sent = 0;
  uint64_t raw_equivalent_bytes = 0;
  std::optional<double> ratio;
  uint64_t batches = 0;
  uint64_t retries = 0;
  uint64_t records_archived = 0;
  bool operator==(const TransmissionSummary&) const = default;
};

struct ExperimentReport {
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<SizeRow> size_table;
  AurocSummary auroc_table;
  std::vector<MseRow> mse_table;
  // max_ij |MSE_i - MSE_j| / MSE_f44 over the table rows.
  double mse_relative_spread = 0.0;
  // The same quantity per event, maximized over events.
  double mse_max_event_spread = 0.0;
  TransmissionSummary transmission;
  bool operator==(const ExperimentReport&) const = default;
};

std::string ReportToJson(const ExperimentReport& report);
// kFormat on malformed input.
ExperimentReport ReportFromJson(const std::string& json);
// Long format, one value per line: section,row,column,value.
std::string ReportToCsv(const ExperimentReport& report);
ExperimentReport ReportFromCsv(const std::string& csv);
std::string ReportToText(const ExperimentReport& report);

// Size accounting for one second of audio per variant. `asr_bytes` is the
// serialized latent size of a one-second clip.
std::vector<SizeRow> MakeSizeTable(uint64_t asr_bytes);

struct MseResult {
  std::vector<MseRow> rows;
  double relative_spread = 0.0;
  double max_event_spread = 0.0;
};
// Presents each event at 44.1, 22.05 and 11.025 kHz, codes all three and
// compares against the original.
MseResult ReconstructionTable(const Codec& codec, const std::vector<AudioClip>& events);

// Events for the reconstruction table: alternating Dry and Wet across the
// three posts.
std::vector<AudioClip> ReconstructionFixtures(int n_events, uint64_t seed);

using ProgressSink = std::function<void(const std::string&)>;

// Failures are rethrown with the stage name prefixed to the message and the
// original error code kept.
ExperimentReport RunExperiment(const ExperimentConfig& config,
                               const ProgressSink& progress = nullptr);

// Trains the default codec of `config` on its generic corpus.
Codec TrainExperimentCodec(const ExperimentConfig& config);

// Binary PGM (P5) of the log-mel matrix: time on x, bands on y with the
// lowest band at the bottom, mapped linearly from [min, max] to 0..255. A
// constant matrix maps to 0. kInsufficientLength for clips under one frame.
std::vector<uint8_t> RenderSpectrogramPgm(const AudioClip& clip);
void PlotSpectrogram(const AudioClip& clip, const std::filesystem::path& out_path);

}  // namespace zsdc

#endif  // ZSDC_EXPERIMENT_H_
