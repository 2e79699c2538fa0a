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

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "zsdc/central.h"
#include "zsdc/datagen.h"
#include "zsdc/error.h"
#include "zsdc/latent.h"
#include "zsdc/mel.h"
#include "zsdc/resample.h"
#include "zsdc/rng.h"
#include "zsdc/transport.h"
#include "zsdc/wav.h"

namespace zsdc {
namespace {

using Json = nlohmann::ordered_json;

std::string FormatDouble(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

template <typename T>
bool ParseNumber(const std::string& s, T& out) {
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return !s.empty() && r.ec == std::errc() && r.ptr == s.data() + s.size();
}

template <typename T>
T ParseOrFail(const std::string& s, const std::string& what) {
  T v{};
  if (!ParseNumber(s, v)) Fail(ErrorCode::kInvalidArgument, "bad value for " + what + ": '" + s + "'");
  return v;
}

std::string Trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string LowerPostId(Post post) {
  std::string s(PostName(post));
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Runs `fn`, prefixing the stage name to any library error.
template <typename Fn>
auto Stage(const std::string& name, const ProgressSink& progress, Fn fn) {
  if (progress) progress("stage " + name);
  try {
    return fn();
  } catch (const Error& e) {
    Fail(e.code(), "stage " + name + ": " + e.what());
  }
}

// CSV field quoting: fields holding a comma, quote or newline are quoted.
std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::vector<std::string>> ParseCsvRows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) Fail(ErrorCode::kFormat, "unterminated quote in CSV");
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}


// Removes a temporary archive directory when the experiment ends.
class TempDir {
 public:
  TempDir() {
    static std::atomic<uint64_t> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("zsdc-archive-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

struct PipelineResult {
  TransmissionSummary transmission;
  // Restored clip per event, in event order.
  std::vector<AudioClip> restored;
};

// Edge storage -> wire protocol -> central archive for every event, then
// reads the archived audio back.
PipelineResult RunPipeline(const ExperimentConfig& config, const Codec& codec,
                           const Dataset& dataset, const std::filesystem::path& archive_root) {
  Archive archive(archive_root);
  std::atomic<bool> stop{false};
  const LogSink quiet = [](const std::string&) {};
  std::thread server;
  Sender::Connector connect;
  std::unique_ptr<TcpListener> listener;
  std::shared_ptr<ByteStream> edge_end;
  if (config.net) {
    listener = std::make_unique<TcpListener>("127.0.0.1", 0);
    server = std::thread([&] { ServeForever(*listener, archive, codec, stop, quiet); });
    const uint16_t port = listener->port();
    connect = [port] {
      return TcpStream::Connect("127.0.0.1", port, std::chrono::milliseconds(5000));
    };
  } else {
    auto [edge, central] = MakeMemoryPipe();
    edge_end = edge;
    server = std::thread([&, central = central] {
      ServeConnection(*central, archive, codec, stop, quiet);
    });
    connect = [edge = edge] { return edge; };
  }

  PipelineResult result;
  Sender sender(connect, SendOptions{});
  StorageState state;
  UuidGenerator uuids(DeriveSeed(config.seed, 0x5eed));
  std::unordered_map<Uuid, size_t> event_of;
  uint64_t next_batch = 1;
  int64_t now = 0;
  std::string failure;

  auto drain = [&] {
    while (std::any_of(state.records.begin(), state.records.end(),
                       [](const StoredRecord& r) { return !r.in_flight; })) {
      const TransferBatch batch = TakeFlushBatch(state, config.max_batch_bytes, next_batch++);
      const AckResult ack = sender.Deliver(batch);
      if (!ack.ok()) Fail(ErrorCode::kRetriable, "batch not acknowledged: " + ack.detail);
      sender.counter().raw_equivalent_bytes += AcknowledgeBatch(state, batch, now);
      ++result.transmission.batches;
    }
  };

  try {
    for (size_t i = 0; i < dataset.events.size(); ++i) {
      AudioClip clip = dataset.events[i].clip;
      clip.post_id = LowerPostId(dataset.plan.events[i].post);
      clip.captured_at = dataset.plan.events[i].captured_at;
      now = std::max(now, *clip.captured_at);
      const IngestReport r = Ingest(state, config.storage, codec, clip, now, uuids);
      if (!r.evicted.empty()) {
        Fail(ErrorCode::kContractViolation,
             "edge storage evicted records before a flush; raise capacity_bytes");
      }
      event_of[r.uuid] = i;
      if (ShouldFlush(state, config.storage, now)) drain();
    }
    drain();
  } catch (...) {
    stop = true;
    if (edge_end) edge_end->Close();
    server.join();
    throw;
  }
  stop = true;
  if (edge_end) edge_end->Close();
  server.join();

  const TransferCounter& c = sender.counter();
  result.transmission.bytes_sent = c.bytes_sent;
  result.transmission.raw_equivalent_bytes = c.raw_equivalent_bytes;
  result.transmission.ratio = MakeCostReport(c).ratio;
  result.transmission.retries = c.retries;

  result.restored.resize(dataset.events.size());
  std::vector<bool> found(dataset.events.size(), false);
  for (const ManifestEntry& e : archive.entries()) {
    const auto it = event_of.find(e.uuid);
    if (it == event_of.end()) continue;
    try {
      result.restored[it->second] = LoadWav(archive_root / e.wav_path);
    } catch (const Error& err) {
      Fail(ErrorCode::kCorpusIntegrity,
           "archived audio for " + e.uuid.ToString() + " unreadable: " + err.what());
    }
    found[it->second] = true;
    ++result.transmission.records_archived;
  }
  for (size_t i = 0; i < found.size(); ++i) {
    if (!found[i]) {
      Fail(ErrorCode::kCorpusIntegrity,
           "event " + dataset.plan.events[i].uuid.ToString() + " missing from the archive");
    }
  }
  return result;
}

const char* const kVariantLabels[4] = {"f44", "f22", "f11", "asr"};

// max_ij |m_i - m_j| / m_0.
double RelativeSpread(const std::array<double, 3>& m) {
  const auto [lo, hi] = std::minmax_element(m.begin(), m.end());
  return (*hi - *lo) / m[0];
}

}  // namespace

void ExperimentConfig::Validate() const {
  if (!(scale > 0.0 && scale <= 1.0)) Fail(ErrorCode::kInvalidArgument, "scale must be in (0, 1]");
  if (generic_clips <= 0) Fail(ErrorCode::kInvalidArgument, "generic_clips must be > 0");
  if (!(generic_seconds > 0.0)) Fail(ErrorCode::kInvalidArgument, "generic_seconds must be > 0");
  if (mse_events <= 0) Fail(ErrorCode::kInvalidArgument, "mse_events must be > 0");
  if (max_batch_bytes <= 0) Fail(ErrorCode::kInvalidArgument, "max_batch_bytes must be > 0");
  codec.Validate();
  storage.Validate();
}

std::vector<std::pair<std::string, std::string>> ConfigEntries(const ExperimentConfig& c) {
  std::vector<std::pair<std::string, std::string>> out = {
      {"scale", FormatDouble(c.scale)},
      {"seed", std::to_string(c.seed)},
      {"codec_seed", std::to_string(c.codec_seed)},
      {"generic_clips", std::to_string(c.generic_clips)},
      {"generic_seconds", FormatDouble(c.generic_seconds)},
      {"frame_size", std::to_string(c.codec.frame_size)},
      {"hop", std::to_string(c.codec.hop)},
      {"n_subvectors", std::to_string(c.codec.n_subvectors)},
      {"n_stages", std::to_string(c.codec.n_stages)},
      {"codebook_size", std::to_string(c.codec.codebook_size)},
      {"byte_budget_per_second", std::to_string(c.codec.byte_budget_per_second)},
      {"mse_events", std::to_string(c.mse_events)},
      {"capacity_bytes", std::to_string(c.storage.capacity_bytes)},
      {"fill_threshold", FormatDouble(c.storage.fill_threshold)},
      {"flush_interval_seconds", std::to_string(c.storage.flush_interval_seconds)},
      {"max_batch_bytes", std::to_string(c.max_batch_bytes)},
      {"net", c.net ? "true" : "false"},
  };
  if (!c.codec_model.empty()) out.emplace_back("codec_model", c.codec_model);
  if (!c.archive_dir.empty()) out.emplace_back("archive_dir", c.archive_dir);
  return out;
}

void SetConfigValue(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "scale") {
    c.scale = ParseOrFail<double>(value, key);
  } else if (key == "seed") {
    c.seed = ParseOrFail<uint64_t>(value, key);
  } else if (key == "codec_seed") {
    c.codec_seed = ParseOrFail<uint64_t>(value, key);
  } else if (key == "generic_clips") {
    c.generic_clips = ParseOrFail<int>(value, key);
  } else if (key == "generic_seconds") {
    c.generic_seconds = ParseOrFail<double>(value, key);
  } else if (key == "frame_size") {
    c.codec.frame_size = ParseOrFail<int>(value, key);
  } else if (key == "hop") {
    c.codec.hop = ParseOrFail<int>(value, key);
  } else if (key == "n_subvectors") {
    c.codec.n_subvectors = ParseOrFail<int>(value, key);
  } else if (key == "n_stages") {
    c.codec.n_stages = ParseOrFail<int>(value, key);
  } else if (key == "codebook_size") {
    c.codec.codebook_size = ParseOrFail<int>(value, key);
  } else if (key == "byte_budget_per_second") {
    c.codec.byte_budget_per_second = ParseOrFail<int>(value, key);
  } else if (key == "mse_events") {
    c.mse_events = ParseOrFail<int>(value, key);
  } else if (key == "capacity_bytes") {
    c.storage.capacity_bytes = ParseOrFail<int64_t>(value, key);
  } else if (key == "fill_threshold") {
    c.storage.fill_threshold = ParseOrFail<double>(value, key);
  } else if (key == "flush_interval_seconds") {
    c.storage.flush_interval_seconds = ParseOrFail<int64_t>(value, key);
  } else if (key == "max_batch_bytes") {
    c.max_batch_bytes = ParseOrFail<int64_t>(value, key);
  } else if (key == "net") {
    if (value == "true" || value == "1") {
      c.net = true;
    } else if (value == "false" || value == "0") {
      c.net = false;
    } else {
      Fail(ErrorCode::kInvalidArgument, "bad value for net: '" + value + "'");
    }
  } else if (key == "codec_model") {
    c.codec_model = value;
  } else if (key == "archive_dir") {
    c.archive_dir = value;
  } else {
    Fail(ErrorCode::kInvalidArgument, "unknown config key '" + key + "'");
  }
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot read config " + path.string());
  ExperimentConfig c;
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const std::string body = Trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const size_t eq = body.find('=');
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (eq == std::string::npos) Fail(ErrorCode::kFormat, where + ": expected key=value");
    try {
      SetConfigValue(c, Trim(body.substr(0, eq)), Trim(body.substr(eq + 1)));
    } catch (const Error& e) {
      Fail(ErrorCode::kFormat, where + ": " + e.what());
    }
  }
  return c;
}

std::vector<SizeRow> MakeSizeTable(uint64_t asr_bytes) {
  const double raw = static_cast<double>(WavFileBytes(kCanonicalRate));
  std::vector<SizeRow> rows;
  for (int rate : {kCanonicalRate, kHalfRate, kQuarterRate}) {
    const uint64_t bytes = WavFileBytes(static_cast<size_t>(rate));
    rows.push_back({rate == kCanonicalRate ? "f44" : rate == kHalfRate ? "f22" : "f11", rate,
                    bytes, static_cast<double>(bytes) / raw});
  }
  rows.push_back({"asr", kCanonicalRate, asr_bytes, static_cast<double>(asr_bytes) / raw});
  return rows;
}

std::vector<AudioClip> ReconstructionFixtures(int n_events, uint64_t seed) {
  std::vector<AudioClip> out;
  for (int i = 0; i < n_events; ++i) {
    const Post post = kAllPosts[static_cast<size_t>(i) % kAllPosts.size()];
    const Condition cond = i % 2 ? Condition::kWet : Condition::kDry;
    out.push_back(SynthEvent(SiteProfile::For(post), WeatherProfile::For(cond),
                             DeriveSeed(seed, 0x4d5345 + static_cast<uint64_t>(i)))
                      .clip);
  }
  return out;
}

MseResult ReconstructionTable(const Codec& codec, const std::vector<AudioClip>& events) {
  if (events.empty()) Fail(ErrorCode::kInvalidArgument, "no events for the reconstruction table");
  constexpr int kRates[3] = {kCanonicalRate, kHalfRate, kQuarterRate};
  std::array<double, 3> sum{};
  MseResult result;
  for (const AudioClip& x : events) {
    std::array<double, 3> mse{};
    for (int k = 0; k < 3; ++k) {
      const AudioClip source = Resample(x, kRates[k]);
      mse[k] = Mse(x, Decode(codec, Encode(codec, source)));
      sum[k] += mse[k];
    }
    result.max_event_spread = std::max(result.max_event_spread, RelativeSpread(mse));
  }
  std::array<double, 3> mean{};
  for (int k = 0; k < 3; ++k) {
    mean[k] = sum[k] / static_cast<double>(events.size());
    result.rows.push_back({kVariantLabels[k], kRates[k], mean[k]});
  }
  result.relative_spread = RelativeSpread(mean);
  return result;
}

Codec TrainExperimentCodec(const ExperimentConfig& config) {
  const std::vector<AudioClip> corpus =
      SynthGenericCorpus(config.generic_clips, config.codec_seed, config.generic_seconds);
  return TrainCodec(config.codec, corpus, config.codec_seed).codec;
}

ExperimentReport RunExperiment(const ExperimentConfig& config, const ProgressSink& progress) {
  Stage("config", progress, [&] {
    config.Validate();
    return 0;
  });
  ExperimentReport report;
  report.config = ConfigEntries(config);

  const Dataset dataset =
      Stage("gen-data", progress, [&] { return SynthDataset(config.scale, config.seed); });
  const Codec codec = Stage("train-codec", progress, [&] {
    return config.codec_model.empty() ? TrainExperimentCodec(config)
                                      : LoadCodec(config.codec_model);
  });

  PipelineResult pipeline = Stage("pipeline", progress, [&] {
    if (!config.archive_dir.empty()) {
      return RunPipeline(config, codec, dataset, config.archive_dir);
    }
    TempDir dir;
    return RunPipeline(config, codec, dataset, dir.path());
  });
  report.transmission = pipeline.transmission;

  Stage("evaluate", progress, [&] {
    AudioClip second = dataset.events.front().clip;
    second.samples.resize(kCanonicalRate);
    report.size_table = MakeSizeTable(SerializeLatent(Encode(codec, second)).size());

    std::vector<VariantFeatures> features;
    features.reserve(dataset.events.size());
    for (size_t i = 0; i < dataset.events.size(); ++i) {
      features.push_back(ExtractVariantFeatures(dataset.events[i].clip, pipeline.restored[i]));
      pipeline.restored[i] = AudioClip{};
    }
    const AurocTable table = EvaluateConditions(dataset.events, features);
    report.auroc_table = {table.rows, table.auroc, table.average, table.ratio};

    const MseResult mse =
        ReconstructionTable(codec, ReconstructionFixtures(config.mse_events, config.seed));
    report.mse_table = mse.rows;
    report.mse_relative_spread = mse.relative_spread;
    report.mse_max_event_spread = mse.max_event_spread;
    return 0;
  });
  return report;
}

std::string ReportToJson(const ExperimentReport& r) {
  Json j;
  Json cfg = Json::object();
  for (const auto& [k, v] : r.config) cfg[k] = v;
  j["config"] = cfg;
  Json size = Json::array();
  for (const SizeRow& row : r.size_table) {
    size.push_back({{"variant", row.variant},
                    {"sample_rate", row.sample_rate},
                    {"bytes", row.bytes},
                    {"ratio", row.ratio}});
  }
  j["size_table"] = size;
  Json auroc;
  Json rows = Json::array();
  for (size_t i = 0; i < r.auroc_table.rows.size(); ++i) {
    Json row = {{"row", r.auroc_table.rows[i]}};
    for (int v = 0; v < 4; ++v) row[kVariantLabels[v]] = r.auroc_table.auroc[i][v];
    rows.push_back(row);
  }
  auroc["rows"] = rows;
  Json avg, ratio;
  for (int v = 0; v < 4; ++v) {
    avg[kVariantLabels[v]] = r.auroc_table.average[v];
    ratio[kVariantLabels[v]] = r.auroc_table.ratio[v];
  }
  auroc["average"] = avg;
  auroc["ratio"] = ratio;
  j["auroc_table"] = auroc;
  Json mse = Json::array();
  for (const MseRow& row : r.mse_table) {
    mse.push_back({{"source", row.source}, {"sample_rate", row.sample_rate}, {"mse", row.mse}});
  }
  j["mse_table"] = mse;
  j["mse_relative_spread"] = r.mse_relative_spread;
  j["mse_max_event_spread"] = r.mse_max_event_spread;
  const TransmissionSummary& t = r.transmission;
  j["transmission"] = {{"bytes_sent", t.bytes_sent},
                       {"raw_equivalent_bytes", t.raw_equivalent_bytes},
                       {"ratio", t.ratio ? Json(*t.ratio) : Json(nullptr)},
                       {"batches", t.batches},
                       {"retries", t.retries},
                       {"records_archived", t.records_archived}};
  return j.dump(2) + "\n";
}

ExperimentReport ReportFromJson(const std::string& text) {
  ExperimentReport r;
  try {
    const Json j = Json::parse(text);
    for (const auto& [k, v] : j.at("config").items()) r.config.emplace_back(k, v.get<std::string>());
    for (const Json& row : j.at("size_table")) {
      r.size_table.push_back({row.at("variant").get<std::string>(), row.at("sample_rate").get<int>(),
                              row.at("bytes").get<uint64_t>(), row.at("ratio").get<double>()});
    }
    const Json& a = j.at("auroc_table");
    for (const Json& row : a.at("rows")) {
      r.auroc_table.rows.push_back(row.at("row").get<std::string>());
      std::array<double, 4> vals{};
      for (int v = 0; v < 4; ++v) vals[v] = row.at(kVariantLabels[v]).get<double>();
      r.auroc_table.auroc.push_back(vals);
    }
    for (int v = 0; v < 4; ++v) {
      r.auroc_table.average[v] = a.at("average").at(kVariantLabels[v]).get<double>();
      r.auroc_table.ratio[v] = a.at("ratio").at(kVariantLabels[v]).get<double>();
    }
    for (const Json& row : j.at("mse_table")) {
      r.mse_table.push_back({row.at("source").get<std::string>(), row.at("sample_rate").get<int>(),
                             row.at("mse").get<double>()});
    }
    r.mse_relative_spread = j.at("mse_relative_spread").get<double>();
    r.mse_max_event_spread = j.at("mse_max_event_spread").get<double>();
    const Json& t = j.at("transmission");
    r.transmission.bytes_sent = t.at("bytes_sent").get<uint64_t>();
    r.transmission.raw_equivalent_bytes = t.at("raw_equivalent_bytes").get<uint64_t>();
    if (!t.at("ratio").is_null()) r.transmission.ratio = t.at("ratio").get<double>();
    r.transmission.batches = t.at("batches").get<uint64_t>();
    r.transmission.retries = t.at("retries").get<uint64_t>();
    r.transmission.records_archived = t.at("records_archived").get<uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kFormat, std::string("malformed report JSON: ") + e.what());
  }
  return r;
}

std::string ReportToCsv(const ExperimentReport& r) {
  std::ostringstream out;
  auto line = [&](const std::string& section, const std::string& row, const std::string& col,
                  const std::string& value) {
    out << CsvField(section) << ',' << CsvField(row) << ',' << CsvField(col) << ','
        << CsvField(value) << '\n';
  };
  out << "section,row,column,value\n";
  for (const auto& [k, v] : r.config) line("config", k, "value", v);
  for (const SizeRow& s : r.size_table) {
    line("size", s.variant, "sample_rate", std::to_string(s.sample_rate));
    line("size", s.variant, "bytes", std::to_string(s.bytes));
    line("size", s.variant, "ratio", FormatDouble(s.ratio));
  }
  for (size_t i = 0; i < r.auroc_table.rows.size(); ++i) {
    for (int v = 0; v < 4; ++v) {
      line("auroc", r.auroc_table.rows[i], kVariantLabels[v], FormatDouble(r.auroc_table.auroc[i][v]));
    }
  }
  for (int v = 0; v < 4; ++v) {
    line("auroc_average", "Average", kVariantLabels[v], FormatDouble(r.auroc_table.average[v]));
  }
  for (int v = 0; v < 4; ++v) {
    line("auroc_ratio", "Ratio", kVariantLabels[v], FormatDouble(r.auroc_table.ratio[v]));
  }
  for (const MseRow& m : r.mse_table) {
    line("mse", m.source, "sample_rate", std::to_string(m.sample_rate));
    line("mse", m.source, "mse", FormatDouble(m.mse));
  }
  line("mse_spread", "table", "value", FormatDouble(r.mse_relative_spread));
  line("mse_spread", "max_event", "value", FormatDouble(r.mse_max_event_spread));
  const TransmissionSummary& t = r.transmission;
  line("transmission", "bytes_sent", "value", std::to_string(t.bytes_sent));
  line("transmission", "raw_equivalent_bytes", "value", std::to_string(t.raw_equivalent_bytes));
  line("transmission", "ratio", "value", t.ratio ? FormatDouble(*t.ratio) : "");
  line("transmission", "batches", "value", std::to_string(t.batches));
  line("transmission", "retries", "value", std::to_string(t.retries));
  line("transmission", "records_archived", "value", std::to_string(t.records_archived));
  return out.str();
}

ExperimentReport ReportFromCsv(const std::string& csv) {
  const auto rows = ParseCsvRows(csv);
  if (rows.empty() || rows[0] != std::vector<std::string>{"section", "row", "column", "value"}) {
    Fail(ErrorCode::kFormat, "report CSV header missing");
  }
  auto variant_index = [](const std::string& name) {
    for (int v = 0; v < 4; ++v) {
      if (name == kVariantLabels[v]) return v;
    }
    Fail(ErrorCode::kFormat, "unknown variant column '" + name + "'");
  };
  auto num = [](const std::string& s, auto& out) {
    if (!ParseNumber(s, out)) Fail(ErrorCode::kFormat, "bad number '" + s + "' in report CSV");
  };
  ExperimentReport r;
  for (size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    if (f.size() != 4) Fail(ErrorCode::kFormat, "report CSV line " + std::to_string(i + 1));
    const std::string &section = f[0], &row = f[1], &col = f[2], &value = f[3];
    if (section == "config") {
      r.config.emplace_back(row, value);
    } else if (section == "size") {
      if (r.size_table.empty() || r.size_table.back().variant != row) {
        r.size_table.push_back({row, 0, 0, 0.0});
      }
      SizeRow& s = r.size_table.back();
      if (col == "sample_rate") {
        num(value, s.sample_rate);
      } else if (col == "bytes") {
        num(value, s.bytes);
      } else if (col == "ratio") {
        num(value, s.ratio);
      } else {
        Fail(ErrorCode::kFormat, "unknown size column '" + col + "'");
      }
    } else if (section == "auroc") {
      if (r.auroc_table.rows.empty() || r.auroc_table.rows.back() != row) {
        r.auroc_table.rows.push_back(row);
        r.auroc_table.auroc.push_back({});
      }
      num(value, r.auroc_table.auroc.back()[variant_index(col)]);
    } else if (section == "auroc_average") {
      num(value, r.auroc_table.average[variant_index(col)]);
    } else if (section == "auroc_ratio") {
      num(value, r.auroc_table.ratio[variant_index(col)]);
    } else if (section == "mse") {
      if (r.mse_table.empty() || r.mse_table.back().source != row) {
        r.mse_table.push_back({row, 0, 0.0});
      }
      if (col == "sample_rate") {
        num(value, r.mse_table.back().sample_rate);
      } else if (col == "mse") {
        num(value, r.mse_table.back().mse);
      } else {
        Fail(ErrorCode::kFormat, "unknown mse column '" + col + "'");
      }
    } else if (section == "mse_spread") {
      if (row == "table") {
        num(value, r.mse_relative_spread);
      } else if (row == "max_event") {
        num(value, r.mse_max_event_spread);
      } else {
        Fail(ErrorCode::kFormat, "unknown mse_spread row '" + row + "'");
      }
    } else if (section == "transmission") {
      TransmissionSummary& t = r.transmission;
      if (row == "bytes_sent") {
        num(value, t.bytes_sent);
      } else if (row == "raw_equivalent_bytes") {
        num(value, t.raw_equivalent_bytes);
      } else if (row == "ratio") {
        if (!value.empty()) {
          double d = 0.0;
          num(value, d);
          t.ratio = d;
        }
      } else if (row == "batches") {
        num(value, t.batches);
      } else if (row == "retries") {
        num(value, t.retries);
      } else if (row == "records_archived") {
        num(value, t.records_archived);
      } else {
        Fail(ErrorCode::kFormat, "unknown transmission field '" + row + "'");
      }
    } else {
      Fail(ErrorCode::kFormat, "unknown report CSV section '" + section + "'");
    }
  }
  return r;
}

std::string ReportToText(const ExperimentReport& r) {
  std::ostringstream out;
  out << std::fixed;
  out << "Size of one second of audio\n";
  out << "  variant   rate      bytes    ratio\n";
  for (const SizeRow& s : r.size_table) {
    out << "  " << std::left << std::setw(8) << s.variant << std::right << std::setw(6)
        << s.sample_rate << std::setw(11) << s.bytes << std::setprecision(4) << std::setw(9)
        << s.ratio << "\n";
  }
  out << "\nAUROC\n  " << std::left << std::setw(8) << "row" << std::right;
  for (const char* v : kVariantLabels) out << std::setw(8) << v;
  out << "\n" << std::setprecision(3);
  auto print_row = [&](const std::string& name, const std::array<double, 4>& vals) {
    out << "  " << std::left << std::setw(8) << name << std::right;
    for (double x : vals) out << std::setw(8) << x;
    out << "\n";
  };
  for (size_t i = 0; i < r.auroc_table.rows.size(); ++i) {
    print_row(r.auroc_table.rows[i], r.auroc_table.auroc[i]);
  }
  print_row("Average", r.auroc_table.average);
  print_row("Ratio", r.auroc_table.ratio);
  out << "\nReconstruction MSE by source rate\n";
  for (const MseRow& m : r.mse_table) {
    out << "  " << std::left << std::setw(8) << m.source << std::right << std::setw(6)
        << m.sample_rate << "  " << std::scientific << std::setprecision(6) << m.mse
        << std::fixed << "\n";
  }
  out << "  relative spread " << std::setprecision(4) << r.mse_relative_spread
      << " (largest single event " << r.mse_max_event_spread << ")\n";
  const TransmissionSummary& t = r.transmission;
  out << "\nTransmission\n  bytes sent " << t.bytes_sent << "\n  raw equivalent "
      << t.raw_equivalent_bytes << "\n  ratio ";
  if (t.ratio) {
    out << std::setprecision(4) << *t.ratio;
  } else {
    out << "n/a";
  }
  out << "\n  batches " << t.batches << ", retries " << t.retries << ", archived "
      << t.records_archived << "\n";
  return out.str();
}

std::vector<uint8_t> RenderSpectrogramPgm(const AudioClip& clip) {
  const MelFrames mel = MelSpectrogram(Canonicalize(clip));
  const auto [lo, hi] = std::minmax_element(mel.values.begin(), mel.values.end());
  const double span = *hi - *lo;
  const std::string header =
      "P5\n" + std::to_string(mel.n_frames) + " " + std::to_string(mel.n_mels) + "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + mel.values.size());
  for (int band = mel.n_mels - 1; band >= 0; --band) {
    for (int t = 0; t < mel.n_frames; ++t) {
      const double v = span > 0.0 ? (mel.at(t, band) - *lo) / span : 0.0;
      out.push_back(static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
    }
  }
  return out;
}

void PlotSpectrogram(const AudioClip& clip, const std::filesystem::path& out_path) {
  const std::vector<uint8_t> bytes = RenderSpectrogramPgm(clip);
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) Fail(ErrorCode::kIo, "cannot write " + out_path.string());
}

}  // namespace zsdc
