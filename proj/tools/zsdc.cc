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

// zsdc: command-line entry point. Exit codes: 0 success, 1 usage error,
// 2 failure while running a stage.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "zsdc/anomaly.h"
#include "zsdc/central.h"
#include "zsdc/codec.h"
#include "zsdc/datagen.h"
#include "zsdc/edge.h"
#include "zsdc/error.h"
#include "zsdc/experiment.h"
#include "zsdc/latent.h"
#include "zsdc/transport.h"
#include "zsdc/wav.h"

namespace zsdc {
namespace {

namespace fs = std::filesystem;

constexpr int kExitUsage = 1;
constexpr int kExitFailure = 2;

std::atomic<bool> g_stop{false};

extern "C" void HandleSignal(int) { g_stop = true; }

int64_t WallClockSeconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::vector<uint8_t> ReadBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot read " + path.string());
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void WriteBytes(const fs::path& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
}

void WriteText(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  WriteBytes(path, std::vector<uint8_t>(text.begin(), text.end()));
}

struct Globals {
  std::optional<uint64_t> seed;
  std::string config_path;

  ExperimentConfig Config() const {
    ExperimentConfig c = config_path.empty() ? ExperimentConfig{} : LoadConfig(config_path);
    if (seed) {
      c.seed = *seed;
      c.codec_seed = *seed;
    }
    return c;
  }
};

// Post id for a file under the edge input directory: the first directory
// component, lower-cased, when it is usable as an archive directory name.
std::string PostIdFor(const fs::path& relative) {
  if (std::distance(relative.begin(), relative.end()) < 2) return "";
  std::string post = relative.begin()->string();
  for (char& c : post) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return IsArchivablePostId(post) ? post : "";
}

int RunEdge(const ExperimentConfig& config, const std::string& input_dir,
            const std::string& server_addr, const std::string& codec_path,
            const std::string& state_file, const std::optional<std::string>& post_id,
            int64_t max_batch_bytes, bool drain) {
  const Codec codec = LoadCodec(codec_path);
  const fs::path log_path =
      state_file.empty() ? fs::path(input_dir) / ".zsdc-edge.log" : fs::path(state_file);
  RestoreResult restored = RestoreState(log_path);
  StorageState state = std::move(restored.state);
  RequeueAll(state);
  if (restored.truncated) {
    std::cerr << "zsdc run-edge: recovered " << restored.records_restored << " records, discarded "
              << restored.entries_discarded << " from a damaged log\n";
  }

  const auto [host, port] = ParseAddress(server_addr);
  Sender sender([host = host, port = port] {
    return TcpStream::Connect(host, port, std::chrono::milliseconds(5000));
  }, SendOptions{});
  UuidGenerator uuids(static_cast<uint64_t>(WallClockSeconds()) ^ config.seed);
  uint64_t next_batch = static_cast<uint64_t>(WallClockSeconds()) << 16;

  auto flush = [&](int64_t now) {
    while (std::any_of(state.records.begin(), state.records.end(),
                       [](const StoredRecord& r) { return !r.in_flight; })) {
      const TransferBatch batch = TakeFlushBatch(state, max_batch_bytes, next_batch++);
      const AckResult ack = sender.Deliver(batch);
      if (!ack.ok()) {
        RequeueBatch(state, batch);
        PersistState(state, log_path);
        Fail(ErrorCode::kRetriable, "server did not acknowledge batch: " + ack.detail);
      }
      sender.counter().raw_equivalent_bytes += AcknowledgeBatch(state, batch, now);
      PersistState(state, log_path);
    }
  };

  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(input_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  int ingested = 0;
  for (const fs::path& f : files) {
    if (g_stop) break;
    AudioClip clip = LoadWav(f);
    const int64_t now = WallClockSeconds();
    clip.post_id = post_id ? *post_id : PostIdFor(fs::relative(f, input_dir));
    clip.captured_at = now;
    const IngestReport r = Ingest(state, config.storage, codec, clip, now, uuids);
    for (const Uuid& u : r.evicted) std::cerr << "zsdc run-edge: evicted " << u.ToString() << "\n";
    PersistState(state, log_path);
    ++ingested;
    if (ShouldFlush(state, config.storage, now)) flush(now);
  }
  if (drain) flush(WallClockSeconds());

  const CostReport cost = MakeCostReport(sender.counter());
  std::cout << "ingested " << ingested << " clips, stored " << state.records.size()
            << ", dropped " << state.dropped_count << "\n";
  std::cout << "bytes_sent " << cost.bytes_sent << " raw_equivalent " << cost.raw_equivalent_bytes
            << " ratio " << (cost.ratio ? std::to_string(*cost.ratio) : std::string("n/a"))
            << "\n";
  return 0;
}

int RunCentral(const std::string& listen_addr, const std::string& archive_dir,
               const std::string& codec_path, double duration_s) {
  const Codec codec = LoadCodec(codec_path);
  Archive archive(archive_dir);
  const auto [host, port] = ParseAddress(listen_addr);
  TcpListener listener(host, port);
  std::cout << "listening on " << host << ":" << listener.port() << ", archive " << archive_dir
            << " (" << archive.size() << " entries)" << std::endl;
  std::thread timer;
  if (duration_s > 0) {
    timer = std::thread([duration_s] {
      const auto end = std::chrono::steady_clock::now() +
                       std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                           std::chrono::duration<double>(duration_s));
      while (!g_stop && std::chrono::steady_clock::now() < end) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
      }
      g_stop = true;
    });
  }
  ServeForever(listener, archive, codec, g_stop,
               [](const std::string& m) { std::cerr << "zsdc run-central: " << m << "\n"; });
  if (timer.joinable()) timer.join();
  std::cout << "archive holds " << archive.size() << " entries" << std::endl;
  return 0;
}

int Main(int argc, char** argv) {
  CLI::App app{"Zero-shot storage and transfer of road audio between edge and central nodes"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Seed for data generation, codec training and evaluation");
  app.add_option("--config", g.config_path, "Plain key=value configuration file")
      ->check(CLI::ExistingFile);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Write the synthetic road dataset as WAV files");
  std::optional<double> gen_scale;
  std::string gen_out;
  gen->add_option("--scale", gen_scale, "Fraction of the reference event counts, in (0, 1]");
  gen->add_option("--out-dir", gen_out, "Output directory")->required();

  // train-codec
  auto* train = app.add_subcommand("train-codec", "Train the codec on the generic corpus");
  std::string train_out;
  train->add_option("--out", train_out, "Output model file")->required();

  // encode / decode
  auto* enc = app.add_subcommand("encode", "Encode a WAV file to a latent file");
  std::string enc_model, enc_in, enc_out, enc_post;
  std::optional<int64_t> enc_time;
  enc->add_option("--codec-model", enc_model)->required()->check(CLI::ExistingFile);
  enc->add_option("--in", enc_in)->required()->check(CLI::ExistingFile);
  enc->add_option("--out", enc_out)->required();
  enc->add_option("--post-id", enc_post);
  enc->add_option("--captured-at", enc_time, "UTC seconds");

  auto* dec = app.add_subcommand("decode", "Decode a latent file to a 44.1 kHz WAV file");
  std::string dec_model, dec_in, dec_out;
  dec->add_option("--codec-model", dec_model)->required()->check(CLI::ExistingFile);
  dec->add_option("--in", dec_in)->required()->check(CLI::ExistingFile);
  dec->add_option("--out", dec_out)->required();

  // run-edge
  auto* edge = app.add_subcommand("run-edge", "Ingest WAV files and ship latents to the server");
  std::optional<int64_t> edge_capacity, edge_interval;
  std::optional<double> edge_threshold;
  std::string edge_server = "127.0.0.1", edge_input, edge_model, edge_state;
  std::optional<std::string> edge_post;
  int64_t edge_batch = 1 << 20;
  bool edge_no_drain = false;
  edge->add_option("--capacity-bytes", edge_capacity);
  edge->add_option("--fill-threshold", edge_threshold);
  edge->add_option("--flush-interval-s", edge_interval);
  edge->add_option("--server-addr", edge_server, "host[:port]; port defaults to $ZSDC_PORT or 7440");
  edge->add_option("--input-dir", edge_input)->required()->check(CLI::ExistingDirectory);
  edge->add_option("--codec-model", edge_model)->required()->check(CLI::ExistingFile);
  edge->add_option("--state-file", edge_state, "Record log (default <input-dir>/.zsdc-edge.log)");
  edge->add_option("--post-id", edge_post, "Post id for every clip (default: first directory)");
  edge->add_option("--max-batch-bytes", edge_batch);
  edge->add_flag("--no-drain", edge_no_drain, "Leave queued records for a later run");

  // run-central
  auto* central = app.add_subcommand("run-central", "Receive batches and archive decoded audio");
  std::string central_listen = "0.0.0.0", central_archive, central_model;
  double central_duration = 0.0;
  central->add_option("--listen-addr", central_listen, "host[:port]; port defaults to $ZSDC_PORT or 7440");
  central->add_option("--archive-dir", central_archive)->required();
  central->add_option("--codec-model", central_model)->required()->check(CLI::ExistingFile);
  central->add_option("--duration-s", central_duration, "Stop after this many seconds (0: run until signalled)");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Run the full experiment and print the tables");
  std::string eval_format = "text", eval_out, eval_model, eval_archive;
  std::optional<double> eval_scale;
  bool eval_net = false;
  eval->add_option("--format", eval_format)->check(CLI::IsMember({"text", "json", "csv"}));
  eval->add_option("--out", eval_out, "Output file (default stdout)");
  eval->add_option("--scale", eval_scale);
  eval->add_option("--codec-model", eval_model, "Use this codec instead of training one");
  eval->add_option("--archive-dir", eval_archive, "Keep the central archive here");
  eval->add_flag("--net", eval_net, "Ship batches over a localhost TCP socket");

  // plot
  auto* plot = app.add_subcommand("plot", "Write a log-mel spectrogram of a WAV file as PGM");
  std::string plot_in, plot_out, plot_variant = "f44", plot_model;
  plot->add_option("--in", plot_in)->required()->check(CLI::ExistingFile);
  plot->add_option("--out", plot_out)->required();
  plot->add_option("--variant", plot_variant)->check(CLI::IsMember({"f44", "f22", "f11", "asr"}));
  plot->add_option("--codec-model", plot_model, "Required for --variant asr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  if (plot_variant == "asr" && plot_model.empty()) {
    std::cerr << "zsdc plot: --variant asr needs --codec-model\n";
    return kExitUsage;
  }

  try {
    ExperimentConfig config = g.Config();
    if (*gen) {
      if (gen_scale) config.scale = *gen_scale;
      const int n = WriteDataset(PlanDataset(config.scale, config.seed), gen_out);
      std::cout << "wrote " << n << " events to " << gen_out << "\n";
    } else if (*train) {
      const Codec codec = TrainExperimentCodec(config);
      SaveCodec(codec, train_out);
      std::cout << "saved codec to " << train_out << "\n";
    } else if (*enc) {
      AudioClip clip = LoadWav(enc_in);
      if (!enc_post.empty()) clip.post_id = enc_post;
      if (enc_time) clip.captured_at = *enc_time;
      const std::vector<uint8_t> bytes = SerializeLatent(Encode(LoadCodec(enc_model), clip));
      WriteBytes(enc_out, bytes);
      std::cout << "wrote " << bytes.size() << " bytes\n";
    } else if (*dec) {
      const AudioClip clip = Decode(LoadCodec(dec_model), DeserializeLatent(ReadBytes(dec_in)));
      SaveWav(clip, dec_out);
    } else if (*edge) {
      if (edge_capacity) config.storage.capacity_bytes = *edge_capacity;
      if (edge_threshold) config.storage.fill_threshold = *edge_threshold;
      if (edge_interval) config.storage.flush_interval_seconds = *edge_interval;
      config.storage.Validate();
      std::signal(SIGINT, HandleSignal);
      std::signal(SIGTERM, HandleSignal);
      return RunEdge(config, edge_input, edge_server, edge_model, edge_state, edge_post,
                     edge_batch, !edge_no_drain);
    } else if (*central) {
      std::signal(SIGINT, HandleSignal);
      std::signal(SIGTERM, HandleSignal);
      return RunCentral(central_listen, central_archive, central_model, central_duration);
    } else if (*eval) {
      if (eval_scale) config.scale = *eval_scale;
      if (!eval_model.empty()) config.codec_model = eval_model;
      if (!eval_archive.empty()) config.archive_dir = eval_archive;
      if (eval_net) config.net = true;
      const ExperimentReport report = RunExperiment(
          config, [](const std::string& m) { std::cerr << "zsdc evaluate: " << m << "\n"; });
      const std::string text = eval_format == "json"  ? ReportToJson(report)
                               : eval_format == "csv" ? ReportToCsv(report)
                                                      : ReportToText(report);
      WriteText(eval_out, text);
    } else if (*plot) {
      AudioClip clip = LoadWav(plot_in);
      if (plot_variant != "f44") {
        const Codec codec = plot_model.empty() ? Codec{} : LoadCodec(plot_model);
        clip = MakeVariant(ParseVariant(plot_variant), clip, codec);
      }
      PlotSpectrogram(clip, plot_out);
    }
  } catch (const Error& e) {
    std::cerr << "zsdc: " << ErrorCodeName(e.code()) << ": " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "zsdc: " << e.what() << "\n";
    return kExitFailure;
  }
  return 0;
}

}  // namespace
}  // namespace zsdc

int main(int argc, char** argv) { return zsdc::Main(argc, argv); }
