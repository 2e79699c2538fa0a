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

#include "zsdc/central.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <system_error>
#include <thread>

#include "zsdc/error.h"
#include "zsdc/latent.h"
#include "zsdc/wav.h"

namespace zsdc {
namespace {

constexpr char kManifestName[] = "manifest.log";
constexpr char kRejectDir[] = "_rejects";
constexpr char kRejectLog[] = "rejects.log";
constexpr auto kPollInterval = std::chrono::milliseconds(200);

std::vector<std::string> SplitCommas(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  for (;;) {
    const size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) return out;
    start = comma + 1;
  }
}

template <typename T>
T ParseInt(const std::string& s, const char* what) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    Fail(ErrorCode::kFormat, std::string("bad manifest ") + what + " '" + s + "'");
  }
  return v;
}

std::string PostDir(const std::string& post_id) { return post_id.empty() ? "_" : post_id; }

// Reads `path` line by line; a final line without '\n' is cut off the file.
std::vector<std::string> LoadLines(const std::filesystem::path& path) {
  std::vector<std::string> lines;
  if (!std::filesystem::exists(path)) return lines;
  std::string text;
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) Fail(ErrorCode::kIo, "cannot read " + path.string());
    text.assign(std::istreambuf_iterator<char>(in), {});
  }
  const size_t keep = text.rfind('\n') == std::string::npos ? 0 : text.rfind('\n') + 1;
  if (keep != text.size()) std::filesystem::resize_file(path, keep);
  std::istringstream ss(text.substr(0, keep));
  for (std::string line; std::getline(ss, line);) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

void WriteFileAtomic(const std::filesystem::path& path, std::span<const uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    f.flush();
    if (!f) Fail(ErrorCode::kIo, "cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) Fail(ErrorCode::kIo, "cannot rename to " + path.string() + ": " + ec.message());
}

void Log(const LogSink& log, const std::string& msg) {
  if (log) {
    log(msg);
  } else {
    std::clog << "zsdc central: " << msg << "\n";
  }
}

}  // namespace

std::string FormatManifestLine(const ManifestEntry& e) {
  return e.uuid.ToString() + "," + e.post_id + "," + std::to_string(e.captured_at) + "," +
         std::to_string(e.source_rate) + "," + std::to_string(e.latent_bytes) + "," +
         e.wav_path;
}

ManifestEntry ParseManifestLine(const std::string& line) {
  const std::vector<std::string> f = SplitCommas(line);
  if (f.size() != 6) Fail(ErrorCode::kFormat, "manifest line needs 6 fields: " + line);
  ManifestEntry e;
  e.uuid = Uuid::Parse(f[0]);
  e.post_id = f[1];
  if (!IsArchivablePostId(e.post_id)) Fail(ErrorCode::kFormat, "bad post id in manifest");
  e.captured_at = ParseInt<int64_t>(f[2], "captured_at");
  e.source_rate = ParseInt<int>(f[3], "source_rate");
  e.latent_bytes = ParseInt<uint64_t>(f[4], "latent_bytes");
  e.wav_path = f[5];
  if (e.wav_path.empty()) Fail(ErrorCode::kFormat, "empty wav path in manifest");
  return e;
}

bool IsArchivablePostId(const std::string& post_id) {
  if (post_id.size() > kMaxPostIdBytes) return false;
  return std::all_of(post_id.begin(), post_id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-';
  });
}

Archive::Archive(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_ / kRejectDir, ec);
  if (ec) Fail(ErrorCode::kIo, "cannot create " + root_.string() + ": " + ec.message());
  for (const std::string& line : LoadLines(root_ / kManifestName)) {
    ManifestEntry e = ParseManifestLine(line);
    if (!seen_.insert(e.uuid).second) continue;
    entries_.push_back(std::move(e));
  }
  for (const std::string& line : LoadLines(root_ / kRejectDir / kRejectLog)) {
    rejected_.insert(Uuid::Parse(line.substr(0, line.find(','))));
  }
}

void Archive::AppendLine(const std::filesystem::path& file, const std::string& line) {
  std::ofstream out(file, std::ios::binary | std::ios::app);
  out << line << '\n';
  out.flush();
  if (!out) Fail(ErrorCode::kIo, "cannot append to " + file.string());
}

HandleReport Archive::HandleBatch(const Codec& codec, const TransferBatch& batch) {
  HandleReport report;
  std::vector<const TransferRecord*> mine;
  {
    std::lock_guard lock(mu_);
    for (const TransferRecord& r : batch.records) {
      if (seen_.contains(r.uuid) || rejected_.contains(r.uuid) || claimed_.contains(r.uuid)) {
        ++report.duplicates;
        continue;
      }
      claimed_.insert(r.uuid);
      mine.push_back(&r);
    }
  }

  struct Outcome {
    const TransferRecord* record;
    std::optional<ManifestEntry> entry;
    std::string error;
  };
  std::vector<Outcome> outcomes;
  try {
    // Decode and write WAVs outside the lock.
    for (const TransferRecord* r : mine) {
      Outcome o{r, std::nullopt, ""};
      try {
        const LatentCode z = DeserializeLatent(r->payload);
        if (!IsArchivablePostId(z.header.post_id)) {
          Fail(ErrorCode::kFormat, "post id unusable as a directory name");
        }
        const AudioClip clip = Decode(codec, z);
        ManifestEntry e;
        e.uuid = r->uuid;
        e.post_id = z.header.post_id;
        e.captured_at = z.header.captured_at;
        e.source_rate = static_cast<int>(z.header.source_rate);
        e.latent_bytes = r->payload.size();
        e.wav_path = PostDir(e.post_id) + "/" + std::to_string(e.captured_at) + "_" +
                     r->uuid.ToString() + ".wav";
        std::filesystem::create_directories(root_ / PostDir(e.post_id));
        WriteFileAtomic(root_ / e.wav_path, EncodeWav(clip));
        o.entry = std::move(e);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kIo) throw;
        o.error = std::string(ErrorCodeName(e.code())) + ": " + e.what();
        WriteFileAtomic(root_ / kRejectDir / (r->uuid.ToString() + ".latent"), r->payload);
      }
      outcomes.push_back(std::move(o));
    }
  } catch (...) {
    std::lock_guard lock(mu_);
    for (const TransferRecord* r : mine) claimed_.erase(r->uuid);
    throw;
  }

  std::lock_guard lock(mu_);
  try {
    for (Outcome& o : outcomes) {
      if (o.entry) {
        AppendLine(root_ / kManifestName, FormatManifestLine(*o.entry));
        seen_.insert(o.record->uuid);
        entries_.push_back(std::move(*o.entry));
        ++report.archived;
      } else {
        AppendLine(root_ / kRejectDir / kRejectLog, o.record->uuid.ToString() + "," + o.error);
        rejected_.insert(o.record->uuid);
        ++report.quarantined;
        report.errors.push_back(o.record->uuid.ToString() + ": " + o.error);
      }
      claimed_.erase(o.record->uuid);
    }
  } catch (...) {
    for (const TransferRecord* r : mine) claimed_.erase(r->uuid);
    throw;
  }
  return report;
}

std::vector<ManifestEntry> Archive::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

size_t Archive::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

bool Archive::Contains(const Uuid& uuid) const {
  std::lock_guard lock(mu_);
  return seen_.contains(uuid);
}

bool Archive::IsQuarantined(const Uuid& uuid) const {
  std::lock_guard lock(mu_);
  return rejected_.contains(uuid);
}

std::vector<AudioClip> Archive::BuildCorpus(const CorpusFilter& filter) const {
  std::vector<ManifestEntry> picked;
  for (const ManifestEntry& e : entries()) {
    if (!filter.post_ids.empty() &&
        std::find(filter.post_ids.begin(), filter.post_ids.end(), e.post_id) ==
            filter.post_ids.end()) {
      continue;
    }
    if (filter.from && e.captured_at < *filter.from) continue;
    if (filter.to && e.captured_at >= *filter.to) continue;
    picked.push_back(e);
  }
  std::stable_sort(picked.begin(), picked.end(), [](const auto& a, const auto& b) {
    return std::tie(a.captured_at, a.uuid) < std::tie(b.captured_at, b.uuid);
  });
  std::vector<AudioClip> corpus;
  corpus.reserve(picked.size());
  for (const ManifestEntry& e : picked) {
    AudioClip clip;
    try {
      clip = LoadWav(root_ / e.wav_path);
    } catch (const Error& err) {
      Fail(ErrorCode::kCorpusIntegrity,
           "archived audio for " + e.uuid.ToString() + " unreadable: " + err.what());
    }
    clip.post_id = e.post_id;
    clip.captured_at = e.captured_at;
    corpus.push_back(std::move(clip));
  }
  return corpus;
}

void ServeConnection(ByteStream& stream, Archive& archive, const Codec& codec,
                     const std::atomic<bool>& stop, const LogSink& log) {
  auto reply = [&](FrameType type, std::vector<uint8_t> body) {
    stream.Write(EncodeFrame({type, std::move(body)}));
  };
  try {
    while (!stop.load()) {
      std::optional<WireFrame> frame;
      try {
        frame = TryReadFrame(stream, Clock::now() + kPollInterval);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kRetriable) return;
        Log(log, std::string("dropping connection after bad frame: ") + e.what());
        reply(FrameType::kNack, EncodeNackBody(0, e.what()));
        return;
      }
      if (!frame) continue;
      if (frame->type != FrameType::kBatch) {
        Log(log, "ignoring non-BATCH frame from edge");
        continue;
      }
      TransferBatch batch;
      try {
        batch = DecodeBatchBody(frame->body);
      } catch (const Error& e) {
        Log(log, std::string("malformed batch: ") + e.what());
        reply(FrameType::kNack, EncodeNackBody(0, e.what()));
        continue;
      }
      try {
        const HandleReport r = archive.HandleBatch(codec, batch);
        for (const std::string& err : r.errors) Log(log, "quarantined " + err);
      } catch (const Error& e) {
        Log(log, "batch " + std::to_string(batch.batch_id) + " not archived: " + e.what());
        reply(FrameType::kNack, EncodeNackBody(batch.batch_id, e.what()));
        continue;
      }
      reply(FrameType::kAck, EncodeAckBody(batch.batch_id));
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kRetriable) throw;
  }
}

void ServeForever(TcpListener& listener, Archive& archive, const Codec& codec,
                  const std::atomic<bool>& stop, const LogSink& log) {
  std::vector<std::thread> workers;
  while (!stop.load()) {
    std::shared_ptr<TcpStream> conn = listener.Accept(kPollInterval);
    if (!conn) continue;
    workers.emplace_back([conn, &archive, &codec, &stop, log] {
      try {
        ServeConnection(*conn, archive, codec, stop, log);
      } catch (const std::exception& e) {
        Log(log, std::string("connection failed: ") + e.what());
      }
      conn->Close();
    });
  }
  for (std::thread& t : workers) t.join();
}

}  // namespace zsdc
