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

// Central archive: deduplicates incoming latents by uuid, decodes them to
// 44.1 kHz WAV files and keeps an append-only manifest.
//
// Layout under the archive root:
//   {post_id}/{captured_at}_{uuid}.wav
//   manifest.log   one line per entry:
//                  uuid,post_id,captured_at,source_rate,latent_bytes,wav_path
//   _rejects/{uuid}.latent and _rejects/rejects.log for quarantined records

#ifndef ZSDC_CENTRAL_H_
#define ZSDC_CENTRAL_H_

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "zsdc/audio.h"
#include "zsdc/codec.h"
#include "zsdc/transport.h"
#include "zsdc/uuid.h"

namespace zsdc {

struct ManifestEntry {
  Uuid uuid;
  std::string post_id;
  int64_t captured_at = 0;
  int source_rate = 0;
  uint64_t latent_bytes = 0;
  // Relative to the archive root, '/'-separated.
  std::string wav_path;

  bool operator==(const ManifestEntry&) const = default;
};

std::string FormatManifestLine(const ManifestEntry& entry);
// kFormat on a malformed line.
ManifestEntry ParseManifestLine(const std::string& line);

// Post ids name archive directories: 1-32 of [A-Za-z0-9_-], or empty
// (stored under "_").
bool IsArchivablePostId(const std::string& post_id);

struct HandleReport {
  int archived = 0;
  int duplicates = 0;
  int quarantined = 0;
  std::vector<std::string> errors;
};

struct CorpusFilter {
  // Empty means every post.
  std::vector<std::string> post_ids;
  // Half-open [from, to) on captured_at.
  std::optional<int64_t> from;
  std::optional<int64_t> to;
};

// Thread-safe. Records from concurrent batches decode in parallel; manifest
// appends are serialized.
class Archive {
 public:
  // Creates the root if needed and reloads manifest.log and rejects.log.
  // A torn final manifest line (no newline) is cut off.
  explicit Archive(std::filesystem::path root);

  // Archives unseen records, skips seen ones and quarantines records that
  // fail to deserialize or decode. kIo if the disk refuses a write.
  HandleReport HandleBatch(const Codec& codec, const TransferBatch& batch);

  std::vector<ManifestEntry> entries() const;
  size_t size() const;
  bool Contains(const Uuid& uuid) const;
  bool IsQuarantined(const Uuid& uuid) const;
  const std::filesystem::path& root() const { return root_; }

  // Matching clips ordered by captured_at (then uuid), at 44.1 kHz with
  // post_id and captured_at set. kCorpusIntegrity naming the uuid when a
  // WAV is missing or unreadable.
  std::vector<AudioClip> BuildCorpus(const CorpusFilter& filter) const;

 private:
  void AppendLine(const std::filesystem::path& file, const std::string& line);

  std::filesystem::path root_;
  mutable std::mutex mu_;
  std::vector<ManifestEntry> entries_;
  std::unordered_set<Uuid> seen_;
  std::unordered_set<Uuid> rejected_;
  std::unordered_set<Uuid> claimed_;
};

using LogSink = std::function<void(const std::string&)>;

// Serves one edge connection until the peer closes, the stream breaks or
// `stop` becomes true. Each BATCH is answered with ACK (after archiving) or
// NACK (malformed body, archive I/O failure). An unparseable frame is
// answered with NACK for batch 0 and ends the session, since the stream can
// no longer be trusted to be aligned.
void ServeConnection(ByteStream& stream, Archive& archive, const Codec& codec,
                     const std::atomic<bool>& stop, const LogSink& log = nullptr);

// Accepts connections until `stop`, one thread per connection.
void ServeForever(TcpListener& listener, Archive& archive, const Codec& codec,
                  const std::atomic<bool>& stop, const LogSink& log = nullptr);

}  // namespace zsdc

#endif  // ZSDC_CENTRAL_H_
