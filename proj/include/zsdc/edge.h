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

// Edge-side latent store: quota-bounded FIFO of serialized latents with
// drop-oldest eviction, flush decisions, in-flight tracking until the
// server acknowledges, and a crash-safe on-disk log.
//
// Single-writer: callers serialize all mutations of one StorageState.
// The clock is always passed in; nothing here reads the system time.

#ifndef ZSDC_EDGE_H_
#define ZSDC_EDGE_H_

#include <cstdint>
#include <deque>
#include <filesystem>
#include <string>
#include <vector>

#include "zsdc/audio.h"
#include "zsdc/codec.h"
#include "zsdc/transport.h"
#include "zsdc/uuid.h"

namespace zsdc {

struct StoragePolicy {
  int64_t capacity_bytes = 64 << 20;
  double fill_threshold = 0.8;
  int64_t flush_interval_seconds = 3600;

  // kInvalidArgument unless capacity > 0 and 0 < threshold <= 1.
  void Validate() const;
};

struct StoredRecord {
  Uuid uuid;
  std::string post_id;
  int64_t captured_at = 0;
  // Serialized latent.
  std::vector<uint8_t> payload;
  // Size of the original clip as a float-32 WAV; feeds the cost report.
  uint64_t raw_equivalent_bytes = 0;
  // Part of a batch awaiting acknowledgement.
  bool in_flight = false;

  int64_t byte_len() const { return static_cast<int64_t>(payload.size()); }
  bool operator==(const StoredRecord&) const = default;
};

struct StorageState {
  // Ordered by captured_at; ties keep arrival order.
  std::deque<StoredRecord> records;
  int64_t used_bytes = 0;
  int64_t last_flush_at = 0;
  int64_t dropped_count = 0;

  bool operator==(const StorageState&) const = default;
};

struct IngestReport {
  Uuid uuid;
  int64_t stored_bytes = 0;
  std::vector<Uuid> evicted;
};

// Encodes and serializes `clip` (its post_id and captured_at default to
// `now` and an empty id), then stores it.
IngestReport Ingest(StorageState& state, const StoragePolicy& policy,
                    const Codec& codec, const AudioClip& clip, int64_t now,
                    UuidGenerator& uuids);

// Stores an already-serialized record, evicting the oldest records until it
// fits. kRecordTooLarge (state untouched) if it exceeds the capacity alone.
IngestReport Store(StorageState& state, const StoragePolicy& policy,
                   StoredRecord record);

// now - last_flush_at >= interval, or used >= threshold x capacity.
bool ShouldFlush(const StorageState& state, const StoragePolicy& policy,
                 int64_t now);

// Marks the oldest queued records in flight, in order, while they fit in
// max_batch_bytes, and returns them as a batch. Empty store gives an empty
// batch. kInvalidArgument if the next queued record alone exceeds the limit.
TransferBatch TakeFlushBatch(StorageState& state, int64_t max_batch_bytes,
                             uint64_t batch_id);

// Discards the batch's records that are still held and stamps the flush
// time. Returns the raw-equivalent bytes of the records discarded.
uint64_t AcknowledgeBatch(StorageState& state, const TransferBatch& batch,
                          int64_t now);

// Returns the batch's records to the queue in their original positions.
void RequeueBatch(StorageState& state, const TransferBatch& batch);

// Clears every in-flight flag, e.g. after a restart.
void RequeueAll(StorageState& state);

// Atomically replaces `path` with a log of the full state.
void PersistState(const StorageState& state, const std::filesystem::path& path);

struct RestoreResult {
  StorageState state;
  int64_t records_restored = 0;
  // Entries lost to a torn or corrupt tail (counted as one when the tail is
  // unparseable).
  int64_t entries_discarded = 0;
  bool truncated = false;
};

// Missing or empty file gives an empty state. A bad magic or a corrupt
// header is kBadMagic / kFormat; a corrupt entry truncates the log there.
RestoreResult RestoreState(const std::filesystem::path& path);

}  // namespace zsdc

#endif  // ZSDC_EDGE_H_
