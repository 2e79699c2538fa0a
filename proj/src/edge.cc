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

#include "zsdc/edge.h"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>
#include <system_error>

#include "bytes.h"
#include "crc32.h"
#include "zsdc/error.h"
#include "zsdc/latent.h"
#include "zsdc/wav.h"

namespace zsdc {
namespace {

// Log layout (little-endian):
//   header: "ZSDL", u32 version, i64 last_flush_at, i64 dropped_count,
//           u32 CRC32 of bytes 4..23
//   entry:  u32 body length, body, u32 CRC32 of length + body
//   body:   16-byte uuid, i64 captured_at, u64 raw-equivalent bytes,
//           u8 in-flight, u8 post id length, post id, payload
constexpr uint8_t kLogMagic[4] = {'Z', 'S', 'D', 'L'};
constexpr uint32_t kLogVersion = 1;
constexpr size_t kLogHeaderBytes = 28;
constexpr size_t kEntryFixedBytes = 16 + 8 + 8 + 1 + 1;

std::set<Uuid> UuidsOf(const TransferBatch& batch) {
  std::set<Uuid> ids;
  for (const TransferRecord& r : batch.records) ids.insert(r.uuid);
  return ids;
}

std::vector<uint8_t> ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

void StoragePolicy::Validate() const {
  if (capacity_bytes <= 0) Fail(ErrorCode::kInvalidArgument, "capacity_bytes must be > 0");
  if (!(fill_threshold > 0.0 && fill_threshold <= 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "fill_threshold must be in (0, 1]");
  }
  if (flush_interval_seconds < 0) {
    Fail(ErrorCode::kInvalidArgument, "flush_interval_seconds must be >= 0");
  }
}

IngestReport Ingest(StorageState& state, const StoragePolicy& policy,
                    const Codec& codec, const AudioClip& clip, int64_t now,
                    UuidGenerator& uuids) {
  clip.Validate();
  AudioClip stamped = clip;
  if (!stamped.captured_at) stamped.captured_at = now;
  if (!stamped.post_id) stamped.post_id = "";
  StoredRecord rec;
  rec.uuid = uuids.Next();
  rec.post_id = *stamped.post_id;
  rec.captured_at = *stamped.captured_at;
  rec.payload = SerializeLatent(Encode(codec, stamped));
  rec.raw_equivalent_bytes = WavFileBytes(clip.samples.size());
  return Store(state, policy, std::move(rec));
}

IngestReport Store(StorageState& state, const StoragePolicy& policy,
                   StoredRecord record) {
  policy.Validate();
  if (record.byte_len() > policy.capacity_bytes) {
    Fail(ErrorCode::kRecordTooLarge,
         "record of " + std::to_string(record.byte_len()) +
             " bytes exceeds capacity " + std::to_string(policy.capacity_bytes));
  }
  IngestReport report;
  report.uuid = record.uuid;
  report.stored_bytes = record.byte_len();
  while (state.used_bytes + record.byte_len() > policy.capacity_bytes) {
    const StoredRecord& oldest = state.records.front();
    report.evicted.push_back(oldest.uuid);
    state.used_bytes -= oldest.byte_len();
    ++state.dropped_count;
    state.records.pop_front();
  }
  state.used_bytes += record.byte_len();
  record.in_flight = false;
  const auto pos = std::upper_bound(
      state.records.begin(), state.records.end(), record.captured_at,
      [](int64_t t, const StoredRecord& r) { return t < r.captured_at; });
  state.records.insert(pos, std::move(record));
  return report;
}

bool ShouldFlush(const StorageState& state, const StoragePolicy& policy, int64_t now) {
  policy.Validate();
  if (now - state.last_flush_at >= policy.flush_interval_seconds) return true;
  return static_cast<double>(state.used_bytes) >=
         policy.fill_threshold * static_cast<double>(policy.capacity_bytes);
}

TransferBatch TakeFlushBatch(StorageState& state, int64_t max_batch_bytes,
                             uint64_t batch_id) {
  TransferBatch batch;
  batch.batch_id = batch_id;
  int64_t bytes = 0;
  bool first = true;
  for (StoredRecord& r : state.records) {
    if (r.in_flight) continue;
    if (first) {
      if (r.byte_len() > max_batch_bytes) {
        Fail(ErrorCode::kInvalidArgument,
             "max_batch_bytes is smaller than the next record");
      }
      batch.post_id = r.post_id;
      first = false;
    }
    // Stop at the first record that does not fit, so batches stay FIFO.
    if (r.post_id != batch.post_id || bytes + r.byte_len() > max_batch_bytes) break;
    bytes += r.byte_len();
    r.in_flight = true;
    batch.records.push_back({r.uuid, r.payload});
  }
  return batch;
}

uint64_t AcknowledgeBatch(StorageState& state, const TransferBatch& batch, int64_t now) {
  const std::set<Uuid> ids = UuidsOf(batch);
  uint64_t raw = 0;
  std::erase_if(state.records, [&](const StoredRecord& r) {
    if (!r.in_flight || !ids.contains(r.uuid)) return false;
    state.used_bytes -= r.byte_len();
    raw += r.raw_equivalent_bytes;
    return true;
  });
  state.last_flush_at = now;
  return raw;
}

void RequeueBatch(StorageState& state, const TransferBatch& batch) {
  const std::set<Uuid> ids = UuidsOf(batch);
  for (StoredRecord& r : state.records) {
    if (ids.contains(r.uuid)) r.in_flight = false;
  }
}

void RequeueAll(StorageState& state) {
  for (StoredRecord& r : state.records) r.in_flight = false;
}

void PersistState(const StorageState& state, const std::filesystem::path& path) {
  std::vector<uint8_t> out;
  internal::ByteWriter w(&out);
  w.PutBytes(std::span<const uint8_t>(kLogMagic, 4));
  w.Put(kLogVersion);
  w.Put(state.last_flush_at);
  w.Put(state.dropped_count);
  w.Put(internal::Crc32(std::span<const uint8_t>(out).subspan(4)));
  for (const StoredRecord& r : state.records) {
    if (r.post_id.size() > 255) Fail(ErrorCode::kInvalidArgument, "post id too long");
    const size_t start = out.size();
    w.Put(static_cast<uint32_t>(kEntryFixedBytes + r.post_id.size() + r.payload.size()));
    w.PutBytes(r.uuid.bytes);
    w.Put(r.captured_at);
    w.Put(r.raw_equivalent_bytes);
    w.Put(static_cast<uint8_t>(r.in_flight ? 1 : 0));
    w.Put(static_cast<uint8_t>(r.post_id.size()));
    w.PutBytes(r.post_id);
    w.PutBytes(r.payload);
    w.Put(internal::Crc32(std::span<const uint8_t>(out).subspan(start)));
  }

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    f.flush();
    if (!f) Fail(ErrorCode::kIo, "cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) Fail(ErrorCode::kIo, "cannot replace " + path.string() + ": " + ec.message());
}

RestoreResult RestoreState(const std::filesystem::path& path) {
  RestoreResult result;
  if (!std::filesystem::exists(path)) return result;
  const std::vector<uint8_t> bytes = ReadFile(path);
  if (bytes.empty()) return result;
  const std::span<const uint8_t> all(bytes);
  if (bytes.size() < 4 || !std::equal(kLogMagic, kLogMagic + 4, bytes.begin())) {
    Fail(ErrorCode::kBadMagic, path.string() + " is not an edge record log");
  }
  if (bytes.size() < kLogHeaderBytes) Fail(ErrorCode::kTruncated, "edge log header truncated");
  internal::ByteReader h(all.subspan(4, kLogHeaderBytes - 4));
  const uint32_t version = h.Get<uint32_t>();
  result.state.last_flush_at = h.Get<int64_t>();
  result.state.dropped_count = h.Get<int64_t>();
  if (internal::Crc32(all.subspan(4, 20)) != h.Get<uint32_t>()) {
    Fail(ErrorCode::kFormat, "edge log header CRC mismatch");
  }
  if (version != kLogVersion) {
    Fail(ErrorCode::kVersionMismatch, "edge log version " + std::to_string(version));
  }

  size_t pos = kLogHeaderBytes;
  while (pos < bytes.size()) {
    const size_t left = bytes.size() - pos;
    bool ok = left >= 8;
    uint32_t len = 0;
    if (ok) {
      len = internal::ByteReader(all.subspan(pos, 4)).Get<uint32_t>();
      ok = len >= kEntryFixedBytes && len <= left - 8;
    }
    if (ok) {
      const uint32_t crc = internal::ByteReader(all.subspan(pos + 4 + len, 4)).Get<uint32_t>();
      ok = internal::Crc32(all.subspan(pos, 4 + len)) == crc;
    }
    if (ok) {
      internal::ByteReader r(all.subspan(pos + 4, len));
      StoredRecord rec;
      const auto id = r.GetBytes(16);
      std::copy(id.begin(), id.end(), rec.uuid.bytes.begin());
      rec.captured_at = r.Get<int64_t>();
      rec.raw_equivalent_bytes = r.Get<uint64_t>();
      rec.in_flight = r.Get<uint8_t>() != 0;
      const uint8_t post_len = r.Get<uint8_t>();
      ok = post_len <= r.remaining();
      if (ok) {
        rec.post_id = r.GetString(post_len);
        const auto payload = r.GetBytes(r.remaining());
        rec.payload.assign(payload.begin(), payload.end());
        result.state.used_bytes += rec.byte_len();
        result.state.records.push_back(std::move(rec));
        ++result.records_restored;
        pos += 8 + len;
        continue;
      }
    }
    // Everything from the first bad entry on is unrecoverable.
    result.truncated = true;
    result.entries_discarded = 1;
    break;
  }
  return result;
}

}  // namespace zsdc
