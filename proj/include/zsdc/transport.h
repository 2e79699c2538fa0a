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

// Edge-to-central batch transfer. "ZSDT" frames (little-endian):
//
//   0  magic "ZSDT"
//   4  u32 frame type (BATCH = 1, ACK = 2, NACK = 3)
//   8  u32 flags, always 0
//  12  u32 body length
//  16  body
//  16+len  u32 CRC32 (IEEE) over bytes 4 .. 16+len
//
// BATCH body: u64 batch_id, u8 post id length, post id, u32 record count,
// then per record a 16-byte uuid, u32 payload length and the payload.
// ACK body: u64 batch_id. NACK body: u64 batch_id, u16 reason length, reason.
//
// The protocol is defined on byte streams, so TCP and the in-memory pipe
// used by tests are interchangeable.

#ifndef ZSDC_TRANSPORT_H_
#define ZSDC_TRANSPORT_H_

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "zsdc/uuid.h"

namespace zsdc {

inline constexpr size_t kFrameHeaderBytes = 16;
inline constexpr size_t kFrameOverheadBytes = kFrameHeaderBytes + 4;
inline constexpr uint32_t kMaxFrameBody = 1u << 28;
inline constexpr uint16_t kDefaultPort = 7440;

enum class FrameType : uint32_t { kBatch = 1, kAck = 2, kNack = 3 };

struct WireFrame {
  FrameType type = FrameType::kBatch;
  std::vector<uint8_t> body;
  bool operator==(const WireFrame&) const = default;
};

std::vector<uint8_t> EncodeFrame(const WireFrame& frame);
// Exactly one frame. kBadMagic, kTruncated, or kProtocol for a CRC
// mismatch, unknown type, non-zero flags or trailing bytes.
WireFrame DecodeFrame(std::span<const uint8_t> bytes);

struct TransferRecord {
  Uuid uuid;
  std::vector<uint8_t> payload;
  bool operator==(const TransferRecord&) const = default;
};

struct TransferBatch {
  uint64_t batch_id = 0;
  std::string post_id;
  std::vector<TransferRecord> records;
  bool operator==(const TransferBatch&) const = default;
};

// kInvalidArgument on duplicate uuids or an over-long post id.
std::vector<uint8_t> EncodeBatchBody(const TransferBatch& batch);
// kProtocol on malformed bodies (including duplicate uuids).
TransferBatch DecodeBatchBody(std::span<const uint8_t> body);

std::vector<uint8_t> EncodeAckBody(uint64_t batch_id);
uint64_t DecodeAckBody(std::span<const uint8_t> body);
std::vector<uint8_t> EncodeNackBody(uint64_t batch_id, const std::string& reason);
std::pair<uint64_t, std::string> DecodeNackBody(std::span<const uint8_t> body);

using Clock = std::chrono::steady_clock;

// Bidirectional byte stream. Failures (peer closed, reset) are kRetriable.
class ByteStream {
 public:
  virtual ~ByteStream() = default;
  virtual void Write(std::span<const uint8_t> bytes) = 0;
  // Blocks until at least one byte arrives or the deadline passes (returns
  // 0). kRetriable once the peer has closed and nothing is buffered.
  virtual size_t ReadSome(std::span<uint8_t> out, Clock::time_point deadline) = 0;
  virtual void Close() = 0;
};

// kRetriable on timeout or close.
void ReadExact(ByteStream& stream, std::span<uint8_t> out, Clock::time_point deadline);

// Reads one frame. kRetriable on timeout, kBadMagic, or kProtocol as in
// DecodeFrame (and for bodies over kMaxFrameBody).
WireFrame ReadFrame(ByteStream& stream, Clock::time_point deadline);
// As ReadFrame, but nullopt when the deadline passes before the first byte.
// A timeout mid-frame leaves the stream misaligned and is kRetriable.
std::optional<WireFrame> TryReadFrame(ByteStream& stream, Clock::time_point deadline);

// Connected in-memory pair; closing one end wakes the other.
std::pair<std::shared_ptr<ByteStream>, std::shared_ptr<ByteStream>> MakeMemoryPipe();

// Drops each Write call (one whole frame for the sender and server here)
// with the given probability, using a seeded generator.
class LossyStream : public ByteStream {
 public:
  LossyStream(std::shared_ptr<ByteStream> inner, double drop_probability, uint64_t seed);
  void Write(std::span<const uint8_t> bytes) override;
  size_t ReadSome(std::span<uint8_t> out, Clock::time_point deadline) override;
  void Close() override;
  int64_t dropped() const { return dropped_; }

 private:
  std::shared_ptr<ByteStream> inner_;
  double drop_probability_;
  Rng rng_;
  int64_t dropped_ = 0;
};

class TcpStream : public ByteStream {
 public:
  explicit TcpStream(int fd);
  ~TcpStream() override;
  TcpStream(const TcpStream&) = delete;
  TcpStream& operator=(const TcpStream&) = delete;

  // kRetriable if the connection cannot be established.
  static std::shared_ptr<TcpStream> Connect(const std::string& host, uint16_t port,
                                            std::chrono::milliseconds timeout);

  void Write(std::span<const uint8_t> bytes) override;
  size_t ReadSome(std::span<uint8_t> out, Clock::time_point deadline) override;
  void Close() override;

 private:
  int fd_;
};

class TcpListener {
 public:
  // Port 0 picks a free port. kIo on failure.
  TcpListener(const std::string& host, uint16_t port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  uint16_t port() const { return port_; }
  // nullptr on timeout.
  std::shared_ptr<TcpStream> Accept(std::chrono::milliseconds timeout);
  void Close();

 private:
  int fd_;
  uint16_t port_;
};

// `flag` if set, else $ZSDC_PORT, else 7440. kInvalidArgument on a bad value.
uint16_t ResolvePort(std::optional<int> flag);

// "host:port" or "host" (port from ResolvePort). kInvalidArgument otherwise.
std::pair<std::string, uint16_t> ParseAddress(const std::string& addr);

struct SendOptions {
  std::chrono::milliseconds ack_timeout{5000};
  int max_retries = 5;
  std::chrono::milliseconds initial_backoff{1000};
  std::chrono::milliseconds max_backoff{60000};
};

struct TransferCounter {
  uint64_t bytes_sent = 0;
  uint64_t frames_sent = 0;
  uint64_t raw_equivalent_bytes = 0;
  uint64_t batches_acked = 0;
  uint64_t retries = 0;
};

enum class AckStatus { kAcked, kNacked, kTimeout, kReset };

struct AckResult {
  AckStatus status = AckStatus::kTimeout;
  std::string detail;
  bool ok() const { return status == AckStatus::kAcked; }
};

// One attempt: writes a BATCH frame (bytes_sent grows by its exact length)
// and waits for the matching ACK or NACK; stale ACKs are skipped. kProtocol
// on a corrupt reply.
AckResult SendBatch(ByteStream& stream, const TransferBatch& batch,
                    TransferCounter& counter, std::chrono::milliseconds timeout);

// Retrying sender: up to 1 + max_retries attempts with doubling backoff.
// A reset stream is dropped and the connector is called again.
class Sender {
 public:
  using Connector = std::function<std::shared_ptr<ByteStream>()>;
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  Sender(Connector connect, SendOptions options, Sleeper sleep = nullptr);

  AckResult Deliver(const TransferBatch& batch);
  TransferCounter& counter() { return counter_; }
  const TransferCounter& counter() const { return counter_; }

 private:
  Connector connect_;
  SendOptions options_;
  Sleeper sleep_;
  std::shared_ptr<ByteStream> stream_;
  TransferCounter counter_;
};

struct CostReport {
  uint64_t bytes_sent = 0;
  uint64_t raw_equivalent_bytes = 0;
  // Absent when nothing was shipped.
  std::optional<double> ratio;
};

CostReport MakeCostReport(const TransferCounter& counter);

}  // namespace zsdc

#endif  // ZSDC_TRANSPORT_H_
