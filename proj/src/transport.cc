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

#include "zsdc/transport.h"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <condition_variable>
#include <cstdlib>
#include <cstring>
#include <deque>
#include <mutex>
#include <set>
#include <thread>

#include "bytes.h"
#include "crc32.h"
#include "zsdc/error.h"

namespace zsdc {
namespace {

constexpr uint8_t kMagic[4] = {'Z', 'S', 'D', 'T'};

bool KnownType(uint32_t t) { return t >= 1 && t <= 3; }

struct FrameHead {
  FrameType type;
  uint32_t length;
};

// Validates bytes 0..15 of a frame.
FrameHead ParseHead(std::span<const uint8_t> head) {
  if (!std::equal(kMagic, kMagic + 4, head.begin())) {
    Fail(ErrorCode::kBadMagic, "not a ZSDT frame");
  }
  internal::ByteReader r(head.subspan(4));
  const uint32_t type = r.Get<uint32_t>();
  const uint32_t flags = r.Get<uint32_t>();
  const uint32_t length = r.Get<uint32_t>();
  if (!KnownType(type)) Fail(ErrorCode::kProtocol, "unknown frame type");
  if (flags != 0) Fail(ErrorCode::kProtocol, "non-zero frame flags");
  if (length > kMaxFrameBody) Fail(ErrorCode::kProtocol, "frame body too large");
  return {static_cast<FrameType>(type), length};
}

void CheckCrc(std::span<const uint8_t> covered, uint32_t stored) {
  if (internal::Crc32(covered) != stored) {
    Fail(ErrorCode::kProtocol, "frame CRC mismatch");
  }
}

int Milliseconds(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
      deadline - Clock::now());
  return static_cast<int>(std::clamp<int64_t>(left.count(), 0, 1 << 30));
}

// One direction of an in-memory pipe.
struct Channel {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<uint8_t> data;
  bool closed = false;
};

class MemoryStream : public ByteStream {
 public:
  MemoryStream(std::shared_ptr<Channel> in, std::shared_ptr<Channel> out)
      : in_(std::move(in)), out_(std::move(out)) {}
  ~MemoryStream() override { Close(); }

  void Write(std::span<const uint8_t> bytes) override {
    std::lock_guard lock(out_->mu);
    if (out_->closed) Fail(ErrorCode::kRetriable, "pipe closed");
    out_->data.insert(out_->data.end(), bytes.begin(), bytes.end());
    out_->cv.notify_all();
  }

  size_t ReadSome(std::span<uint8_t> out, Clock::time_point deadline) override {
    std::unique_lock lock(in_->mu);
    in_->cv.wait_until(lock, deadline,
                       [&] { return !in_->data.empty() || in_->closed; });
    if (in_->data.empty()) {
      if (in_->closed) Fail(ErrorCode::kRetriable, "pipe closed");
      return 0;
    }
    const size_t n = std::min(out.size(), in_->data.size());
    std::copy_n(in_->data.begin(), n, out.begin());
    in_->data.erase(in_->data.begin(), in_->data.begin() + static_cast<ptrdiff_t>(n));
    return n;
  }

  void Close() override {
    for (Channel* c : {in_.get(), out_.get()}) {
      std::lock_guard lock(c->mu);
      c->closed = true;
      c->cv.notify_all();
    }
  }

 private:
  std::shared_ptr<Channel> in_;
  std::shared_ptr<Channel> out_;
};

}  // namespace

std::vector<uint8_t> EncodeFrame(const WireFrame& frame) {
  if (frame.body.size() > kMaxFrameBody) {
    Fail(ErrorCode::kInvalidArgument, "frame body too large");
  }
  std::vector<uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.reserve(kFrameOverheadBytes + frame.body.size());
  internal::ByteWriter w(&out);
  w.Put(static_cast<uint32_t>(frame.type));
  w.Put(uint32_t{0});
  w.Put(static_cast<uint32_t>(frame.body.size()));
  w.PutBytes(frame.body);
  w.Put(internal::Crc32(std::span<const uint8_t>(out).subspan(4)));
  return out;
}

WireFrame DecodeFrame(std::span<const uint8_t> bytes) {
  if (bytes.size() < kFrameHeaderBytes) {
    if (bytes.size() >= 4 && !std::equal(kMagic, kMagic + 4, bytes.begin())) {
      Fail(ErrorCode::kBadMagic, "not a ZSDT frame");
    }
    Fail(ErrorCode::kTruncated, "frame shorter than its header");
  }
  const FrameHead head = ParseHead(bytes.first(kFrameHeaderBytes));
  const size_t total = kFrameOverheadBytes + head.length;
  if (bytes.size() < total) Fail(ErrorCode::kTruncated, "frame body truncated");
  if (bytes.size() > total) Fail(ErrorCode::kProtocol, "trailing bytes after frame");
  internal::ByteReader tail(bytes.subspan(total - 4));
  CheckCrc(bytes.subspan(4, total - 8), tail.Get<uint32_t>());
  WireFrame frame;
  frame.type = head.type;
  const auto body = bytes.subspan(kFrameHeaderBytes, head.length);
  frame.body.assign(body.begin(), body.end());
  return frame;
}

std::vector<uint8_t> EncodeBatchBody(const TransferBatch& batch) {
  if (batch.post_id.size() > 255) Fail(ErrorCode::kInvalidArgument, "post id too long");
  std::set<Uuid> seen;
  std::vector<uint8_t> out;
  internal::ByteWriter w(&out);
  w.Put(batch.batch_id);
  w.Put(static_cast<uint8_t>(batch.post_id.size()));
  w.PutBytes(batch.post_id);
  w.Put(static_cast<uint32_t>(batch.records.size()));
  for (const TransferRecord& r : batch.records) {
    if (!seen.insert(r.uuid).second) {
      Fail(ErrorCode::kInvalidArgument, "duplicate uuid in batch");
    }
    if (r.payload.size() > kMaxFrameBody) {
      Fail(ErrorCode::kInvalidArgument, "record payload too large");
    }
    w.PutBytes(r.uuid.bytes);
    w.Put(static_cast<uint32_t>(r.payload.size()));
    w.PutBytes(r.payload);
  }
  return out;
}

TransferBatch DecodeBatchBody(std::span<const uint8_t> body) {
  try {
    internal::ByteReader r(body);
    TransferBatch b;
    b.batch_id = r.Get<uint64_t>();
    b.post_id = r.GetString(r.Get<uint8_t>());
    const uint32_t n = r.Get<uint32_t>();
    // Each record needs at least 20 bytes; reject absurd counts early.
    if (n > r.remaining() / 20) Fail(ErrorCode::kTruncated, "record count");
    std::set<Uuid> seen;
    b.records.reserve(n);
    for (uint32_t i = 0; i < n; ++i) {
      TransferRecord rec;
      const auto id = r.GetBytes(16);
      std::copy(id.begin(), id.end(), rec.uuid.bytes.begin());
      if (!seen.insert(rec.uuid).second) {
        Fail(ErrorCode::kProtocol, "duplicate uuid in batch");
      }
      const auto payload = r.GetBytes(r.Get<uint32_t>());
      rec.payload.assign(payload.begin(), payload.end());
      b.records.push_back(std::move(rec));
    }
    if (r.remaining() != 0) Fail(ErrorCode::kProtocol, "trailing bytes in batch");
    return b;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kProtocol) throw;
    Fail(ErrorCode::kProtocol, std::string("malformed batch body: ") + e.what());
  }
}

std::vector<uint8_t> EncodeAckBody(uint64_t batch_id) {
  std::vector<uint8_t> out;
  internal::ByteWriter(&out).Put(batch_id);
  return out;
}

uint64_t DecodeAckBody(std::span<const uint8_t> body) {
  if (body.size() != 8) Fail(ErrorCode::kProtocol, "malformed ACK body");
  return internal::ByteReader(body).Get<uint64_t>();
}

std::vector<uint8_t> EncodeNackBody(uint64_t batch_id, const std::string& reason) {
  std::vector<uint8_t> out;
  internal::ByteWriter w(&out);
  w.Put(batch_id);
  const size_t n = std::min<size_t>(reason.size(), 0xffff);
  w.Put(static_cast<uint16_t>(n));
  w.PutBytes(std::string_view(reason).substr(0, n));
  return out;
}

std::pair<uint64_t, std::string> DecodeNackBody(std::span<const uint8_t> body) {
  try {
    internal::ByteReader r(body);
    const uint64_t id = r.Get<uint64_t>();
    std::string reason = r.GetString(r.Get<uint16_t>());
    if (r.remaining() != 0) Fail(ErrorCode::kProtocol, "trailing bytes in NACK");
    return {id, std::move(reason)};
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kProtocol) throw;
    Fail(ErrorCode::kProtocol, "malformed NACK body");
  }
}

void ReadExact(ByteStream& stream, std::span<uint8_t> out, Clock::time_point deadline) {
  size_t got = 0;
  while (got < out.size()) {
    const size_t n = stream.ReadSome(out.subspan(got), deadline);
    if (n == 0) Fail(ErrorCode::kRetriable, "timed out waiting for data");
    got += n;
  }
}

std::optional<WireFrame> TryReadFrame(ByteStream& stream, Clock::time_point deadline) {
  std::vector<uint8_t> bytes(kFrameHeaderBytes);
  const size_t first = stream.ReadSome(bytes, deadline);
  if (first == 0) return std::nullopt;
  ReadExact(stream, std::span<uint8_t>(bytes).subspan(first), deadline);
  const FrameHead head = ParseHead(bytes);
  bytes.resize(kFrameOverheadBytes + head.length);
  ReadExact(stream, std::span<uint8_t>(bytes).subspan(kFrameHeaderBytes), deadline);
  return DecodeFrame(bytes);
}

WireFrame ReadFrame(ByteStream& stream, Clock::time_point deadline) {
  std::optional<WireFrame> frame = TryReadFrame(stream, deadline);
  if (!frame) Fail(ErrorCode::kRetriable, "timed out waiting for a frame");
  return std::move(*frame);
}


std::pair<std::shared_ptr<ByteStream>, std::shared_ptr<ByteStream>> MakeMemoryPipe() {
  auto a_to_b = std::make_shared<Channel>();
  auto b_to_a = std::make_shared<Channel>();
  return {std::make_shared<MemoryStream>(b_to_a, a_to_b),
          std::make_shared<MemoryStream>(a_to_b, b_to_a)};
}

LossyStream::LossyStream(std::shared_ptr<ByteStream> inner, double drop_probability,
                         uint64_t seed)
    : inner_(std::move(inner)), drop_probability_(drop_probability), rng_(seed) {
  if (!(drop_probability >= 0.0 && drop_probability < 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "drop probability must be in [0, 1)");
  }
}

void LossyStream::Write(std::span<const uint8_t> bytes) {
  if (rng_.Uniform() < drop_probability_) {
    ++dropped_;
    return;
  }
  inner_->Write(bytes);
}

size_t LossyStream::ReadSome(std::span<uint8_t> out, Clock::time_point deadline) {
  return inner_->ReadSome(out, deadline);
}

void LossyStream::Close() { inner_->Close(); }

TcpStream::TcpStream(int fd) : fd_(fd) {
  const int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

TcpStream::~TcpStream() { Close(); }

std::shared_ptr<TcpStream> TcpStream::Connect(const std::string& host, uint16_t port,
                                              std::chrono::milliseconds timeout) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0 || !res) {
    Fail(ErrorCode::kRetriable, "cannot resolve " + host);
  }
  std::string last_error = "no addresses";
  const auto deadline = Clock::now() + timeout;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    const int flags = ::fcntl(fd, F_GETFL);
    ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
    int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
    if (rc != 0 && errno == EINPROGRESS) {
      pollfd p{fd, POLLOUT, 0};
      rc = ::poll(&p, 1, Milliseconds(deadline)) == 1 ? 0 : -1;
      int err = rc == 0 ? 0 : ETIMEDOUT;
      socklen_t len = sizeof(err);
      if (rc == 0) ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
      if (err != 0) {
        errno = err;
        rc = -1;
      }
    }
    if (rc == 0) {
      ::fcntl(fd, F_SETFL, flags);
      ::freeaddrinfo(res);
      return std::make_shared<TcpStream>(fd);
    }
    last_error = std::strerror(errno);
    ::close(fd);
  }
  ::freeaddrinfo(res);
  Fail(ErrorCode::kRetriable, "connect to " + host + ":" + service + ": " + last_error);
}

void TcpStream::Write(std::span<const uint8_t> bytes) {
  size_t sent = 0;
  while (sent < bytes.size()) {
    if (fd_ < 0) Fail(ErrorCode::kRetriable, "socket closed");
    const ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      Fail(ErrorCode::kRetriable, std::string("send: ") + std::strerror(errno));
    }
    sent += static_cast<size_t>(n);
  }
}

size_t TcpStream::ReadSome(std::span<uint8_t> out, Clock::time_point deadline) {
  if (fd_ < 0) Fail(ErrorCode::kRetriable, "socket closed");
  for (;;) {
    pollfd p{fd_, POLLIN, 0};
    const int rc = ::poll(&p, 1, Milliseconds(deadline));
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) Fail(ErrorCode::kRetriable, std::string("poll: ") + std::strerror(errno));
    if (rc == 0) return 0;
    const ssize_t n = ::recv(fd_, out.data(), out.size(), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n < 0) Fail(ErrorCode::kRetriable, std::string("recv: ") + std::strerror(errno));
    if (n == 0) Fail(ErrorCode::kRetriable, "connection closed by peer");
    return static_cast<size_t>(n);
  }
}

void TcpStream::Close() {
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    fd_ = -1;
  }
}

TcpListener::TcpListener(const std::string& host, uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (::getaddrinfo(host.empty() ? nullptr : host.c_str(), service.c_str(), &hints, &res) != 0 ||
      !res) {
    Fail(ErrorCode::kIo, "cannot resolve listen address " + host);
  }
  fd_ = ::socket(res->ai_family, res->ai_socktype | SOCK_CLOEXEC, res->ai_protocol);
  if (fd_ < 0) {
    ::freeaddrinfo(res);
    Fail(ErrorCode::kIo, "socket failed");
  }
  const int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(fd_, res->ai_addr, res->ai_addrlen) != 0 || ::listen(fd_, 64) != 0) {
    const std::string err = std::strerror(errno);
    ::freeaddrinfo(res);
    ::close(fd_);
    Fail(ErrorCode::kIo, "bind " + host + ":" + service + ": " + err);
  }
  ::freeaddrinfo(res);
  sockaddr_storage addr{};
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.ss_family == AF_INET6
                    ? reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port
                    : reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
}

TcpListener::~TcpListener() { Close(); }

std::shared_ptr<TcpStream> TcpListener::Accept(std::chrono::milliseconds timeout) {
  if (fd_ < 0) Fail(ErrorCode::kIo, "listener closed");
  pollfd p{fd_, POLLIN, 0};
  const int rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
  if (rc <= 0) return nullptr;
  const int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
  if (fd < 0) return nullptr;
  return std::make_shared<TcpStream>(fd);
}

void TcpListener::Close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

uint16_t ResolvePort(std::optional<int> flag) {
  int port = kDefaultPort;
  if (flag) {
    port = *flag;
  } else if (const char* env = std::getenv("ZSDC_PORT"); env && *env) {
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), port);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      Fail(ErrorCode::kInvalidArgument, "ZSDC_PORT is not a number: " + std::string(s));
    }
  }
  if (port < 0 || port > 65535) {
    Fail(ErrorCode::kInvalidArgument, "port out of range: " + std::to_string(port));
  }
  return static_cast<uint16_t>(port);
}

std::pair<std::string, uint16_t> ParseAddress(const std::string& addr) {
  const size_t colon = addr.rfind(':');
  if (colon == std::string::npos) {
    if (addr.empty()) Fail(ErrorCode::kInvalidArgument, "empty address");
    return {addr, ResolvePort(std::nullopt)};
  }
  const std::string host = addr.substr(0, colon);
  const std::string_view port_text = std::string_view(addr).substr(colon + 1);
  int port = -1;
  const auto [ptr, ec] =
      std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (host.empty() || ec != std::errc() || ptr != port_text.data() + port_text.size()) {
    Fail(ErrorCode::kInvalidArgument, "expected host:port, got '" + addr + "'");
  }
  return {host, ResolvePort(port)};
}

AckResult SendBatch(ByteStream& stream, const TransferBatch& batch,
                    TransferCounter& counter, std::chrono::milliseconds timeout) {
  const std::vector<uint8_t> frame =
      EncodeFrame({FrameType::kBatch, EncodeBatchBody(batch)});
  try {
    stream.Write(frame);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kRetriable) throw;
    return {AckStatus::kReset, e.what()};
  }
  counter.bytes_sent += frame.size();
  ++counter.frames_sent;

  const auto deadline = Clock::now() + timeout;
  for (;;) {
    WireFrame reply;
    try {
      std::optional<WireFrame> got = TryReadFrame(stream, deadline);
      if (!got) return {AckStatus::kTimeout, "no reply before the ACK timeout"};
      reply = std::move(*got);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kRetriable) {
        Fail(ErrorCode::kProtocol, std::string("bad reply: ") + e.what());
      }
      return {AckStatus::kReset, e.what()};
    }
    if (reply.type == FrameType::kAck) {
      if (DecodeAckBody(reply.body) == batch.batch_id) return {AckStatus::kAcked, ""};
      continue;  // late ACK for an earlier attempt
    }
    if (reply.type == FrameType::kNack) {
      auto [id, reason] = DecodeNackBody(reply.body);
      if (id == batch.batch_id || id == 0) return {AckStatus::kNacked, reason};
      continue;
    }
    Fail(ErrorCode::kProtocol, "unexpected BATCH frame from server");
  }
}

Sender::Sender(Connector connect, SendOptions options, Sleeper sleep)
    : connect_(std::move(connect)), options_(options), sleep_(std::move(sleep)) {
  if (!sleep_) sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

AckResult Sender::Deliver(const TransferBatch& batch) {
  AckResult result{AckStatus::kReset, "not attempted"};
  auto backoff = options_.initial_backoff;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) {
      ++counter_.retries;
      sleep_(backoff);
      backoff = std::min(backoff * 2, options_.max_backoff);
    }
    if (!stream_) {
      try {
        stream_ = connect_();
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kRetriable) throw;
        result = {AckStatus::kReset, e.what()};
        continue;
      }
    }
    result = SendBatch(*stream_, batch, counter_, options_.ack_timeout);
    if (result.ok()) {
      ++counter_.batches_acked;
      return result;
    }
    if (result.status == AckStatus::kReset) {
      stream_->Close();
      stream_.reset();
    }
  }
  return result;
}

CostReport MakeCostReport(const TransferCounter& counter) {
  CostReport r;
  r.bytes_sent = counter.bytes_sent;
  r.raw_equivalent_bytes = counter.raw_equivalent_bytes;
  if (counter.bytes_sent > 0 && counter.raw_equivalent_bytes > 0) {
    r.ratio = static_cast<double>(counter.bytes_sent) /
              static_cast<double>(counter.raw_equivalent_bytes);
  }
  return r;
}

}  // namespace zsdc
