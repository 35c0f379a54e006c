/*
 * Copyright 2026 The fedspike Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FEDSPIKE_TRANSPORT_H_
#define FEDSPIKE_TRANSPORT_H_

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace fedspike {

// Client side of a transport. One channel per client, used by one worker.
class ClientChannel {
 public:
  virtual ~ClientChannel() = default;
  virtual void Send(int round, const std::string& payload) = 0;
  // Blocks until the round-2 broadcast arrives; nullopt on timeout or
  // shutdown.
  virtual std::optional<std::string> AwaitBroadcast(
      std::chrono::milliseconds timeout) = 0;
};

// Byte-level message transport between clients and the server. Payloads are
// opaque; the session encodes and decodes them. Sends from distinct client
// channels may happen concurrently.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::string_view name() const = 0;
  virtual std::unique_ptr<ClientChannel> Connect(const std::string& client_id) = 0;
  // Server side: payloads of `round` in arrival order. Returns once
  // `expected` payloads arrived or `timeout` elapsed.
  virtual std::vector<std::string> Gather(int round, std::size_t expected,
                                          std::chrono::milliseconds timeout) = 0;
  virtual void Broadcast(const std::string& payload) = 0;
  // Wakes every pending AwaitBroadcast; called when a session aborts.
  virtual void Shutdown() = 0;
};

// Queues in shared memory.
class InProcessTransport final : public Transport {
 public:
  std::string_view name() const override { return "in-process"; }
  std::unique_ptr<ClientChannel> Connect(const std::string& client_id) override;
  std::vector<std::string> Gather(int round, std::size_t expected,
                                  std::chrono::milliseconds timeout) override;
  void Broadcast(const std::string& payload) override;
  void Shutdown() override;

 private:
  friend class InProcessChannel;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::string> inbox_[3];
  std::optional<std::string> broadcast_;
  bool shutdown_ = false;
};

// One file per message in a session directory: "{round}_{client_id}.msg" for
// client uploads and "2_broadcast.msg" for the server broadcast. Files are
// written to a temporary name and renamed, so readers never see partial
// payloads. The directory must not contain *.msg files when the transport is
// created.
class FileTransport final : public Transport {
 public:
  explicit FileTransport(std::filesystem::path session_dir,
                         std::chrono::milliseconds poll_interval =
                             std::chrono::milliseconds(2));

  std::string_view name() const override { return "file"; }
  const std::filesystem::path& directory() const { return dir_; }
  std::unique_ptr<ClientChannel> Connect(const std::string& client_id) override;
  std::vector<std::string> Gather(int round, std::size_t expected,
                                  std::chrono::milliseconds timeout) override;
  void Broadcast(const std::string& payload) override;
  void Shutdown() override;

  static std::string MessageFileName(int round, std::string_view client_id);
  static constexpr const char* kBroadcastFile = "2_broadcast.msg";

 private:
  friend class FileChannel;
  void WriteAtomically(const std::string& name, const std::string& payload);

  std::filesystem::path dir_;
  std::chrono::milliseconds poll_;
  std::mutex seen_mu_;
  std::set<std::string> seen_;
  std::atomic<bool> shutdown_{false};
};

// 4-byte big-endian length prefix followed by the payload.
std::string EncodeFrame(std::string_view payload);
// Parses one complete frame; throws TransportError on truncation or a length
// mismatch.
std::string DecodeFrame(std::string_view frame);

inline constexpr std::uint32_t kMaxFrameBytes = 256u << 20;

// TCP on 127.0.0.1. Each client keeps one connection for the whole session:
// it sends its round-1 frame, reads the broadcast frame and sends its round-2
// frame on the same socket. One message per frame.
class TcpTransport final : public Transport {
 public:
  // port 0 picks an ephemeral port.
  explicit TcpTransport(std::uint16_t port = 0);
  ~TcpTransport() override;
  TcpTransport(const TcpTransport&) = delete;
  TcpTransport& operator=(const TcpTransport&) = delete;

  std::string_view name() const override { return "tcp"; }
  std::uint16_t port() const { return port_; }
  std::unique_ptr<ClientChannel> Connect(const std::string& client_id) override;
  std::vector<std::string> Gather(int round, std::size_t expected,
                                  std::chrono::milliseconds timeout) override;
  void Broadcast(const std::string& payload) override;
  void Shutdown() override;

 private:
  void AcceptLoop();
  void ReadLoop(int fd);

  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stop_{false};
  std::thread acceptor_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::vector<int> connections_;
  std::vector<std::thread> readers_;
  std::deque<std::string> inbox_;
};

}  // namespace fedspike

#endif  // FEDSPIKE_TRANSPORT_H_
