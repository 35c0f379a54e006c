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

#include "fedspike/transport.h"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "fedspike/error.h"

namespace fedspike {
namespace {

using Clock = std::chrono::steady_clock;

std::string ErrnoMessage(const char* what) {
  return std::string(what) + ": " + std::strerror(errno);
}

}  // namespace

// ---------------------------------------------------------------------------
// In-process

class InProcessChannel final : public ClientChannel {
 public:
  explicit InProcessChannel(InProcessTransport& t) : t_(t) {}

  void Send(int round, const std::string& payload) override {
    if (round < 1 || round > 2) throw TransportError("invalid round");
    {
      std::lock_guard<std::mutex> lock(t_.mu_);
      t_.inbox_[round].push_back(payload);
    }
    t_.cv_.notify_all();
  }

  std::optional<std::string> AwaitBroadcast(
      std::chrono::milliseconds timeout) override {
    std::unique_lock<std::mutex> lock(t_.mu_);
    t_.cv_.wait_for(lock, timeout, [this] {
      return t_.broadcast_.has_value() || t_.shutdown_;
    });
    return t_.broadcast_;
  }

 private:
  InProcessTransport& t_;
};

std::unique_ptr<ClientChannel> InProcessTransport::Connect(
    const std::string& /*client_id*/) {
  return std::make_unique<InProcessChannel>(*this);
}

std::vector<std::string> InProcessTransport::Gather(
    int round, std::size_t expected, std::chrono::milliseconds timeout) {
  if (round < 1 || round > 2) throw TransportError("invalid round");
  std::unique_lock<std::mutex> lock(mu_);
  cv_.wait_for(lock, timeout,
               [&] { return inbox_[round].size() >= expected || shutdown_; });
  std::vector<std::string> out(std::make_move_iterator(inbox_[round].begin()),
                               std::make_move_iterator(inbox_[round].end()));
  inbox_[round].clear();
  return out;
}

void InProcessTransport::Broadcast(const std::string& payload) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    broadcast_ = payload;
  }
  cv_.notify_all();
}

void InProcessTransport::Shutdown() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    shutdown_ = true;
  }
  cv_.notify_all();
}

// ---------------------------------------------------------------------------
// File exchange

class FileChannel final : public ClientChannel {
 public:
  FileChannel(FileTransport& t, std::string id) : t_(t), id_(std::move(id)) {}

  void Send(int round, const std::string& payload) override {
    t_.WriteAtomically(FileTransport::MessageFileName(round, id_), payload);
  }

  std::optional<std::string> AwaitBroadcast(
      std::chrono::milliseconds timeout) override {
    const auto deadline = Clock::now() + timeout;
    const auto path = t_.dir_ / FileTransport::kBroadcastFile;
    while (!t_.shutdown_.load()) {
      if (std::filesystem::exists(path)) {
        std::ifstream in(path, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
      }
      if (Clock::now() >= deadline) break;
      std::this_thread::sleep_for(t_.poll_);
    }
    return std::nullopt;
  }

 private:
  FileTransport& t_;
  std::string id_;
};

FileTransport::FileTransport(std::filesystem::path session_dir,
                             std::chrono::milliseconds poll_interval)
    : dir_(std::move(session_dir)), poll_(poll_interval) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) {
    throw TransportError("cannot create session directory " + dir_.string() +
                         ": " + ec.message());
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (entry.path().extension() == ".msg") {
      throw TransportError("session directory " + dir_.string() +
                           " already contains message files");
    }
  }
}

std::string FileTransport::MessageFileName(int round,
                                           std::string_view client_id) {
  return std::to_string(round) + "_" + std::string(client_id) + ".msg";
}

void FileTransport::WriteAtomically(const std::string& name,
                                    const std::string& payload) {
  const auto final_path = dir_ / name;
  const auto tmp_path = dir_ / (name + ".tmp");
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    if (!out) throw TransportError("cannot write " + tmp_path.string());
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw TransportError("short write to " + tmp_path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp_path, final_path, ec);
  if (ec) {
    throw TransportError("cannot publish " + final_path.string() + ": " +
                         ec.message());
  }
}

std::unique_ptr<ClientChannel> FileTransport::Connect(
    const std::string& client_id) {
  return std::make_unique<FileChannel>(*this, client_id);
}

std::vector<std::string> FileTransport::Gather(
    int round, std::size_t expected, std::chrono::milliseconds timeout) {
  const std::string prefix = std::to_string(round) + "_";
  const auto deadline = Clock::now() + timeout;
  std::vector<std::string> out;
  while (true) {
    std::vector<std::string> fresh;
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
      const std::string name = entry.path().filename().string();
      if (entry.path().extension() != ".msg" || name.rfind(prefix, 0) != 0 ||
          name == kBroadcastFile) {
        continue;
      }
      std::lock_guard<std::mutex> lock(seen_mu_);
      if (seen_.insert(name).second) fresh.push_back(name);
    }
    // Files discovered in one scan are ordered by name.
    std::sort(fresh.begin(), fresh.end());
    for (const std::string& name : fresh) {
      std::ifstream in(dir_ / name, std::ios::binary);
      out.emplace_back(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
    }
    if (out.size() >= expected || shutdown_.load() ||
        Clock::now() >= deadline) {
      break;
    }
    std::this_thread::sleep_for(poll_);
  }
  return out;
}

void FileTransport::Broadcast(const std::string& payload) {
  WriteAtomically(kBroadcastFile, payload);
}

void FileTransport::Shutdown() { shutdown_.store(true); }

// ---------------------------------------------------------------------------
// TCP

std::string EncodeFrame(std::string_view payload) {
  if (payload.size() > kMaxFrameBytes) {
    throw TransportError("frame payload too large");
  }
  const auto len = static_cast<std::uint32_t>(payload.size());
  std::string out;
  out.reserve(payload.size() + 4);
  out.push_back(static_cast<char>((len >> 24) & 0xff));
  out.push_back(static_cast<char>((len >> 16) & 0xff));
  out.push_back(static_cast<char>((len >> 8) & 0xff));
  out.push_back(static_cast<char>(len & 0xff));
  out.append(payload);
  return out;
}

namespace {

std::uint32_t ReadLength(const unsigned char* b) {
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
         (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

void WriteAll(int fd, std::string_view bytes) {
  std::size_t done = 0;
  while (done < bytes.size()) {
    const ssize_t k =
        ::send(fd, bytes.data() + done, bytes.size() - done, MSG_NOSIGNAL);
    if (k < 0) {
      if (errno == EINTR) continue;
      throw TransportError(ErrnoMessage("send"));
    }
    done += static_cast<std::size_t>(k);
  }
}

// Reads exactly `count` bytes. Returns false on EOF, error or deadline.
bool ReadExact(int fd, char* buf, std::size_t count,
               std::optional<Clock::time_point> deadline) {
  std::size_t done = 0;
  while (done < count) {
    if (deadline) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          *deadline - Clock::now());
      if (left.count() <= 0) return false;
      pollfd pfd{fd, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (ready < 0 && errno == EINTR) continue;
      if (ready <= 0) return false;
    }
    const ssize_t k = ::recv(fd, buf + done, count - done, 0);
    if (k < 0 && errno == EINTR) continue;
    if (k <= 0) return false;
    done += static_cast<std::size_t>(k);
  }
  return true;
}

std::optional<std::string> ReadFrame(
    int fd, std::optional<Clock::time_point> deadline) {
  unsigned char header[4];
  if (!ReadExact(fd, reinterpret_cast<char*>(header), 4, deadline)) {
    return std::nullopt;
  }
  const std::uint32_t len = ReadLength(header);
  if (len > kMaxFrameBytes) return std::nullopt;
  std::string payload(len, '\0');
  if (len > 0 && !ReadExact(fd, payload.data(), len, deadline)) {
    return std::nullopt;
  }
  return payload;
}

class TcpChannel final : public ClientChannel {
 public:
  explicit TcpChannel(std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw TransportError(ErrnoMessage("socket"));
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
      const std::string msg = ErrnoMessage("connect");
      ::close(fd_);
      throw TransportError(msg);
    }
  }
  ~TcpChannel() override { ::close(fd_); }

  void Send(int /*round*/, const std::string& payload) override {
    WriteAll(fd_, EncodeFrame(payload));
  }

  std::optional<std::string> AwaitBroadcast(
      std::chrono::milliseconds timeout) override {
    return ReadFrame(fd_, Clock::now() + timeout);
  }

 private:
  int fd_ = -1;
};

}  // namespace

std::string DecodeFrame(std::string_view frame) {
  if (frame.size() < 4) throw TransportError("truncated frame header");
  const std::uint32_t len =
      ReadLength(reinterpret_cast<const unsigned char*>(frame.data()));
  if (frame.size() - 4 != len) {
    throw TransportError("frame length " + std::to_string(len) +
                         " does not match " + std::to_string(frame.size() - 4) +
                         " payload bytes");
  }
  return std::string(frame.substr(4));
}

TcpTransport::TcpTransport(std::uint16_t port) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw TransportError(ErrnoMessage("socket"));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0 ||
      ::listen(listen_fd_, 128) < 0) {
    const std::string msg = ErrnoMessage("bind/listen");
    ::close(listen_fd_);
    throw TransportError(msg);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  acceptor_ = std::thread([this] { AcceptLoop(); });
}

TcpTransport::~TcpTransport() {
  stop_.store(true);
  if (acceptor_.joinable()) acceptor_.join();
  ::close(listen_fd_);
  {
    std::lock_guard<std::mutex> lock(mu_);
    for (int fd : connections_) ::shutdown(fd, SHUT_RDWR);
  }
  for (std::thread& t : readers_) {
    if (t.joinable()) t.join();
  }
  for (int fd : connections_) ::close(fd);
}

void TcpTransport::AcceptLoop() {
  while (!stop_.load()) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, 20);
    if (ready <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    std::lock_guard<std::mutex> lock(mu_);
    connections_.push_back(fd);
    readers_.emplace_back([this, fd] { ReadLoop(fd); });
  }
}

void TcpTransport::ReadLoop(int fd) {
  while (true) {
    std::optional<std::string> frame = ReadFrame(fd, std::nullopt);
    if (!frame) return;
    {
      std::lock_guard<std::mutex> lock(mu_);
      inbox_.push_back(std::move(*frame));
    }
    cv_.notify_all();
  }
}

std::unique_ptr<ClientChannel> TcpTransport::Connect(
    const std::string& /*client_id*/) {
  return std::make_unique<TcpChannel>(port_);
}

std::vector<std::string> TcpTransport::Gather(
    int /*round*/, std::size_t expected, std::chrono::milliseconds timeout) {
  std::unique_lock<std::mutex> lock(mu_);
  cv_.wait_for(lock, timeout,
               [&] { return inbox_.size() >= expected || stop_.load(); });
  std::vector<std::string> out(std::make_move_iterator(inbox_.begin()),
                               std::make_move_iterator(inbox_.end()));
  inbox_.clear();
  return out;
}

void TcpTransport::Broadcast(const std::string& payload) {
  const std::string frame = EncodeFrame(payload);
  std::lock_guard<std::mutex> lock(mu_);
  for (int fd : connections_) {
    try {
      WriteAll(fd, frame);
    } catch (const TransportError&) {
      // A client that hung up after round 1 is handled as a dropout.
    }
  }
}

void TcpTransport::Shutdown() {
  std::lock_guard<std::mutex> lock(mu_);
  for (int fd : connections_) ::shutdown(fd, SHUT_RDWR);
  cv_.notify_all();
}

}  // namespace fedspike
