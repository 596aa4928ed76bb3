#include "coloc/net/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <iostream>

#include "coloc/error.hpp"

namespace coloc::net {

namespace {

std::string errno_text() { return std::strerror(errno); }

bool wait_readable(int fd, int timeout_ms) {
  pollfd pfd{fd, POLLIN, 0};
  for (;;) {
    const int rc = ::poll(&pfd, 1, timeout_ms);
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) throw Error(ErrorCode::kNetwork, "poll: " + errno_text());
    return rc > 0;
  }
}

}  // namespace

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

Socket::~Socket() { close(); }

void Socket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void Socket::shutdown_both() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void Socket::send_all(std::span<const std::uint8_t> bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kNetwork, "send: " + errno_text());
    }
    sent += static_cast<std::size_t>(n);
  }
}

std::optional<std::size_t> Socket::recv_some(std::span<std::uint8_t> buffer, int timeout_ms) {
  if (!wait_readable(fd_, timeout_ms)) return std::nullopt;
  for (;;) {
    const ssize_t n = ::recv(fd_, buffer.data(), buffer.size(), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n < 0) {
      if (errno == ECONNRESET) return 0;
      throw Error(ErrorCode::kNetwork, "recv: " + errno_text());
    }
    return static_cast<std::size_t>(n);
  }
}

TcpListener::TcpListener(const std::string& bind_address, std::uint16_t port) {
  socket_ = Socket(::socket(AF_INET, SOCK_STREAM, 0));
  if (!socket_.valid()) throw Error(ErrorCode::kNetwork, "socket: " + errno_text());
  const int one = 1;
  ::setsockopt(socket_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, bind_address.c_str(), &addr.sin_addr) != 1) {
    throw Error(ErrorCode::kNetwork, "invalid bind address '" + bind_address + "'");
  }
  if (::bind(socket_.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    throw Error(ErrorCode::kNetwork,
                "bind " + bind_address + ":" + std::to_string(port) + ": " + errno_text());
  }
  if (::listen(socket_.fd(), 16) != 0) throw Error(ErrorCode::kNetwork, "listen: " + errno_text());

  socklen_t len = sizeof(addr);
  ::getsockname(socket_.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

std::optional<Socket> TcpListener::accept(int timeout_ms) {
  if (!wait_readable(socket_.fd(), timeout_ms)) return std::nullopt;
  const int fd = ::accept(socket_.fd(), nullptr, nullptr);
  if (fd < 0) return std::nullopt;
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return Socket(fd);
}

Socket connect_tcp(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* result = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &result); rc != 0) {
    throw Error(ErrorCode::kNetwork, "resolve " + host + ": " + ::gai_strerror(rc));
  }
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(result, &::freeaddrinfo);
  Socket sock(::socket(result->ai_family, result->ai_socktype, result->ai_protocol));
  if (!sock.valid()) throw Error(ErrorCode::kNetwork, "socket: " + errno_text());
  if (::connect(sock.fd(), result->ai_addr, result->ai_addrlen) != 0) {
    throw Error(ErrorCode::kNetwork, "connect " + host + ":" + service + ": " + errno_text());
  }
  const int one = 1;
  ::setsockopt(sock.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return sock;
}

MocapStreamServer::MocapStreamServer(const std::string& bind_address, std::uint16_t port,
                                     std::shared_ptr<const std::vector<std::uint8_t>> capture,
                                     std::chrono::microseconds frame_period)
    : listener_(bind_address, port), capture_(std::move(capture)), period_(frame_period) {
  // Validates the capture up front and records frame boundaries for pacing.
  FrameDecoder decoder;
  decoder.feed(*capture_);
  Frame frame;
  std::size_t offset = 0;
  while (decoder.next(frame) == DecodeStatus::kFrame) {
    if (frame.type == kTypeRigidBody) decode_packet(frame.bytes);
    frames_.emplace_back(offset, frame.bytes.size());
    offset += frame.bytes.size();
  }
  if (decoder.buffered() != 0) {
    throw Error(ErrorCode::kMalformedFrame, "capture ends inside a frame");
  }
}

MocapStreamServer::~MocapStreamServer() { stop(); }

void MocapStreamServer::start() {
  acceptor_ = std::jthread([this](std::stop_token st) { accept_loop(st); });
}

void MocapStreamServer::stop() {
  if (acceptor_.joinable()) {
    acceptor_.request_stop();
    acceptor_.join();
  }
  std::lock_guard lock(workers_mutex_);
  for (auto& w : workers_) w.request_stop();
  workers_.clear();
}

void MocapStreamServer::accept_loop(std::stop_token stop) {
  while (!stop.stop_requested()) {
    auto client = listener_.accept(50);
    if (!client) continue;
    std::lock_guard lock(workers_mutex_);
    workers_.emplace_back([this, c = std::move(*client)](std::stop_token st) mutable {
      serve_client(st, std::move(c));
    });
  }
}

void MocapStreamServer::serve_client(std::stop_token stop, Socket client) {
  const auto& bytes = *capture_;
  auto next_due = std::chrono::steady_clock::now();
  try {
    for (const auto& [offset, size] : frames_) {
      if (stop.stop_requested()) return;
      if (period_.count() > 0) {
        std::this_thread::sleep_until(next_due);
        next_due += period_;
      }
      client.send_all(std::span(bytes).subspan(offset, size));
    }
    client.shutdown_both();
    ++clients_served_;
  } catch (const Error& e) {
    std::cerr << "mocap server: client dropped: " << e.what() << '\n';
  }
}

std::vector<RigidBodyPacket> receive_stream(const std::string& host, std::uint16_t port,
                                            int idle_timeout_ms) {
  Socket sock = connect_tcp(host, port);
  PacketDecoder decoder;
  std::vector<RigidBodyPacket> packets;
  std::vector<std::uint8_t> buf(64 * 1024);
  for (;;) {
    const auto n = sock.recv_some(buf, idle_timeout_ms);
    if (!n) throw Error(ErrorCode::kNetwork, "mocap stream idle timeout");
    if (*n == 0) break;
    decoder.feed(std::span(buf).first(*n));
    while (auto p = decoder.next()) packets.push_back(std::move(*p));
  }
  if (decoder.buffered() != 0) throw Error(ErrorCode::kMalformedFrame, "stream closed mid-frame");
  return packets;
}

HubServer::HubServer(const std::string& bind_address, std::uint16_t port)
    : listener_(bind_address, port) {}

HubServer::~HubServer() { stop(); }

void HubServer::start() {
  acceptor_ = std::jthread([this](std::stop_token st) { accept_loop(st); });
}

void HubServer::stop() {
  if (acceptor_.joinable()) {
    acceptor_.request_stop();
    acceptor_.join();
  }
  {
    std::lock_guard lock(connections_mutex_);
    for (auto& c : connections_) c->socket.shutdown_both();
  }
  std::lock_guard lock(workers_mutex_);
  for (auto& w : workers_) w.request_stop();
  workers_.clear();
  std::lock_guard conn_lock(connections_mutex_);
  connections_.clear();
}

void HubServer::accept_loop(std::stop_token stop) {
  while (!stop.stop_requested()) {
    auto client = listener_.accept(50);
    if (!client) continue;
    auto conn = std::make_shared<Connection>();
    conn->socket = std::move(*client);
    {
      std::lock_guard lock(connections_mutex_);
      connections_.push_back(conn);
    }
    std::lock_guard lock(workers_mutex_);
    workers_.emplace_back([this, conn](std::stop_token st) { serve_client(st, conn); });
  }
}

void HubServer::serve_client(std::stop_token stop, std::shared_ptr<Connection> conn) {
  FrameDecoder decoder;
  std::vector<std::uint8_t> buf(16 * 1024);
  try {
    while (!stop.stop_requested()) {
      const auto n = conn->socket.recv_some(buf, 50);
      if (!n) continue;
      if (*n == 0) break;
      decoder.feed(std::span(buf).first(*n));
      Frame frame;
      while (decoder.next(frame) == DecodeStatus::kFrame) {
        if (frame.type == kTypeRegister) {
          const auto id = decode_register(frame.bytes);
          hub_.register_user(id);
          std::lock_guard lock(connections_mutex_);
          conn->user_id = id;
        } else if (frame.type == kTypeSharedPose) {
          const auto msg = decode_shared_pose(frame.bytes);
          if (!conn->user_id || *conn->user_id != msg.user_id) {
            std::cerr << "hub: publish for user " << msg.user_id << " on unregistered connection\n";
            continue;
          }
          if (hub_.publish(msg)) forward(*conn, frame.bytes);
        } else {
          std::cerr << "hub: skipping frame of unknown type " << frame.type << '\n';
        }
      }
    }
  } catch (const Error& e) {
    std::cerr << "hub: connection dropped: " << e.what() << '\n';
  }
  std::lock_guard lock(connections_mutex_);
  std::erase(connections_, conn);
}

void HubServer::forward(const Connection& from, std::span<const std::uint8_t> frame) {
  std::vector<std::shared_ptr<Connection>> targets;
  {
    std::lock_guard lock(connections_mutex_);
    for (const auto& c : connections_) {
      if (c.get() != &from && c->user_id) targets.push_back(c);
    }
  }
  for (const auto& c : targets) {
    std::lock_guard lock(c->write_mutex);
    try {
      c->socket.send_all(frame);
    } catch (const Error& e) {
      std::cerr << "hub: forward failed: " << e.what() << '\n';
    }
  }
}

HubClient::HubClient(const std::string& host, std::uint16_t port, std::uint16_t user_id)
    : socket_(connect_tcp(host, port)), user_id_(user_id) {
  socket_.send_all(encode_register(user_id));
}

void HubClient::publish(const SharedPoseMessage& msg) { socket_.send_all(encode_shared_pose(msg)); }

void HubClient::pump(int timeout_ms) {
  std::vector<std::uint8_t> buf(16 * 1024);
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  for (;;) {
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    const auto n = socket_.recv_some(buf, static_cast<int>(std::max<long>(0, remaining.count())));
    if (!n || *n == 0) return;
    decoder_.feed(std::span(buf).first(*n));
    Frame frame;
    while (decoder_.next(frame) == DecodeStatus::kFrame) {
      if (frame.type != kTypeSharedPose) continue;
      const auto msg = decode_shared_pose(frame.bytes);
      auto it = latest_.find(msg.user_id);
      if (it == latest_.end() || msg.frame_number > it->second.frame_number) latest_[msg.user_id] = msg;
    }
  }
}

std::vector<SharedPoseMessage> HubClient::others() const {
  std::vector<SharedPoseMessage> out;
  for (const auto& [id, msg] : latest_) {
    if (id != user_id_) out.push_back(msg);
  }
  return out;
}

}  // namespace coloc::net
