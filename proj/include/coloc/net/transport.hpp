#pragma once

// Blocking TCP plumbing for the mocap stream server and the pose hub.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "coloc/net/hub.hpp"
#include "coloc/net/packet.hpp"

namespace coloc::net {

inline constexpr std::uint16_t kDefaultMocapPort = 22222;
inline constexpr std::uint16_t kDefaultHubPort = 22333;

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket();

  bool valid() const { return fd_ >= 0; }
  int fd() const { return fd_; }
  void close();
  void shutdown_both();

  // Throws Error(kNetwork) on failure (including a closed peer).
  void send_all(std::span<const std::uint8_t> bytes);
  // Returns bytes read, 0 when the peer closed, nullopt on timeout.
  std::optional<std::size_t> recv_some(std::span<std::uint8_t> buffer, int timeout_ms);

 private:
  int fd_ = -1;
};

class TcpListener {
 public:
  // Port 0 picks an ephemeral port. Throws Error(kNetwork) on bind failure.
  TcpListener(const std::string& bind_address, std::uint16_t port);
  std::uint16_t port() const { return port_; }
  std::optional<Socket> accept(int timeout_ms);

 private:
  Socket socket_;
  std::uint16_t port_ = 0;
};

Socket connect_tcp(const std::string& host, std::uint16_t port);

// Streams a fixed frame sequence to every client that connects, then closes
// that connection. A zero period sends as fast as the socket accepts.
class MocapStreamServer {
 public:
  MocapStreamServer(const std::string& bind_address, std::uint16_t port,
                    std::shared_ptr<const std::vector<std::uint8_t>> capture,
                    std::chrono::microseconds frame_period);
  ~MocapStreamServer();

  std::uint16_t port() const { return listener_.port(); }
  void start();
  void stop();
  std::size_t clients_served() const { return clients_served_.load(); }

 private:
  void accept_loop(std::stop_token stop);
  void serve_client(std::stop_token stop, Socket client);

  TcpListener listener_;
  std::shared_ptr<const std::vector<std::uint8_t>> capture_;
  std::vector<std::pair<std::size_t, std::size_t>> frames_;  // offset, size
  std::chrono::microseconds period_;
  std::atomic<std::size_t> clients_served_{0};
  std::mutex workers_mutex_;
  std::vector<std::jthread> workers_;
  std::jthread acceptor_;
};

// Reads a mocap stream until the server closes it.
std::vector<RigidBodyPacket> receive_stream(const std::string& host, std::uint16_t port,
                                            int idle_timeout_ms = 5000);

// TCP front of PoseHub: clients register, then publish shared-pose frames;
// accepted publishes are forwarded to every other registered connection.
class HubServer {
 public:
  HubServer(const std::string& bind_address, std::uint16_t port);
  ~HubServer();

  std::uint16_t port() const { return listener_.port(); }
  const PoseHub& hub() const { return hub_; }
  void start();
  void stop();

 private:
  struct Connection {
    Socket socket;
    std::mutex write_mutex;
    std::optional<std::uint16_t> user_id;
  };

  void accept_loop(std::stop_token stop);
  void serve_client(std::stop_token stop, std::shared_ptr<Connection> conn);
  void forward(const Connection& from, std::span<const std::uint8_t> frame);

  TcpListener listener_;
  PoseHub hub_;
  std::mutex connections_mutex_;
  std::vector<std::shared_ptr<Connection>> connections_;
  std::mutex workers_mutex_;
  std::vector<std::jthread> workers_;
  std::jthread acceptor_;
};

class HubClient {
 public:
  HubClient(const std::string& host, std::uint16_t port, std::uint16_t user_id);

  std::uint16_t user_id() const { return user_id_; }
  void publish(const SharedPoseMessage& msg);
  // Drains whatever arrived within timeout_ms into the local latest-wins store.
  void pump(int timeout_ms);
  std::vector<SharedPoseMessage> others() const;

 private:
  Socket socket_;
  std::uint16_t user_id_;
  FrameDecoder decoder_;
  std::map<std::uint16_t, SharedPoseMessage> latest_;
};

}  // namespace coloc::net
