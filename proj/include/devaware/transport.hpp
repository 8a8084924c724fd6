#pragma once

// Request/response transports. Every transport counts its round trips so
// multi-hop routes (the facade strategy) are observable.
//
// TCP framing: each message is a 4-byte big-endian length followed by that
// many bytes of UTF-8 payload. One request, one response, in order.

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace devaware {

class TransportError : public std::runtime_error {
 public:
  enum class Kind { AddressInUse, ConnectFailed, Io, Protocol, BadAddress };

  TransportError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

using RequestHandler = std::function<std::string(std::string_view)>;

class Transport {
 public:
  virtual ~Transport() = default;

  std::string round_trip(std::string_view request) {
    hops_.fetch_add(1, std::memory_order_relaxed);
    return exchange(request);
  }

  uint64_t hops() const { return hops_.load(std::memory_order_relaxed); }
  void reset_hops() { hops_.store(0, std::memory_order_relaxed); }

 protected:
  virtual std::string exchange(std::string_view request) = 0;

 private:
  std::atomic<uint64_t> hops_{0};
};

/// Delivers requests synchronously to a handler in the same process.
class InProcTransport final : public Transport {
 public:
  explicit InProcTransport(RequestHandler handler) : handler_(std::move(handler)) {}

 protected:
  std::string exchange(std::string_view request) override { return handler_(request); }

 private:
  RequestHandler handler_;
};

inline constexpr uint32_t kMaxFrameBytes = 16u << 20;

std::string encode_frame(std::string_view payload);

struct HostPort {
  std::string host;
  uint16_t port = 0;
};

/// Parses `HOST:PORT`. Throws TransportError(BadAddress).
HostPort parse_host_port(std::string_view address);

/// Loopback-capable TCP server; one thread per connection.
class TcpServer {
 public:
  /// Binds and starts accepting. Port 0 picks an ephemeral port.
  TcpServer(RequestHandler handler, const std::string& host, uint16_t port);
  ~TcpServer();

  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  uint16_t port() const { return port_; }
  void stop();

 private:
  void accept_loop();
  void serve(int fd);

  RequestHandler handler_;
  int listen_fd_ = -1;
  uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex mu_;
  std::vector<int> connections_;
  std::vector<std::thread> workers_;
};

/// Single persistent connection; concurrent callers are serialized.
class TcpClientTransport final : public Transport {
 public:
  TcpClientTransport(const std::string& host, uint16_t port);
  ~TcpClientTransport() override;

  TcpClientTransport(const TcpClientTransport&) = delete;
  TcpClientTransport& operator=(const TcpClientTransport&) = delete;

 protected:
  std::string exchange(std::string_view request) override;

 private:
  int fd_ = -1;
  std::mutex mu_;
};

}  // namespace devaware
