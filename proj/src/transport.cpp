#include "devaware/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

namespace devaware {

std::string encode_frame(std::string_view payload) {
  if (payload.size() > kMaxFrameBytes) throw TransportError(TransportError::Kind::Protocol, "frame too large");
  auto n = static_cast<uint32_t>(payload.size());
  std::string out;
  out.reserve(4 + payload.size());
  out += static_cast<char>((n >> 24) & 0xFF);
  out += static_cast<char>((n >> 16) & 0xFF);
  out += static_cast<char>((n >> 8) & 0xFF);
  out += static_cast<char>(n & 0xFF);
  out.append(payload);
  return out;
}

HostPort parse_host_port(std::string_view address) {
  auto colon = address.rfind(':');
  if (colon == std::string_view::npos || colon == 0)
    throw TransportError(TransportError::Kind::BadAddress, "expected HOST:PORT, got '" + std::string(address) + "'");
  unsigned value = 0;
  auto port_text = address.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), value);
  if (ec != std::errc() || ptr != port_text.data() + port_text.size() || value > 65535)
    throw TransportError(TransportError::Kind::BadAddress, "bad port in '" + std::string(address) + "'");
  return {std::string(address.substr(0, colon)), static_cast<uint16_t>(value)};
}

namespace {

bool write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    data.remove_prefix(static_cast<size_t>(n));
  }
  return true;
}

bool read_exact(int fd, char* buf, size_t len) {
  while (len > 0) {
    ssize_t n = ::recv(fd, buf, len, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    buf += n;
    len -= static_cast<size_t>(n);
  }
  return true;
}

enum class ReadStatus { Ok, Closed, TooLarge };

ReadStatus read_frame(int fd, std::string& out) {
  unsigned char hdr[4];
  if (!read_exact(fd, reinterpret_cast<char*>(hdr), 4)) return ReadStatus::Closed;
  uint32_t n = (uint32_t{hdr[0]} << 24) | (uint32_t{hdr[1]} << 16) | (uint32_t{hdr[2]} << 8) | uint32_t{hdr[3]};
  if (n > kMaxFrameBytes) return ReadStatus::TooLarge;
  out.resize(n);
  if (n && !read_exact(fd, out.data(), n)) return ReadStatus::Closed;
  return ReadStatus::Ok;
}

sockaddr_in resolve_ipv4(const std::string& host, uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || !res)
    throw TransportError(TransportError::Kind::BadAddress, "cannot resolve host '" + host + "'");
  sockaddr_in addr{};
  std::memcpy(&addr, res->ai_addr, sizeof(addr));
  ::freeaddrinfo(res);
  addr.sin_port = htons(port);
  return addr;
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

}  // namespace

TcpServer::TcpServer(RequestHandler handler, const std::string& host, uint16_t port) : handler_(std::move(handler)) {
  sockaddr_in addr = resolve_ipv4(host, port);
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw TransportError(TransportError::Kind::Io, std::strerror(errno));
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    int err = errno;
    ::close(listen_fd_);
    throw TransportError(err == EADDRINUSE ? TransportError::Kind::AddressInUse : TransportError::Kind::Io,
                         "bind " + host + ":" + std::to_string(port) + ": " + std::strerror(err));
  }
  if (::listen(listen_fd_, 64) != 0) {
    int err = errno;
    ::close(listen_fd_);
    throw TransportError(TransportError::Kind::Io, std::strerror(err));
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  acceptor_ = std::thread([this] { accept_loop(); });
}

TcpServer::~TcpServer() { stop(); }

void TcpServer::stop() {
  if (stopping_.exchange(true)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  if (acceptor_.joinable()) acceptor_.join();
  ::close(listen_fd_);
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    for (int fd : connections_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
}

void TcpServer::accept_loop() {
  while (!stopping_) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      return;
    }
    set_nodelay(fd);
    std::lock_guard lock(mu_);
    if (stopping_) {
      ::close(fd);
      return;
    }
    connections_.push_back(fd);
    workers_.emplace_back([this, fd] { serve(fd); });
  }
}

void TcpServer::serve(int fd) {
  std::string request;
  while (read_frame(fd, request) == ReadStatus::Ok) {
    std::string response = handler_(request);
    if (response.size() > kMaxFrameBytes || !write_all(fd, encode_frame(response))) break;
  }
  std::lock_guard lock(mu_);
  std::erase(connections_, fd);
  ::close(fd);
}

TcpClientTransport::TcpClientTransport(const std::string& host, uint16_t port) {
  sockaddr_in addr = resolve_ipv4(host, port);
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw TransportError(TransportError::Kind::Io, std::strerror(errno));
  if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    int err = errno;
    ::close(fd_);
    fd_ = -1;
    throw TransportError(TransportError::Kind::ConnectFailed,
                         "connect " + host + ":" + std::to_string(port) + ": " + std::strerror(err));
  }
  set_nodelay(fd_);
}

TcpClientTransport::~TcpClientTransport() {
  if (fd_ >= 0) ::close(fd_);
}

std::string TcpClientTransport::exchange(std::string_view request) {
  std::lock_guard lock(mu_);
  if (!write_all(fd_, encode_frame(request))) throw TransportError(TransportError::Kind::Io, "send failed");
  std::string response;
  switch (read_frame(fd_, response)) {
    case ReadStatus::Ok: return response;
    case ReadStatus::TooLarge: throw TransportError(TransportError::Kind::Protocol, "response frame too large");
    case ReadStatus::Closed: break;
  }
  throw TransportError(TransportError::Kind::Io, "connection closed by peer");
}

}  // namespace devaware
