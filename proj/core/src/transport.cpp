#include "nsim/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>

#include "nsim/error.hpp"

namespace nsim::bench {
namespace {

std::string errno_text(const std::string& what) { return what + ": " + std::strerror(errno); }

class TcpStream final : public Stream {
 public:
  explicit TcpStream(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }
  ~TcpStream() override { ::close(fd_); }
  TcpStream(const TcpStream&) = delete;
  TcpStream& operator=(const TcpStream&) = delete;

  void send_all(std::span<const std::byte> data) override {
    while (!data.empty()) {
      const auto n = ::send(fd_, data.data(), data.size(), MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw IoError(errno_text("send failed"));
      }
      data = data.subspan(static_cast<std::size_t>(n));
    }
  }

  void recv_all(std::span<std::byte> data) override {
    while (!data.empty()) {
      const auto n = ::recv(fd_, data.data(), data.size(), 0);
      if (n == 0) throw IoError("connection closed by peer");
      if (n < 0) {
        if (errno == EINTR) continue;
        throw IoError(errno_text("recv failed"));
      }
      data = data.subspan(static_cast<std::size_t>(n));
    }
  }

 private:
  int fd_;
};

// One direction of an in-memory pipe.
struct ByteQueue {
  std::mutex mutex;
  std::condition_variable ready;
  std::deque<std::byte> bytes;
  bool closed = false;
};

class MemoryStream final : public Stream {
 public:
  MemoryStream(std::shared_ptr<ByteQueue> in, std::shared_ptr<ByteQueue> out)
      : in_(std::move(in)), out_(std::move(out)) {}

  ~MemoryStream() override {
    std::lock_guard lock(out_->mutex);
    out_->closed = true;
    out_->ready.notify_all();
  }

  void send_all(std::span<const std::byte> data) override {
    std::lock_guard lock(out_->mutex);
    out_->bytes.insert(out_->bytes.end(), data.begin(), data.end());
    out_->ready.notify_all();
  }

  void recv_all(std::span<std::byte> data) override {
    std::unique_lock lock(in_->mutex);
    while (!data.empty()) {
      in_->ready.wait(lock, [&] { return !in_->bytes.empty() || in_->closed; });
      if (in_->bytes.empty()) throw IoError("connection closed by peer");
      const auto n = std::min(data.size(), in_->bytes.size());
      std::copy_n(in_->bytes.begin(), n, data.begin());
      in_->bytes.erase(in_->bytes.begin(), in_->bytes.begin() + static_cast<std::ptrdiff_t>(n));
      data = data.subspan(n);
    }
  }

 private:
  std::shared_ptr<ByteQueue> in_;
  std::shared_ptr<ByteQueue> out_;
};

template <typename T>
void put_be(std::byte* out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out[sizeof(T) - 1 - i] = static_cast<std::byte>(value & 0xFF);
    value = static_cast<T>(value >> 8);
  }
}

template <typename T>
T get_be(const std::byte* in) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value = static_cast<T>((value << 8) | std::to_integer<T>(in[i]));
  }
  return value;
}

}  // namespace

std::pair<std::unique_ptr<Stream>, std::unique_ptr<Stream>> memory_pipe() {
  auto a_to_b = std::make_shared<ByteQueue>();
  auto b_to_a = std::make_shared<ByteQueue>();
  return {std::make_unique<MemoryStream>(b_to_a, a_to_b),
          std::make_unique<MemoryStream>(a_to_b, b_to_a)};
}

std::unique_ptr<Stream> tcp_connect(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  const auto service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &found); rc != 0) {
    throw IoError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  std::string last_error = "no addresses";
  for (auto* ai = found; ai; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      ::freeaddrinfo(found);
      return std::make_unique<TcpStream>(fd);
    }
    last_error = std::strerror(errno);
    ::close(fd);
  }
  ::freeaddrinfo(found);
  throw IoError("cannot connect to " + host + ":" + service + ": " + last_error);
}

TcpListener::TcpListener(std::uint16_t port, const std::string& bind_address) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw IoError(errno_text("socket"));
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, bind_address.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    throw InvalidArgument("invalid IPv4 bind address " + bind_address);
  }
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(fd_, 128) != 0) {
    const auto msg = errno_text("cannot listen on port " + std::to_string(port));
    ::close(fd_);
    throw IoError(msg);
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<Stream> TcpListener::accept() {
  for (;;) {
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) return std::make_unique<TcpStream>(fd);
    if (errno != EINTR) throw IoError(errno_text("accept failed"));
  }
}

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& endpoint) {
  const auto colon = endpoint.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw InvalidArgument("endpoint must be host:port, got '" + endpoint + "'");
  }
  std::uint16_t port = 0;
  const char* first = endpoint.data() + colon + 1;
  const char* last = endpoint.data() + endpoint.size();
  const auto [ptr, ec] = std::from_chars(first, last, port);
  if (ec != std::errc{} || ptr != last || first == last) {
    throw InvalidArgument("invalid port in endpoint '" + endpoint + "'");
  }
  return {endpoint.substr(0, colon), port};
}

std::array<std::byte, SetupMessage::kEncodedSize> SetupMessage::encode() const {
  std::array<std::byte, kEncodedSize> out{};
  const char magic[4] = {'N', 'S', 'I', 'M'};
  for (int i = 0; i < 4; ++i) out[i] = static_cast<std::byte>(magic[i]);
  out[4] = static_cast<std::byte>(kVersion);
  out[5] = static_cast<std::byte>(mode);
  put_be<std::uint64_t>(out.data() + 6, size);
  put_be<std::uint16_t>(out.data() + 14, connections);
  put_be<std::uint32_t>(out.data() + 16, iterations);
  return out;
}

SetupMessage SetupMessage::decode(std::span<const std::byte, kEncodedSize> bytes) {
  const char magic[4] = {'N', 'S', 'I', 'M'};
  for (int i = 0; i < 4; ++i) {
    if (bytes[i] != static_cast<std::byte>(magic[i])) throw ParseError("bad setup magic", 1, 1 + i);
  }
  if (std::to_integer<std::uint8_t>(bytes[4]) != kVersion) {
    throw ParseError("unsupported setup version", 1, 5);
  }
  SetupMessage m;
  const auto mode = std::to_integer<std::uint8_t>(bytes[5]);
  if (mode != 1 && mode != 2) throw ParseError("unknown setup mode", 1, 6);
  m.mode = static_cast<WireMode>(mode);
  m.size = get_be<std::uint64_t>(bytes.data() + 6);
  m.connections = get_be<std::uint16_t>(bytes.data() + 14);
  m.iterations = get_be<std::uint32_t>(bytes.data() + 16);
  return m;
}

}  // namespace nsim::bench
