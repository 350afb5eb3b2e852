#pragma once

// Reliable byte streams used by the benchmarks. TCP sockets have Nagle's
// algorithm disabled; the in-memory pipe stands in for a socket in tests.

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>

namespace nsim::bench {

class Stream {
 public:
  virtual ~Stream() = default;
  /// Blocks until every byte is handed to the transport.
  virtual void send_all(std::span<const std::byte> data) = 0;
  /// Blocks until data is completely filled. Throws IoError on EOF or reset.
  virtual void recv_all(std::span<std::byte> data) = 0;
};

/// Two connected in-process endpoints.
std::pair<std::unique_ptr<Stream>, std::unique_ptr<Stream>> memory_pipe();

std::unique_ptr<Stream> tcp_connect(const std::string& host, std::uint16_t port);

class TcpListener {
 public:
  /// Port 0 picks an ephemeral port.
  explicit TcpListener(std::uint16_t port, const std::string& bind_address = "127.0.0.1");
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  std::unique_ptr<Stream> accept();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

/// "host:port" -> (host, port).
std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& endpoint);

// Connection setup message, network byte order:
//   magic "NSIM" | version u8 | mode u8 | size u64 | connections u16 | iterations u32
enum class WireMode : std::uint8_t { pingpong = 1, pingpong_bidir = 2 };

struct SetupMessage {
  static constexpr std::uint8_t kVersion = 1;
  static constexpr std::size_t kEncodedSize = 20;

  WireMode mode = WireMode::pingpong;
  std::uint64_t size = 0;         // payload bytes echoed per iteration on this connection
  std::uint16_t connections = 1;  // connections in the benchmark, informational
  std::uint32_t iterations = 0;   // including warmup

  std::array<std::byte, kEncodedSize> encode() const;
  /// Throws ParseError on bad magic or version.
  static SetupMessage decode(std::span<const std::byte, kEncodedSize> bytes);

  friend bool operator==(const SetupMessage&, const SetupMessage&) = default;
};

}  // namespace nsim::bench
