#include <barrier>
#include <exception>
#include <mutex>
#include <thread>

#include "nsim/bench.hpp"
#include "nsim/error.hpp"

namespace nsim::bench {
namespace {

Nanos to_ns(Clock::duration d) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(d).count();
}

WireMode wire_mode(BenchMode mode) {
  return mode == BenchMode::pingpong_bidir ? WireMode::pingpong_bidir : WireMode::pingpong;
}

}  // namespace

void BenchPlan::validate() const {
  if (connections < 1) throw InvalidArgument("at least one connection is required");
  if (mode != BenchMode::detour) {
    if (size < 1) throw InvalidArgument("ping-pong payload must be at least 1 byte");
    if (size < connections) throw InvalidArgument("payload smaller than the connection count");
    if (iterations < 1) throw InvalidArgument("at least one measured iteration is required");
  }
  if (inter_message_interval < 0) throw InvalidArgument("inter-message interval is negative");
}

std::vector<std::uint64_t> partition_payload(std::uint64_t size, std::uint16_t connections) {
  if (connections < 1) throw InvalidArgument("at least one connection is required");
  if (size < connections) throw InvalidArgument("payload smaller than the connection count");
  std::vector<std::uint64_t> parts(connections, size / connections);
  for (std::uint64_t i = 0; i < size % connections; ++i) ++parts[i];
  return parts;
}

noise::SampleTrace pingpong(const BenchPlan& plan, const Connector& connect,
                            std::optional<Clock::time_point> epoch) {
  plan.validate();
  const auto parts = partition_payload(plan.size, plan.connections);
  const std::uint32_t total = plan.warmup_iterations + plan.iterations;

  std::vector<std::unique_ptr<Stream>> streams;
  streams.reserve(parts.size());
  for (auto part : parts) {
    auto stream = connect();
    SetupMessage setup{wire_mode(plan.mode), part, plan.connections, total};
    const auto bytes = setup.encode();
    stream->send_all(bytes);
    streams.push_back(std::move(stream));
  }
  const auto origin = epoch.value_or(Clock::now());

  std::vector<Nanos> rtt(total, 0);
  std::vector<Nanos> stamp(total, 0);
  std::uint32_t iteration = 0;
  Clock::time_point released{};
  const auto interval = std::chrono::nanoseconds(plan.inter_message_interval);

  auto on_release = [&]() noexcept { released = Clock::now(); };
  auto on_complete = [&]() noexcept {
    const auto done = Clock::now();
    rtt[iteration] = to_ns(done - released);
    stamp[iteration] = to_ns(released - origin);
    ++iteration;
    if (interval.count() > 0) std::this_thread::sleep_for(interval);
  };
  std::barrier start(static_cast<std::ptrdiff_t>(parts.size()), on_release);
  std::barrier end(static_cast<std::ptrdiff_t>(parts.size()), on_complete);

  std::mutex error_mutex;
  std::exception_ptr error;
  {
    std::vector<std::jthread> workers;
    workers.reserve(parts.size());
    for (std::size_t c = 0; c < parts.size(); ++c) {
      workers.emplace_back([&, c] {
        std::vector<std::byte> buffer(parts[c]);
        try {
          for (std::uint32_t i = 0; i < total; ++i) {
            start.arrive_and_wait();
            streams[c]->send_all(buffer);
            streams[c]->recv_all(buffer);
            end.arrive_and_wait();
          }
        } catch (...) {
          {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
          // Leave both barriers so the remaining workers are not stranded.
          start.arrive_and_drop();
          end.arrive_and_drop();
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);

  noise::SampleTrace trace;
  trace.unit = Unit::nanoseconds;
  trace.rows.reserve(plan.iterations);
  for (std::uint32_t i = plan.warmup_iterations; i < total; ++i) {
    trace.rows.push_back({stamp[i], static_cast<double>(rtt[i]) / 2.0});
  }
  return trace;
}

void serve_connection(Stream& stream) {
  std::array<std::byte, SetupMessage::kEncodedSize> raw{};
  stream.recv_all(raw);
  const auto setup = SetupMessage::decode(raw);
  std::vector<std::byte> buffer(setup.size);
  for (std::uint32_t i = 0; i < setup.iterations; ++i) {
    stream.recv_all(buffer);
    stream.send_all(buffer);
  }
}

void serve_session(TcpListener& listener) {
  auto first = listener.accept();
  std::array<std::byte, SetupMessage::kEncodedSize> raw{};
  first->recv_all(raw);
  const auto setup = SetupMessage::decode(raw);

  std::mutex error_mutex;
  std::exception_ptr error;
  auto guarded = [&](auto&& fn) {
    try {
      fn();
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  {
    std::vector<std::jthread> workers;
    workers.emplace_back([&, stream = std::move(first)] {
      guarded([&] {
        std::vector<std::byte> buffer(setup.size);
        for (std::uint32_t i = 0; i < setup.iterations; ++i) {
          stream->recv_all(buffer);
          stream->send_all(buffer);
        }
      });
    });
    for (std::uint16_t c = 1; c < setup.connections; ++c) {
      auto stream = listener.accept();
      workers.emplace_back([&, s = std::move(stream)] { guarded([&] { serve_connection(*s); }); });
    }
  }
  if (error) std::rethrow_exception(error);
}

std::pair<noise::SampleTrace, noise::SampleTrace> pingpong_bidirectional(
    const BenchPlan& plan, const Connector& a_to_b, const Connector& b_to_a) {
  if (plan.size == 0) throw InvalidArgument("ping-pong payload must be at least 1 byte");
  BenchPlan bidir = plan;
  bidir.mode = BenchMode::pingpong_bidir;
  bidir.validate();

  const auto epoch = Clock::now();
  noise::SampleTrace forward;
  std::exception_ptr forward_error;
  std::jthread other([&] {
    try {
      forward = pingpong(bidir, a_to_b, epoch);
    } catch (...) {
      forward_error = std::current_exception();
    }
  });
  auto backward = pingpong(bidir, b_to_a, epoch);
  other.join();
  if (forward_error) std::rethrow_exception(forward_error);
  return {std::move(forward), std::move(backward)};
}

}  // namespace nsim::bench
