#include <algorithm>
#include <barrier>
#include <condition_variable>
#include <deque>
#include <exception>
#include <map>
#include <mutex>
#include <queue>
#include <thread>

#include "nsim/bench.hpp"
#include "nsim/error.hpp"

namespace nsim::bench {
namespace {

// Messages up to this size go straight into the socket buffer; larger ones
// are handed to a writer thread so that symmetric exchanges cannot block
// each other.
constexpr std::uint64_t kEagerLimit = 64 * 1024;

class AsyncWriter {
 public:
  explicit AsyncWriter(Stream& stream) : stream_(stream), thread_([this] { loop(); }) {}

  ~AsyncWriter() {
    {
      std::lock_guard lock(mutex_);
      stop_ = true;
    }
    cv_.notify_all();
  }

  void post(std::span<const std::byte> data) {
    {
      std::lock_guard lock(mutex_);
      queue_.push_back(data);
    }
    cv_.notify_all();
  }

  std::exception_ptr error() {
    std::lock_guard lock(mutex_);
    return error_;
  }

 private:
  void loop() {
    for (;;) {
      std::span<const std::byte> next;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return stop_ || !queue_.empty(); });
        if (queue_.empty()) return;
        next = queue_.front();
        queue_.pop_front();
      }
      try {
        stream_.send_all(next);
      } catch (...) {
        std::lock_guard lock(mutex_);
        error_ = std::current_exception();
        return;
      }
    }
  }

  Stream& stream_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<std::span<const std::byte>> queue_;
  std::exception_ptr error_;
  bool stop_ = false;
  std::jthread thread_;
};

// Ops of one rank in a dependency-respecting order, lowest id first.
std::vector<goal::OpId> execution_order(const std::vector<goal::ScheduleOp>& ops) {
  std::vector<std::uint32_t> indegree(ops.size(), 0);
  std::vector<std::vector<goal::OpId>> dependents(ops.size());
  for (const auto& op : ops) {
    indegree[op.id] = static_cast<std::uint32_t>(op.deps.size());
    for (auto d : op.deps) dependents[d].push_back(op.id);
  }
  std::priority_queue<goal::OpId, std::vector<goal::OpId>, std::greater<>> ready;
  for (const auto& op : ops) {
    if (indegree[op.id] == 0) ready.push(op.id);
  }
  std::vector<goal::OpId> order;
  order.reserve(ops.size());
  while (!ready.empty()) {
    const auto id = ready.top();
    ready.pop();
    order.push_back(id);
    for (auto d : dependents[id]) {
      if (--indegree[d] == 0) ready.push(d);
    }
  }
  return order;
}

void spin_for(Nanos ns) {
  const auto until = Clock::now() + std::chrono::nanoseconds(ns);
  while (Clock::now() < until) {
  }
}

}  // namespace

struct LoopbackExecutor::Impl {
  goal::Schedule schedule;
  std::vector<std::vector<goal::OpId>> order;
  // (rank, peer) -> this rank's end of the pair connection
  std::map<std::pair<goal::Rank, goal::Rank>, std::unique_ptr<Stream>> streams;
  std::map<std::pair<goal::Rank, goal::Rank>, std::unique_ptr<AsyncWriter>> writers;
  std::vector<std::byte> payload;

  explicit Impl(const goal::Schedule& s) : schedule(s) {
    goal::require_valid(s);
    std::uint64_t largest = 1;
    for (goal::Rank r = 0; r < s.nranks; ++r) {
      order.push_back(execution_order(s.ranks[r]));
      for (const auto& op : s.ranks[r]) {
        if (op.kind == goal::OpKind::calc) continue;
        largest = std::max(largest, op.size);
        const auto a = std::min(r, op.peer);
        const auto b = std::max(r, op.peer);
        if (streams.contains({a, b})) continue;
        TcpListener listener(0);
        auto client = tcp_connect("127.0.0.1", listener.port());
        auto server = listener.accept();
        streams[{a, b}] = std::move(client);
        streams[{b, a}] = std::move(server);
      }
    }
    payload.resize(largest);
    for (auto& [key, stream] : streams) {
      writers[key] = std::make_unique<AsyncWriter>(*stream);
    }
  }

  ~Impl() {
    writers.clear();
  }
};

LoopbackExecutor::LoopbackExecutor(const goal::Schedule& schedule)
    : impl_(std::make_unique<Impl>(schedule)) {}

LoopbackExecutor::~LoopbackExecutor() = default;

ExecutionResult LoopbackExecutor::run() {
  auto& im = *impl_;
  const auto p = im.schedule.nranks;
  ExecutionResult result;
  result.per_rank.assign(p, 0);
  Clock::time_point released{};
  std::barrier start(static_cast<std::ptrdiff_t>(p), [&]() noexcept { released = Clock::now(); });
  std::vector<Clock::time_point> finished(p);
  std::vector<std::exception_ptr> errors(p);

  {
    std::vector<std::jthread> threads;
    threads.reserve(p);
    for (goal::Rank r = 0; r < p; ++r) {
      threads.emplace_back([&, r] {
        std::vector<std::byte> scratch(im.payload.size());
        start.arrive_and_wait();
        try {
          for (auto id : im.order[r]) {
            const auto& op = im.schedule.ranks[r][id];
            switch (op.kind) {
              case goal::OpKind::calc:
                spin_for(static_cast<Nanos>(op.size));
                break;
              case goal::OpKind::send: {
                const std::span<const std::byte> data(im.payload.data(), op.size);
                if (op.size <= kEagerLimit) {
                  im.streams.at({r, op.peer})->send_all(data);
                } else {
                  im.writers.at({r, op.peer})->post(data);
                }
                break;
              }
              case goal::OpKind::recv:
                im.streams.at({r, op.peer})->recv_all(std::span(scratch.data(), op.size));
                break;
            }
          }
        } catch (...) {
          errors[r] = std::current_exception();
        }
        finished[r] = Clock::now();
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (auto& [key, writer] : im.writers) {
    if (auto e = writer->error()) std::rethrow_exception(e);
  }
  for (goal::Rank r = 0; r < p; ++r) {
    result.per_rank[r] =
        std::chrono::duration_cast<std::chrono::nanoseconds>(finished[r] - released).count();
    result.completion = std::max(result.completion, result.per_rank[r]);
  }
  return result;
}

}  // namespace nsim::bench
