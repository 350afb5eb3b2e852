#include "random_schedule.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace nsim::testing {
namespace {

std::vector<goal::OpId> some_of(std::mt19937_64& rng, const goal::Schedule& s, goal::Rank r) {
  std::vector<goal::OpId> out;
  const auto n = s.ranks[r].size();
  if (n == 0) return out;
  std::uniform_int_distribution<int> count(0, 2);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (int k = count(rng); k > 0; --k) {
    const auto id = static_cast<goal::OpId>(pick(rng));
    if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
  }
  return out;
}

}  // namespace

goal::Schedule random_schedule(std::mt19937_64& rng, goal::Rank nranks, int messages, int calcs) {
  goal::Schedule s(nranks);
  std::map<std::tuple<goal::Rank, goal::Rank, std::uint64_t>, std::pair<long, long>> last;
  std::uniform_int_distribution<goal::Rank> rank(0, nranks - 1);
  static constexpr std::uint64_t kSizes[] = {1, 8, 16, 1000, 65536};
  std::uniform_int_distribution<int> size_pick(0, 4);
  std::uniform_int_distribution<std::uint64_t> calc_ns(1, 5000);
  int total = messages + calcs;
  while (total > 0) {
    std::uniform_int_distribution<int> which(1, total);
    if (which(rng) <= calcs) {
      const auto r = rank(rng);
      s.calc(r, calc_ns(rng), some_of(rng, s, r));
      --calcs;
    } else {
      const auto src = rank(rng);
      auto dst = rank(rng);
      if (nranks > 1) {
        while (dst == src) dst = rank(rng);
      }
      if (dst == src) {
        --messages;
        --total;
        continue;
      }
      const auto size = kSizes[size_pick(rng)];
      auto& [prev_send, prev_recv] = last.try_emplace({src, dst, size}, -1, -1).first->second;
      auto send_deps = some_of(rng, s, src);
      if (prev_send >= 0) send_deps.push_back(static_cast<goal::OpId>(prev_send));
      auto recv_deps = some_of(rng, s, dst);
      if (prev_recv >= 0) recv_deps.push_back(static_cast<goal::OpId>(prev_recv));
      std::sort(send_deps.begin(), send_deps.end());
      send_deps.erase(std::unique(send_deps.begin(), send_deps.end()), send_deps.end());
      std::sort(recv_deps.begin(), recv_deps.end());
      recv_deps.erase(std::unique(recv_deps.begin(), recv_deps.end()), recv_deps.end());
      prev_send = s.send(src, dst, size, send_deps);
      prev_recv = s.recv(dst, src, size, recv_deps);
      --messages;
    }
    --total;
  }
  return s;
}

LogGPParams random_params(std::mt19937_64& rng) {
  std::uniform_int_distribution<Nanos> L(1, 20000), o(1, 3000), g(1, 4000);
  std::uniform_real_distribution<double> G(0.001, 2.0);
  LogGPParams p;
  p.L = L(rng);
  p.o = o(rng);
  p.g = g(rng);
  p.G = G(rng);
  return p;
}

}  // namespace nsim::testing
