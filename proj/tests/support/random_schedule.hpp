#pragma once

#include <random>

#include "nsim/goal.hpp"
#include "nsim/model.hpp"

namespace nsim::testing {

/// Random deadlock-free schedule. Ops are created in a global order that is
/// a topological order of dependencies and messages; consecutive sends (and
/// recvs) on one (src, dst, size) channel are chained so that posting order
/// equals op-id order.
goal::Schedule random_schedule(std::mt19937_64& rng, goal::Rank nranks, int messages, int calcs);

/// L, o, g >= 1 and G > 0, so every op takes time and every message has a
/// positive flight time.
LogGPParams random_params(std::mt19937_64& rng);

}  // namespace nsim::testing
