#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace abcmc {

using Engine = std::mt19937_64;

/// Seed of child stream `index` under `seed`; a pure function of both.
std::uint64_t child_seed(std::uint64_t seed, std::uint64_t index);

/// Engine for child stream `index` under `seed`.
Engine child_engine(std::uint64_t seed, std::uint64_t index);

/// Runs body(i) for i in [0, count) on up to `workers` threads. Bodies must
/// write only to per-index state; the first exception (lowest index) is
/// rethrown after all workers join.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body);

}  // namespace abcmc
