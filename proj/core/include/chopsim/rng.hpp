#pragma once

#include <cstdint>
#include <random>

namespace chopsim {

/// One stream per episode or trial. Never share a stream across threads.
using Rng = std::mt19937_64;

/// Child seed for stream `index` of a run keyed by `seed`. Pure function of
/// its inputs, so trials can run in any order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

double uniform(Rng& rng, double lo, double hi);

/// Uniform integer in [lo, hi].
int uniform_int(Rng& rng, int lo, int hi);

/// Consumes exactly one draw regardless of `p`, so runs that differ only in
/// a probability stay coupled on the same random numbers.
bool bernoulli(Rng& rng, double p);

}  // namespace chopsim
