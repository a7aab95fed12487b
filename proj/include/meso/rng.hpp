#pragma once

#include <cstdint>
#include <random>

namespace meso {

// Streams are keyed by (master seed, trial, purpose) so that trial k draws the
// same numbers no matter how trials are scheduled across threads.
enum class Stream : std::uint64_t { initial = 1, gue = 2, sde = 3, aux = 4 };

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t trial, Stream purpose);

using Rng = std::mt19937_64;
Rng make_rng(std::uint64_t seed, std::uint64_t trial = 0, Stream purpose = Stream::aux);

}  // namespace meso
