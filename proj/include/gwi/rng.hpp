#pragma once

#include <cstdint>
#include <random>

namespace gwi {

/// Per-worker random engine. Never shared between threads.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of replication stream `index` under `master_seed`.
///
/// The derivation depends only on (master_seed, index), never on which
/// worker consumes the stream, so results do not depend on worker count.
std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t index);

Rng make_stream(std::uint64_t master_seed, std::uint64_t index);

/// Uniform variate on the open interval (0, 1) with 53 random bits.
inline double uniform_open(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Unit-rate exponential variate by inversion.
double exponential(Rng& rng);

}  // namespace gwi
