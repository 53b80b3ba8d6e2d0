#include "gwi/rng.hpp"

#include <cmath>

namespace gwi {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

Rng make_stream(std::uint64_t master_seed, std::uint64_t index) {
  const std::uint64_t s = stream_seed(master_seed, index);
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
  return Rng(seq);
}

double exponential(Rng& rng) { return -std::log(uniform_open(rng)); }

}  // namespace gwi

#include <cstdlib>
#include <string>
#include <thread>

#include "gwi/parallel.hpp"

namespace gwi {

unsigned default_workers() {
  if (const char* env = std::getenv("GWI_WORKERS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace gwi
