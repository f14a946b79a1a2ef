#pragma once
#include <cstdint>
#include <string_view>

namespace mapd {

// Counter-based seeded stream.
//
// Named streams keep independent draw sequences from interleaving, so an
// instance is reproducible from (seed, stream name) alone:
//   key      = mix(seed ^ fnv1a64(name))
//   output_i = mix(key + i * GOLDEN)        (i = 1, 2, ...)
// where mix is the SplitMix64 finalizer. Streams used by the simulator:
//   "eps"      per-agent epsilon draws (in agent-id order)
//   "taskset"  taskset generation
//   "taskpick" in-run random task selection (consumed in agent-id order)
class SeedStream
{
public:
  SeedStream(std::uint64_t seed, std::string_view name)
      : key_(mix(seed ^ fnv1a64(name)))
  {
  }

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * GOLDEN); }

  // uniform double in the open interval (0,1)
  double next_unit()
  {
    double u;
    do {
      u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    } while (u <= 0.0);
    return u;
  }

  // unbiased uniform integer in [0, n), n >= 1
  std::uint64_t next_below(std::uint64_t n)
  {
    const std::uint64_t bound = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= bound);
    return x % n;
  }

  static constexpr std::uint64_t GOLDEN = 0x9E3779B97F4A7C15ull;

  static constexpr std::uint64_t mix(std::uint64_t z)
  {
    z += GOLDEN;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t fnv1a64(std::string_view s)
  {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001B3ull;
    }
    return h;
  }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace mapd
