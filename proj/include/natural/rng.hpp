#pragma once

#include <cstdint>

namespace natural {

// Stateless counter-based generator: the draw is a pure function of (seed, stream, counter),
// so per-path streams are reproducible in any order and under any thread split.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t bits(std::uint64_t counter) const;
    /// Uniform in [0, 1) with 53 random bits.
    double uniform(std::uint64_t counter) const;

  private:
    std::uint64_t key_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Named counter offsets so different consumers of one path stream never collide.
namespace rng_stream {
inline constexpr std::uint64_t branches = 0;
inline constexpr std::uint64_t default_time = 1ULL << 40;
inline constexpr std::uint64_t auxiliary = 1ULL << 41;
}  // namespace rng_stream

}  // namespace natural
