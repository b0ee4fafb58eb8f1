#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace dh {

/// SplitMix64 finalizer, used to expand seeds into generator state.
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256++ (Blackman & Vigna). Satisfies UniformRandomBitGenerator so it
/// plugs into the <random> distributions.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> state_{};
};

/// Seed of an independent substream identified by (seed, stream). Path i of a
/// simulation always uses stream i, so its draws do not depend on the path count.
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed ^ 0x6a09e667f3bcc909ULL;
  std::uint64_t a = splitmix64(s);
  std::uint64_t t = stream + 0x3c6ef372fe94f82bULL;
  std::uint64_t b = splitmix64(t);
  std::uint64_t mix = a ^ (b * 0x9e3779b97f4a7c15ULL);
  return splitmix64(mix);
}

inline Xoshiro256pp substream(std::uint64_t seed, std::uint64_t stream) {
  return Xoshiro256pp(substream_seed(seed, stream));
}

/// Tags for seeds derived from the two run seeds.
enum class SeedPurpose : std::uint64_t {
  TrainingPaths = 1,
  ContractSampling = 2,
  StartDates = 3,
  Minibatch = 4,
  Evaluation = 5,
};

constexpr std::uint64_t derived_seed(std::uint64_t seed, SeedPurpose purpose) {
  return substream_seed(seed, 0xd1b54a32d192ed03ULL + static_cast<std::uint64_t>(purpose));
}

}  // namespace dh
