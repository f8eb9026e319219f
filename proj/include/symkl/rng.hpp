#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace symkl {

/// SplitMix64 finalizer. Bijective on 64-bit words; used both for seeding
/// and for deriving stream keys.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Folds a sequence of words into one 64-bit key:
///   h = mix(h + golden + w) for each word w, starting from h = 0.
/// The mapping is fixed and part of the reproducibility contract.
constexpr std::uint64_t derive_key(std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = 0;
  for (auto w : words) {
    h = splitmix64_mix(h + 0x9e3779b97f4a7c15ULL + w);
  }
  return h;
}

/// xoshiro256++ generator whose state is a pure function of (seed, index).
/// There is no global state: two streams with different indices are
/// independent for all practical purposes.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t index) noexcept {
    std::uint64_t s = derive_key({seed, index});
    for (auto& word : state_) {
      s += 0x9e3779b97f4a7c15ULL;
      word = splitmix64_mix(s);
    }
  }

  std::uint64_t next_u64() noexcept {
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

  /// Uniform on [0, 1) with 53 random bits.
  double next_double() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

}  // namespace symkl
