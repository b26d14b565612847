#pragma once

#include <array>
#include <cstdint>

namespace harq {

// Weyl-sequence mixer; used to expand seeds into generator state.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

  private:
    std::uint64_t state_;
};

// xoshiro256** by Blackman and Vigna. Cheap to construct, so each Monte
// Carlo trial gets its own instance keyed on (seed, trial index).
class Xoshiro256ss {
  public:
    explicit Xoshiro256ss(std::uint64_t seed) {
        SplitMix64 mixer(seed);
        for (auto& word : state_) word = mixer.next();
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on (0, 1): never returns 0 so log(u) is always finite.
    double uniform01() {
        double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
        return u > 0.0 ? u : 0x1.0p-53;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_;
};

// Decorrelated per-stream seed for substream `index` of a run seeded with
// `seed`.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
    return seed + 0x9E3779B97F4A7C15ull * (index + 1);
}

} // namespace harq
