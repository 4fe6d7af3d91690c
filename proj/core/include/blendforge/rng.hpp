#pragma once

#include <cstdint>
#include <string_view>

namespace blendforge {

/// Deterministic, platform-independent random generator.
///
/// Algorithm: xoshiro256++ (Blackman & Vigna), state seeded through splitmix64.
/// The same seed produces the same stream on every platform, which is what makes
/// baseline pose lists reproducible byte-for-byte. Independent streams are
/// derived by mixing a label (e.g. "random_view/scene_name") into the seed via
/// fnv1a64 + splitmix64.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) word = splitmix64(s);
    }

    /// Stream-separated constructor: same seed, different label -> independent stream.
    Rng(std::uint64_t seed, std::string_view stream_label)
        : Rng(seed ^ splitmix_once(fnv1a64(stream_label))) {}

    std::uint64_t next_u64() {
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

    /// Uniform double in [0, 1): top 53 bits scaled by 2^-53.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    static std::uint64_t fnv1a64(std::string_view s) {
        std::uint64_t h = 1469598103934665603ULL;
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        return h;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static std::uint64_t splitmix64(std::uint64_t& s) {
        std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t splitmix_once(std::uint64_t s) { return splitmix64(s); }

    std::uint64_t state_[4] = {};
};

}  // namespace blendforge
