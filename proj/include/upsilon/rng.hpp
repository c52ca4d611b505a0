#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace upsilon {

// All randomness in the harness flows through this engine so that runs are
// bit-identical across platforms and worker counts. The std:: distributions
// are implementation-defined, so bounded draws are done here by rejection.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    Rng() : Rng(0) {}

    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) word = splitmix64(s);
    }

    // xoshiro256**
    std::uint64_t next_u64() {
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

    std::uint8_t next_byte() { return static_cast<std::uint8_t>(next_u64() >> 56); }

    // Uniform in [0, bound). bound = 0 is treated as the full 2^64 range.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) return next_u64();
        // rejection sampling over the largest multiple of bound
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    // Uniform double in [0, 1) with 53 bits of precision.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [0, bound) for arbitrary-width bounds, by rejection over
    // whole 64-bit words. Draw count depends only on the accepted value
    // sequence, so results are reproducible.
    template <typename Big>
    Big below_big(const Big& bound) {
        if (bound <= 1) return Big(0);
        unsigned bits = 0;
        for (Big b = bound - 1; b > 0; b >>= 1) ++bits;
        const unsigned words = (bits + 63) / 64;
        for (;;) {
            Big r = 0;
            for (unsigned i = 0; i < words; ++i) r = (r << 64) | Big(next_u64());
            r >>= words * 64 - bits;
            if (r < bound) return r;
        }
    }

    bool bernoulli(double p) { return next_double() < p; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
};

// Derives an independent stream seed from a master seed and a role path
// (e.g. {env_index, episode_index, kind}). Mixing is order-sensitive.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = master;
    splitmix64(s);
    for (std::uint64_t part : path) {
        s ^= part + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
        splitmix64(s);
    }
    return splitmix64(s);
}

namespace stream {
// Role tags for derive_seed so distinct consumers never share a stream.
inline constexpr std::uint64_t kEnvironment = 0x656e76;  // environment percepts
inline constexpr std::uint64_t kAgent = 0x61676e74;      // agent decisions
inline constexpr std::uint64_t kBootstrap = 0x62747370;  // resampling in comparisons
inline constexpr std::uint64_t kSampler = 0x73616d70;    // program sampling
}  // namespace stream

}  // namespace upsilon
