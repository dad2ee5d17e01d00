#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace hint {

// SplitMix64 stream. Used everywhere instead of <random> so that draws are
// identical across platforms and standard-library versions.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n), n >= 1
    uint32_t below(uint32_t n) {
        uint64_t x = next_u64() >> 32;
        return static_cast<uint32_t>((x * n) >> 32);
    }

    double gaussian() {
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    uint64_t state() const { return state_; }
    void set_state(uint64_t s) { state_ = s; }

private:
    uint64_t state_;
};

// FNV-1a over bytes; combined with extra words via splitmix mixing. Used to
// derive per-document / per-epoch seeds so results do not depend on the
// order work is scheduled in.
inline uint64_t hash_bytes(std::string_view s, uint64_t h = 0xCBF29CE484222325ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

inline uint64_t hash_combine(uint64_t a, uint64_t b) {
    Rng r(a ^ (b + 0x9E3779B97F4A7C15ull));
    return r.next_u64();
}

inline uint64_t derive_seed(uint64_t global_seed, std::string_view tag, uint64_t extra = 0) {
    return hash_combine(hash_combine(global_seed, hash_bytes(tag)), extra);
}

}  // namespace hint
