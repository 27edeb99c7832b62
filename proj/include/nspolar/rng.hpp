#pragma once

#include <cstdint>
#include <cstring>
#include <string_view>
#include <vector>

namespace nspolar {

// splitmix64, used for seeding and for deriving independent stream seeds.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256** by Blackman/Vigna. Small state, cheap per-stream construction,
// identical output on every platform.
class Rng {
  public:
    explicit Rng(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 random bits.
    double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return u01() < p; }

    uint8_t bit() { return static_cast<uint8_t>(next_u64() >> 63); }

    // Unbiased integer in [0, bound) by rejection.
    uint64_t bounded(uint64_t bound) {
        const uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[bounded(i)]);
    }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

// FNV-1a, used both for stream derivation tags and config hashing.
inline uint64_t fnv1a(std::string_view bytes, uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline uint64_t fnv1a_u64(uint64_t v, uint64_t h) {
    char buf[8];
    std::memcpy(buf, &v, 8);
    return fnv1a(std::string_view(buf, 8), h);
}

// Derives a per-purpose, per-index stream seed from a master seed. Streams for
// distinct (tag, indices) are independent, so Monte Carlo frames can run in any
// order (or in parallel) and still reproduce bit-identically.
inline uint64_t stream_seed(uint64_t master, std::string_view tag, uint64_t i0 = 0,
                            uint64_t i1 = 0, uint64_t i2 = 0) {
    uint64_t h = fnv1a(tag);
    h = fnv1a_u64(master, h);
    h = fnv1a_u64(i0, h);
    h = fnv1a_u64(i1, h);
    h = fnv1a_u64(i2, h);
    uint64_t sm = h;
    return splitmix64(sm);
}

}  // namespace nspolar
