#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace glitter {

// splitmix64: tiny, well-mixed, and identical on every platform. std::mt19937
// would also be portable but std::shuffle / std::*_distribution are not, so
// all randomness in the project goes through this.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t fnv1a(std::string_view s, uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Derives an independent stream seed from a base seed plus arbitrary keys
// (example id, pool index, step, ...). Order-independent generation across
// examples falls out of keying rather than sharing one sequential stream.
inline uint64_t stream_seed(uint64_t seed, std::string_view key, uint64_t salt = 0) {
    uint64_t h = fnv1a(key);
    h ^= seed + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= salt + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    // one extra mix so nearby salts decorrelate
    uint64_t s = h;
    return splitmix64(s);
}

class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {
        // avoid the all-zero fixed point
        if (state_ == 0) state_ = 0x1234567887654321ULL;
    }

    uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0, 1) with 53 random bits
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n), n > 0
    uint64_t next_below(uint64_t n) {
        // modulo bias is negligible for the desk-scale n used here (< 2^32)
        return next_u64() % n;
    }

    // standard normal via Box-Muller; spare value cached
    double next_gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = next_unit();
        double u2 = next_unit();
        while (u1 <= 0.0) u1 = next_unit();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    // in-place Fisher-Yates; portable unlike std::shuffle
    template <typename Vec>
    void shuffle(Vec& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace glitter
