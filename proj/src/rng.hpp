#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace kw {

namespace detail {

inline uint64_t splitmix_finalize(uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace detail

// Counter-based generator: every draw is a pure function of
// (seed, stream name, stream index, counter). Parallel consumers derive
// disjoint streams from one seed, so results do not depend on scheduling.
class rng_stream {
public:
    rng_stream(uint64_t seed, std::string_view name, uint64_t stream_index = 0) {
        key_ = detail::splitmix_finalize(seed ^ 0x6a09e667f3bcc909ULL);
        key_ = detail::splitmix_finalize(key_ ^ detail::fnv1a64(name));
        key_ = detail::splitmix_finalize(key_ ^ (stream_index * 0x9e3779b97f4a7c15ULL + 1));
    }

    uint64_t next_u64() {
        return detail::splitmix_finalize(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL);
    }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform integer in [0, bound)
    uint64_t integer(uint64_t bound) {
        // rejection sampling keeps the distribution exact
        uint64_t limit = bound * (UINT64_MAX / bound);
        uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % bound;
    }

    // standard normal via Box-Muller (portable, no libstdc++ dependence)
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    uint64_t key_;
    uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace kw
