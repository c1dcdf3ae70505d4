#pragma once

#include <cmath>
#include <cstdint>

namespace loanpool {

struct SplitMix64 {
    std::uint64_t state;
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

/// xoshiro256++ with one independent stream per simulated path, derived
/// deterministically from (master seed, path index). Results are therefore
/// identical no matter how paths are scheduled across threads.
class PathRng {
  public:
    static PathRng for_path(std::uint64_t master_seed, std::uint64_t path_index) {
        SplitMix64 sm{master_seed ^ (0x632BE59BD9B4E019ULL * (path_index + 1))};
        PathRng r;
        for (auto& w : r.s_) w = sm.next();
        return r;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }  // in [0, 1)

    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4] = {};
};

}  // namespace loanpool
