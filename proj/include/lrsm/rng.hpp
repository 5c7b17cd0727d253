#pragma once

#include <cmath>
#include <cstdint>

namespace lrsm {

// splitmix64: the seed-mixing function used for counter-based substreams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Substream seed for (master, a, b). Parallel workers each derive their own
// stream from the replicate/segment counters, so evaluation order never
// affects the draws.
inline std::uint64_t substream(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    return splitmix64(splitmix64(splitmix64(master) ^ a) ^ (b ^ 0xd1b54a32d192ed03ULL));
}

// xoshiro256** with hand-rolled samplers. Distributions are implemented here
// rather than via <random> so that a fixed seed yields identical draws on
// every platform/standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) {
            s = splitmix64(s);
            word = s;
        }
    }

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

    // Uniform on (0, 1); never returns 0 so log(u) is safe.
    double uniform() {
        double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        return u > 0.0 ? u : 0x1.0p-53;
    }

    bool bernoulli(double prob) { return uniform() < prob; }

    // Uniform integer in [0, k); exact via power-of-two mask rejection.
    std::uint64_t next_below(std::uint64_t k) {
        if (k <= 1) return 0;
        std::uint64_t mask = ~0ULL >> __builtin_clzll((k - 1) | 1);
        std::uint64_t v;
        do {
            v = next_u64() & mask;
        } while (v >= k);
        return v;
    }

    // Poisson(mean). Knuth product search for small means; larger means are
    // split by additivity, which keeps the sampler exact.
    std::int64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        std::int64_t total = 0;
        while (mean > 30.0) {
            total += poisson_small(15.0);
            mean -= 15.0;
        }
        return total + poisson_small(mean);
    }

    // Geometric number of failures with success probability 1/(1+mean),
    // i.e. mean `mean`, support {0,1,2,...}.
    std::int64_t geometric_mean(double mean) {
        if (mean <= 0.0) return 0;
        double q = mean / (1.0 + mean);  // failure probability
        return static_cast<std::int64_t>(std::floor(std::log(uniform()) / std::log(q)));
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::int64_t poisson_small(double mean) {
        const double limit = std::exp(-mean);
        std::int64_t k = 0;
        double prod = uniform();
        while (prod > limit) {
            ++k;
            prod *= uniform();
        }
        return k;
    }

    std::uint64_t state_[4];
};

}  // namespace lrsm
