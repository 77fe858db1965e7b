#pragma once

#include <cstdint>
#include <limits>

namespace calabi_graph {

/**
 * Counter-based generator: draw k of stream `seed` is splitmix64(seed, k).
 *
 * Output depends only on (seed, counter), so results are identical across
 * platforms and standard libraries, unlike std::uniform_*_distribution.
 */
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t seed = 0, std::uint64_t counter = 0) noexcept
        : seed_(seed), counter_(counter) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    result_type operator()() noexcept { return mix(mix(seed_) ^ (counter_++ * 0xd1b54a32d192ed03ULL)); }

    /// Uniform double in [0, 1) with 53 random bits.
    double unit() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * unit(); }

    /// Uniform integer in [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n) noexcept {
        // Lemire's nearly-divisionless rejection
        const unsigned __int128 prod = static_cast<unsigned __int128>((*this)()) * n;
        auto low = static_cast<std::uint64_t>(prod);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            auto p = prod;
            while (low < threshold) {
                p = static_cast<unsigned __int128>((*this)()) * n;
                low = static_cast<std::uint64_t>(p);
            }
            return static_cast<std::uint64_t>(p >> 64);
        }
        return static_cast<std::uint64_t>(prod >> 64);
    }

    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_;
};

}  // namespace calabi_graph
