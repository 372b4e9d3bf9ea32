#pragma once

#include <cmath>
#include <cstdint>

namespace spinapg {

// Counter-based PRNG: every draw is a pure function of (seed, counter), so
// independent streams are carved out of the counter space without shared
// state. Same seed and counter always reproduce the same value.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t raw(std::uint64_t counter) const {
        // splitmix64 finalizer over a Weyl-sequence input
        std::uint64_t z = seed_ + 0x9E3779B97F4A7C15ULL * (counter + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform draw in [0, 1)
    double uniform(std::uint64_t counter) const {
        return static_cast<double>(raw(counter) >> 11) * 0x1.0p-53;
    }

    // standard normal via Box-Muller; consumes raw counters 2c and 2c+1
    double normal(std::uint64_t counter) const {
        const double two_pi = 6.283185307179586476925287;
        double u1 = 1.0 - uniform(2 * counter);  // in (0, 1], keeps log finite
        double u2 = uniform(2 * counter + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

private:
    std::uint64_t seed_;
};

}  // namespace spinapg
