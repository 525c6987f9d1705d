#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace chaoslab {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Per-realization seed derived from a base seed and a realization index.
constexpr std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index)
{
    return mix64(mix64(base_seed + 0x9e3779b97f4a7c15ULL) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// Counter-based generator: every draw is a pure function of (key, stream, counter), so
/// any subset of draws can be produced in any order or on any thread with identical results.
class CounterRng {
public:
    constexpr explicit CounterRng(std::uint64_t key) : key_(key) {}

    constexpr std::uint64_t key() const { return key_; }

    constexpr std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const
    {
        return mix64(mix64(key_ ^ mix64(stream * 0xd1b54a32d192ed03ULL + 1)) + counter * 0x9e3779b97f4a7c15ULL);
    }

    /// Uniform in the open interval (0,1).
    double uniform(std::uint64_t stream, std::uint64_t counter) const
    {
        return (static_cast<double>(bits(stream, counter) >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Two independent standard normals (Box-Muller) from counters 2c and 2c+1.
    void normal_pair(std::uint64_t stream, std::uint64_t c, double& z0, double& z1) const
    {
        const double u1 = uniform(stream, 2 * c);
        const double u2 = uniform(stream, 2 * c + 1);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        z0 = r * std::cos(a);
        z1 = r * std::sin(a);
    }

private:
    std::uint64_t key_;
};

/// Sequential convenience view over one stream of a CounterRng.
class RngStream {
public:
    RngStream(CounterRng rng, std::uint64_t stream) : rng_(rng), stream_(stream) {}

    double uniform() { return rng_.uniform(stream_, counter_++); }

    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double z0 = 0.0;
        rng_.normal_pair(stream_, pair_counter_++, z0, spare_);
        // pairs live in a disjoint counter range from uniform draws
        has_spare_ = true;
        return z0;
    }

private:
    CounterRng rng_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0x8000000000000000ULL;
    std::uint64_t pair_counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace chaoslab
